#include "peaks/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <limits>

namespace peaks {
namespace {

constexpr double kOrbitGuard = 1e150;

long thread_count() {
  const char* env = std::getenv("PEAKS_THREADS");
  if (!env) return 1;
  long n = std::strtol(env, nullptr, 10);
  return std::clamp(n, 1L, 64L);
}

}  // namespace

InitialSet InitialSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw error(errc::parameter, "box: dimension mismatch");
  for (long i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i])) throw error(errc::parameter, "box: lo > hi on some axis");
  InitialSet s;
  s.kind_ = Kind::box;
  s.ambient_dim_ = lo.size();
  s.param_lo_ = lo;
  s.param_hi_ = hi;
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

InitialSet InitialSet::segment(Vec a, Vec b) {
  if (a.size() != b.size() || a.size() == 0)
    throw error(errc::parameter, "segment: dimension mismatch");
  InitialSet s;
  s.kind_ = Kind::segment;
  s.ambient_dim_ = a.size();
  s.a_ = std::move(a);
  s.b_ = std::move(b);
  s.param_lo_ = Vec::Zero(1);
  s.param_hi_ = Vec::Ones(1);
  return s;
}

InitialSet InitialSet::finite_points(std::vector<Vec> pts) {
  if (pts.empty()) throw error(errc::parameter, "finite_points: empty list");
  InitialSet s;
  s.kind_ = Kind::points;
  s.ambient_dim_ = pts.front().size();
  for (const Vec& p : pts)
    if (p.size() != s.ambient_dim_)
      throw error(errc::parameter, "finite_points: dimension mismatch");
  s.points_ = std::move(pts);
  s.param_lo_ = Vec::Zero(1);
  s.param_hi_ = Vec::Ones(1);
  return s;
}

InitialSet InitialSet::box_intersect_line(Vec lo, Vec hi, Vec dir) {
  if (lo.size() != hi.size() || lo.size() != dir.size() || lo.size() == 0)
    throw error(errc::parameter, "box_intersect_line: dimension mismatch");
  if (dir.isZero(0.0))
    throw error(errc::parameter, "box_intersect_line: zero direction");
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  for (long i = 0; i < lo.size(); ++i) {
    if (dir[i] == 0.0) {
      if (lo[i] > 0.0 || hi[i] < 0.0)
        throw error(errc::parameter, "box_intersect_line: empty intersection");
      continue;
    }
    double a = lo[i] / dir[i];
    double b = hi[i] / dir[i];
    t_lo = std::max(t_lo, std::min(a, b));
    t_hi = std::min(t_hi, std::max(a, b));
  }
  if (!(t_lo <= t_hi))
    throw error(errc::parameter, "box_intersect_line: empty intersection");
  InitialSet s;
  s.kind_ = Kind::box_line;
  s.ambient_dim_ = lo.size();
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  s.dir_ = std::move(dir);
  s.param_lo_ = Vec::Constant(1, t_lo);
  s.param_hi_ = Vec::Constant(1, t_hi);
  return s;
}

Vec InitialSet::to_point(const Vec& t) const {
  switch (kind_) {
    case Kind::box:
      return t;
    case Kind::segment:
      return a_ + t[0] * (b_ - a_);
    case Kind::box_line:
      return t[0] * dir_;
    case Kind::points: {
      long i = static_cast<long>(std::lround(t[0]));
      i = std::clamp(i, 0L, point_count() - 1);
      return points_[static_cast<std::size_t>(i)];
    }
  }
  throw error(errc::parameter, "to_point: unknown kind");
}

DynamicalSystem make_linear_system(const Mat& A, InitialSet init,
                                   std::function<double(const Vec&)> phi,
                                   std::string label) {
  if (A.rows() != A.cols() || A.rows() != init.ambient_dim())
    throw error(errc::parameter, "make_linear_system: dimension mismatch");
  DynamicalSystem sys;
  sys.dim = A.rows();
  sys.initial_set = std::move(init);
  Mat M = A;
  sys.map_T = [M](const Vec& x) -> Vec { return M * x; };
  sys.objective_phi = std::move(phi);
  sys.phi_shift = sys.objective_phi(Vec::Zero(sys.dim));
  sys.label = std::move(label);
  return sys;
}

Vec iterate_map(const DynamicalSystem& sys, Vec x, long k) {
  for (long i = 0; i < k; ++i) {
    x = sys.map_T(x);
    for (long c = 0; c < x.size(); ++c) {
      if (!std::isfinite(x[c]) || std::fabs(x[c]) > kOrbitGuard) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "orbit diverged at step %ld", i + 1);
        throw orbit_divergence_error(buf, i + 1);
      }
    }
  }
  return x;
}

namespace {

struct GridBest {
  double value = -std::numeric_limits<double>::infinity();
  Vec param;
  bool valid = false;
};

// Lexicographic tie-break keeps the reduction deterministic under any
// chunking of the index range.
void consider(GridBest& best, double value, const Vec& t) {
  if (!best.valid || value > best.value) {
    best = {value, t, true};
    return;
  }
  if (value == best.value) {
    for (long i = 0; i < t.size(); ++i) {
      if (t[i] < best.param[i]) {
        best.param = t;
        return;
      }
      if (t[i] > best.param[i]) return;
    }
  }
}

double orbit_value(const DynamicalSystem& sys, const Vec& x0, long k) {
  return sys.objective_phi(iterate_map(sys, x0, k));
}

GridBest scan_window(const DynamicalSystem& sys, long k, const Vec& lo, const Vec& hi,
                     long grid) {
  const long m = lo.size();
  long total = 1;
  for (long i = 0; i < m; ++i) total *= grid;
  auto param_at = [&](long flat) {
    Vec t(m);
    for (long i = m - 1; i >= 0; --i) {
      long idx = flat % grid;
      flat /= grid;
      t[i] = (grid == 1) ? lo[i]
                         : lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx) /
                                       static_cast<double>(grid - 1);
    }
    return t;
  };
  auto scan_range = [&](long begin, long end) {
    GridBest best;
    for (long flat = begin; flat < end; ++flat) {
      Vec t = param_at(flat);
      double v = orbit_value(sys, sys.initial_set.to_point(t), k);
      consider(best, v, t);
    }
    return best;
  };
  long threads = std::min(thread_count(), total);
  if (threads <= 1) return scan_range(0, total);
  std::vector<std::future<GridBest>> futures;
  long chunk = (total + threads - 1) / threads;
  for (long t0 = 0; t0 < total; t0 += chunk)
    futures.push_back(std::async(std::launch::async, scan_range, t0,
                                 std::min(total, t0 + chunk)));
  GridBest best;
  for (auto& f : futures) {
    GridBest b = f.get();
    if (b.valid) consider(best, b.value, b.param);
  }
  return best;
}

}  // namespace

StaticSolveResult solve_static(const DynamicalSystem& sys, long k, long grid,
                               long refine_rounds) {
  if (grid < 2) throw error(errc::parameter, "solve_static: grid must be >= 2");
  if (k < 0) throw error(errc::parameter, "solve_static: k must be >= 0");
  StaticSolveResult res;
  res.k = k;

  if (sys.initial_set.discrete()) {
    GridBest best;
    for (long i = 0; i < sys.initial_set.point_count(); ++i) {
      double v = orbit_value(sys, sys.initial_set.point(i), k);
      consider(best, v, Vec::Constant(1, static_cast<double>(i)));
    }
    res.value = best.value;
    res.maximizer = sys.initial_set.point(static_cast<long>(best.param[0]));
    res.resolution = 0.0;
    return res;
  }

  Vec lo = sys.initial_set.param_lo();
  Vec hi = sys.initial_set.param_hi();
  GridBest best = scan_window(sys, k, lo, hi, grid);
  Vec cell = (hi - lo) / static_cast<double>(grid - 1);
  for (long round = 0; round < refine_rounds; ++round) {
    Vec wlo = best.param - cell;
    Vec whi = best.param + cell;
    for (long i = 0; i < lo.size(); ++i) {
      wlo[i] = std::max(wlo[i], sys.initial_set.param_lo()[i]);
      whi[i] = std::min(whi[i], sys.initial_set.param_hi()[i]);
    }
    GridBest refined = scan_window(sys, k, wlo, whi, grid);
    if (refined.valid) consider(best, refined.value, refined.param);
    cell = (whi - wlo) / static_cast<double>(grid - 1);
  }
  res.value = best.value;
  res.maximizer = sys.initial_set.to_point(best.param);
  res.resolution = cell.cwiseAbs().maxCoeff();
  res.refined = refine_rounds > 0;
  return res;
}

NuOracle::NuOracle(DynamicalSystem sys, long grid, long refine_rounds)
    : impl_(std::make_shared<Impl>()) {
  impl_->sys = std::move(sys);
  impl_->grid = grid;
  impl_->refine = refine_rounds;
}

StaticSolveResult NuOracle::result(long k) const {
  {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    auto it = impl_->cache.find(k);
    if (it != impl_->cache.end()) return it->second;
  }
  StaticSolveResult r = solve_static(impl_->sys, k, impl_->grid, impl_->refine);
  std::lock_guard<std::mutex> lock(impl_->mutex);
  auto [it, inserted] = impl_->cache.emplace(k, std::move(r));
  if (inserted) ++impl_->solves;
  return it->second;
}

double NuOracle::value(long k) const { return result(k).value; }

long NuOracle::solve_count() const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  return impl_->solves;
}

BoundedSequence NuOracle::sequence() const {
  BoundedSequence seq;
  NuOracle self = *this;
  seq.eval = [self](long k) { return self.value(k); };
  seq.label = "nu[" + impl_->sys.label + "]";
  return seq;
}

PeaksSolution solve_peaks(const DynamicalSystem& sys, const UsefulPair& pair,
                          long grid, long refine_rounds) {
  NuOracle oracle(sys, grid, refine_rounds);
  BoundedSequence seq = oracle.sequence();
  StopResult stop = solve_stop(seq, pair, /*witness_cap=*/1000);
  PeaksSolution sol;
  sol.K_bound = stop.K_bound;
  sol.nu_opt = stop.max_value;
  sol.k_opt = stop.argmax.front();
  sol.greatest_maximizer = stop.argmax.back();
  sol.x_opt = oracle.result(sol.k_opt).maximizer;
  sol.pair_used = pair;
  for (long k = 0; k <= stop.K_bound; ++k) sol.static_results.push_back(oracle.result(k));
  return sol;
}

std::vector<Vec> sample_initial(const InitialSet& init, long n) {
  std::vector<Vec> out;
  if (init.discrete()) {
    for (long i = 0; i < init.point_count(); ++i) out.push_back(init.point(i));
    return out;
  }
  const long m = init.param_dim();
  long per_axis = std::max(2L, static_cast<long>(std::llround(
                                   std::pow(static_cast<double>(n), 1.0 / m))));
  long total = 1;
  for (long i = 0; i < m; ++i) total *= per_axis;
  for (long flat = 0; flat < total; ++flat) {
    Vec t(m);
    long rest = flat;
    for (long i = m - 1; i >= 0; --i) {
      long idx = rest % per_axis;
      rest /= per_axis;
      t[i] = init.param_lo()[i] + (init.param_hi()[i] - init.param_lo()[i]) *
                                      static_cast<double>(idx) /
                                      static_cast<double>(per_axis - 1);
    }
    out.push_back(init.to_point(t));
  }
  return out;
}

std::vector<Vec> sample_ambient(const DynamicalSystem& sys, long n) {
  std::vector<Vec> out;
  const long d = sys.dim;
  out.push_back(Vec::Zero(d));

  // Bounding box of the initial set, inflated threefold.
  Vec lo = Vec::Constant(d, -1.0), hi = Vec::Constant(d, 1.0);
  for (const Vec& p : sample_initial(sys.initial_set, 16)) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Vec mid = 0.5 * (lo + hi);
  Vec half = 1.5 * (hi - lo).cwiseMax(Vec::Constant(d, 0.5));
  lo = mid - half;
  hi = mid + half;

  long per_axis = std::max(3L, static_cast<long>(std::llround(
                                   std::pow(static_cast<double>(n), 1.0 / d))));
  long total = 1;
  for (long i = 0; i < d; ++i) total *= per_axis;
  for (long flat = 0; flat < total; ++flat) {
    Vec x(d);
    long rest = flat;
    for (long i = d - 1; i >= 0; --i) {
      long idx = rest % per_axis;
      rest /= per_axis;
      x[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx) /
                         static_cast<double>(per_axis - 1);
    }
    out.push_back(x);
  }

  // For line-constrained initial sets the invariant line carries the mass;
  // sample it beyond the segment as well.
  if (sys.initial_set.kind() == InitialSet::Kind::box_line) {
    double t0 = sys.initial_set.param_lo()[0];
    double t1 = sys.initial_set.param_hi()[0];
    double r = std::max(t1 - t0, 1e-3);
    for (long i = 0; i <= 64; ++i) {
      double t = (t0 - 2.0 * r) + (t1 + 2.0 * r - (t0 - 2.0 * r)) *
                                      static_cast<double>(i) / 64.0;
      if (std::fabs(t) < 1e-6) continue;  // dodge the pole at the origin
      out.push_back(t * sys.initial_set.line_dir());
    }
  }
  return out;
}

}  // namespace peaks
