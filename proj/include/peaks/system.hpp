#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "peaks/envelope.hpp"
#include "peaks/seq.hpp"

namespace peaks {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bounded nonempty initial-condition sets, parameterized so the static
// problems are solved in parameter space (a segment is one scalar, a box is
// one parameter per axis, a box-line intersection is one parameter along
// the line).
class InitialSet {
 public:
  enum class Kind { box, segment, points, box_line };

  static InitialSet box(Vec lo, Vec hi);
  static InitialSet segment(Vec a, Vec b);
  static InitialSet finite_points(std::vector<Vec> pts);
  // {t * dir} clipped to [lo, hi]; throws when the intersection is empty.
  static InitialSet box_intersect_line(Vec lo, Vec hi, Vec dir);

  Kind kind() const { return kind_; }
  long ambient_dim() const { return ambient_dim_; }
  bool discrete() const { return kind_ == Kind::points; }
  long point_count() const { return static_cast<long>(points_.size()); }
  const Vec& point(long i) const { return points_[static_cast<std::size_t>(i)]; }

  long param_dim() const { return static_cast<long>(param_lo_.size()); }
  const Vec& param_lo() const { return param_lo_; }
  const Vec& param_hi() const { return param_hi_; }
  Vec to_point(const Vec& t) const;

  const Vec& line_dir() const { return dir_; }

 private:
  Kind kind_{Kind::box};
  long ambient_dim_ = 0;
  Vec lo_, hi_, a_, b_, dir_;
  Vec param_lo_, param_hi_;
  std::vector<Vec> points_;
};

struct DynamicalSystem {
  long dim = 0;
  InitialSet initial_set;
  std::function<Vec(const Vec&)> map_T;
  std::function<double(const Vec&)> objective_phi;
  double phi_shift = 0.0;  // phi(0); certificate routes that need phi(0) = 0
                           // require the caller to pre-shift.
  std::string label;
};

DynamicalSystem make_linear_system(const Mat& A, InitialSet init,
                                   std::function<double(const Vec&)> phi,
                                   std::string label = {});

// Applies T k times with an overflow guard: any coordinate above 1e150 in
// magnitude raises orbit_divergence.
Vec iterate_map(const DynamicalSystem& sys, Vec x, long k);

struct StaticSolveResult {
  long k = 0;
  double value = 0.0;
  Vec maximizer;
  double resolution = 0.0;
  bool refined = false;
};

// Maximizes phi(T^k(x)) over the initial set by a deterministic coarse grid
// in parameter space followed by refine_rounds shrink-and-regrid passes
// around the incumbent. Ties break toward the lexicographically smallest
// parameter. Honors the PEAKS_THREADS environment variable.
StaticSolveResult solve_static(const DynamicalSystem& sys, long k, long grid,
                               long refine_rounds);

// Memoized per-k access to the static problems; the cache serializes
// concurrent writes.
class NuOracle {
 public:
  NuOracle(DynamicalSystem sys, long grid, long refine_rounds);

  double value(long k) const;
  StaticSolveResult result(long k) const;
  long solve_count() const;
  const DynamicalSystem& system() const { return impl_->sys; }

  // A BoundedSequence view over the memoized values; no tail bound until a
  // verified pair installs one.
  BoundedSequence sequence() const;

 private:
  struct Impl {
    DynamicalSystem sys;
    long grid;
    long refine;
    mutable std::mutex mutex;
    mutable std::map<long, StaticSolveResult> cache;
    mutable long solves = 0;
  };
  std::shared_ptr<Impl> impl_;
};

inline BoundedSequence nu_oracle(DynamicalSystem sys, long grid, long refine_rounds) {
  return NuOracle(std::move(sys), grid, refine_rounds).sequence();
}

struct PeaksSolution {
  long K_bound = 0;
  double nu_opt = 0.0;
  long k_opt = 0;              // least maximizer
  long greatest_maximizer = 0;
  Vec x_opt;
  UsefulPair pair_used;
  std::vector<StaticSolveResult> static_results;
};

// End-to-end pipeline: runs the stopping-index enumeration over the
// memoized nu oracle. The pair may arrive verified against a closed form or
// structurally unverified; every enumerated term is re-checked and a
// violation raises domination_error (the certificate was wrong).
PeaksSolution solve_peaks(const DynamicalSystem& sys, const UsefulPair& pair,
                          long grid, long refine_rounds);

// Deterministic parameter-grid samples of the initial set (endpoints
// included); used by the sampling verifiers.
std::vector<Vec> sample_initial(const InitialSet& init, long n);

// Deterministic ambient samples: the origin, a grid on an inflated bounding
// box of the initial set, and, for box-line sets, points along the line
// beyond the segment.
std::vector<Vec> sample_ambient(const DynamicalSystem& sys, long n);

}  // namespace peaks
