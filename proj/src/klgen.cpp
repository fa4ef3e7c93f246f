#include "peaks/klgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace peaks {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> geometric_t_grid(double t_max) {
  std::vector<double> ts{0.0};
  for (double t = 1.0 / 64.0; t <= t_max; t *= 1.5) ts.push_back(t);
  ts.push_back(t_max);
  return ts;
}

}  // namespace

double inf_over_t(const std::function<double(double)>& f, double t_max) {
  double best = kInf;
  for (double t : geometric_t_grid(t_max)) best = std::min(best, f(t));
  return best;
}

KLGenFunction make_klgen_checked(std::function<double(double, double)> f,
                                 double s_lo, double s_hi, double t_max) {
  const int ns = 17;
  auto ts = geometric_t_grid(t_max);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    double prev = -kInf;
    for (int i = 0; i < ns; ++i) {
      double s = s_lo + (s_hi - s_lo) * i / (ns - 1);
      double v = f(s, ts[j]);
      if (v < prev - 1e-12)
        throw error(errc::precondition, "KL_gen check: not increasing in s");
      prev = std::max(prev, v);
    }
  }
  for (int i = 0; i < ns; ++i) {
    double s = s_lo + (s_hi - s_lo) * i / (ns - 1);
    double prev = kInf;
    for (double t : ts) {
      double v = f(s, t);
      if (v > prev + 1e-12)
        throw error(errc::precondition, "KL_gen check: not decreasing in t");
      prev = std::min(prev, v);
    }
  }
  KLGenFunction g;
  g.eval = std::move(f);
  g.monotonicity_checked = true;
  return g;
}

std::function<double(double)> majorize_decreasing(std::function<double(double)> f,
                                                  double m, double inf_horizon) {
  // Sampled precondition: f decreasing.
  double prev = f(0.0);
  for (int i = 1; i <= 64; ++i) {
    double x = inf_horizon * i / 64.0;
    double v = f(x);
    if (v > prev + 1e-9)
      throw error(errc::precondition, "majorize_decreasing: f is not decreasing");
    prev = v;
  }
  // The sampled infimum is only an upper estimate of the true one, so m is
  // rejected as too small only when the decay has flattened by the horizon.
  // A slice still descending there may have any smaller limit; m = -inf is
  // admissible exactly when inf f is, and that claim stays the caller's.
  double inf_est = f(inf_horizon);
  double slack = 1e-9 * std::max(1.0, std::fabs(inf_est));
  bool flattened = f(0.5 * inf_horizon) - inf_est <= slack;
  if (std::isfinite(m) && flattened && m < inf_est - slack)
    throw error(errc::parameter,
                "majorize_decreasing: m is below the estimated infimum of f");

  double f0 = f(0.0);
  if (m >= f0) {
    return [m](double x) { return m + 1.0 / (x + 1.0); };
  }
  // Staircase: f(0) on [0,1]; f(n-1) on [n, n+1/2]; the affine bridge from
  // (n+1/2, f(n-1)) to (n+1, f(n)) on (n+1/2, n+1). Adding 1/(x+1) makes it
  // strictly decreasing; maxing with 1/(x+1) + m pins the infimum at m.
  auto staircase = [f](double x) {
    if (x <= 1.0) return f(0.0);
    double n = std::floor(x);
    double fn1 = f(n - 1.0);
    if (x <= n + 0.5) return fn1;
    double fn = f(n);
    double w = (x - (n + 0.5)) / 0.5;
    return fn1 + (fn - fn1) * w;
  };
  return [staircase, m](double x) {
    double base = 1.0 / (x + 1.0);
    return std::max(staircase(x) + base, m + base);
  };
}

MonotoneBijection sontag_extension(const KLGenFunction& gamma, double s, double m) {
  if (!std::isfinite(m))
    throw error(errc::parameter, "sontag_extension: m must be finite");
  auto slice = [g = gamma.eval, s](double t) { return g(s, t); };
  auto sigma = majorize_decreasing(slice, m);  // guards m against the infimum
  double h1 = sigma(0.0);
  MonotoneBijection h;
  h.h0 = m;
  h.h1 = h1;
  h.eval = [sigma, m, h1](double r) {
    if (r <= 0.0) return m;
    if (r >= 1.0) return h1;
    return sigma(-std::log(r));
  };
  return h;
}

UsefulPair pair_from_klgen(const KLGenUpperBound& bound, BoundedSequence& seq,
                           double m, long K) {
  MonotoneBijection h = sontag_extension(bound.gamma, bound.theta_sup, m);
  return verify_pair(seq, std::move(h), std::exp(-1.0), K);
}

KLGenUpperBound klgen_from_pair(const UsefulPair& pair, const DynamicalSystem& sys,
                                long horizon, long samples) {
  if (pair.verified_horizon < 0)
    throw error(errc::certificate_required, "klgen_from_pair needs a verified pair");
  KLGenUpperBound bound;
  auto h = pair.h;
  double beta = pair.beta;
  bound.gamma.eval = [h, beta](double s, double t) {
    return std::min(s, h.eval(std::pow(beta, t)));
  };
  bound.gamma.monotonicity_checked = true;  // min{s, h(beta^t)} by construction

  // theta(x) = sup_k phi(T^k(x)): an orbit supremum, complete once the
  // pair's tail bound h(beta^{k+1}) drops below the running maximum.
  DynamicalSystem sys_copy = sys;
  bound.theta = [sys_copy, h, beta, horizon](const Vec& x0) {
    Vec x = x0;
    double best = -kInf;
    for (long k = 0; k <= horizon; ++k) {
      best = std::max(best, sys_copy.objective_phi(x));
      // Remaining terms are bounded by h(beta^{k+1}); once that falls to
      // the running maximum the supremum is closed.
      double tail = h.eval(std::pow(beta, static_cast<double>(k + 1)));
      if (tail <= best + 1e-12 * std::max(1.0, std::fabs(best))) return best;
      x = sys_copy.map_T(x);
      for (long c = 0; c < x.size(); ++c)
        if (!std::isfinite(x[c]) || std::fabs(x[c]) > 1e150)
          throw orbit_divergence_error("orbit diverged while computing theta", k + 1);
    }
    throw error(errc::certificate_required,
                "klgen_from_pair: horizon too small to certify the orbit supremum");
  };

  double sup = -kInf;
  for (const Vec& x : sample_initial(sys.initial_set, samples))
    sup = std::max(sup, bound.theta(x));
  bound.theta_sup = sup;
  bound.useful_flag = pair.useful_witness.has_value();
  return bound;
}

KLGenVerifyReport verify_klgen_bound(const KLGenUpperBound& bound,
                                     const DynamicalSystem& sys, long horizon,
                                     long samples) {
  KLGenVerifyReport rep;
  rep.worst_margin = kInf;
  std::vector<Vec> pts = sample_initial(sys.initial_set, samples);
  std::vector<double> nu_hat(static_cast<std::size_t>(horizon) + 1, -kInf);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vec x = pts[i];
    double th = bound.theta(x);
    for (long k = 0; k <= horizon; ++k) {
      double phi = sys.objective_phi(x);
      nu_hat[static_cast<std::size_t>(k)] =
          std::max(nu_hat[static_cast<std::size_t>(k)], phi);
      double margin = bound.gamma.eval(th, static_cast<double>(k)) - phi;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.witness_sample = static_cast<long>(i);
        rep.witness_k = k;
      }
      if (k < horizon) x = sys.map_T(x);
    }
  }
  rep.violated = rep.worst_margin < -1e-12;
  rep.inf_gamma_at_theta_sup =
      inf_over_t([&](double t) { return bound.gamma.eval(bound.theta_sup, t); });
  for (double v : nu_hat)
    if (rep.inf_gamma_at_theta_sup < v - 1e-12) {
      rep.useful = true;
      break;
    }
  return rep;
}

}  // namespace peaks
