#include "peaks/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace peaks {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval_checked(const BoundedSequence& seq, long k) {
  double v = seq.eval(k);
  if (std::isnan(v)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "sequence evaluation produced NaN at k = %ld", k);
    throw evaluation_error(buf, k);
  }
  return v;
}

// u_k this close to h(0) stays out of S(u,h): ln(h^{-1}(u_k)) blows up at
// h(0), and exclusion errs on the conservative side (the formula reports
// +inf there). The margin scales with the envelope's range so that tight
// intercepts (h(0) within an ulp of a plateau value) remain usable.
double s_threshold(const MonotoneBijection& h) {
  return h.h0 + std::max((h.h1 - h.h0) * 1e-15, 1e-300);
}

}  // namespace

MonotoneBijection MonotoneBijection::from_function(
    std::function<double(double)> f,
    std::optional<std::function<double(double)>> inverse) {
  MonotoneBijection h;
  h.h0 = f(0.0);
  h.h1 = f(1.0);
  h.eval = std::move(f);
  h.inverse_hint = std::move(inverse);
  if (!(h.h0 < h.h1))
    throw error(errc::precondition, "function is not increasing across [0,1]");
  return h;
}

MonotoneBijection MonotoneBijection::linear(double a) {
  if (!(a > 0.0)) throw error(errc::parameter, "linear envelope needs a > 0");
  return from_function([a](double x) { return a * x; },
                       [a](double y) { return y / a; });
}

MonotoneBijection MonotoneBijection::affine(double a, double c) {
  if (!(a > 0.0)) throw error(errc::parameter, "affine envelope needs a > 0");
  return from_function([a, c](double x) { return a * x + c; },
                       [a, c](double y) { return (y - c) / a; });
}

bool sampled_strictly_increasing(const MonotoneBijection& h, int samples) {
  double prev = h.eval(0.0);
  for (int i = 1; i < samples; ++i) {
    double x = static_cast<double>(i) / (samples - 1);
    double v = h.eval(x);
    if (!(v > prev)) return false;
    prev = v;
  }
  return true;
}

double inverse_eval(const MonotoneBijection& h, double y) {
  double slack = 1e-9 * std::max({1.0, std::fabs(h.h0), std::fabs(h.h1)});
  if (y < h.h0 - slack || y > h.h1 + slack) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "inverse_eval: %.17g outside [h(0), h(1)] = [%.17g, %.17g]",
                  y, h.h0, h.h1);
    throw error(errc::domain, buf);
  }
  y = std::clamp(y, h.h0, h.h1);
  if (h.inverse_hint) return std::clamp((*h.inverse_hint)(y), 0.0, 1.0);
  // Bisection. h is log-sensitive near h(0), so run the bracket down to
  // ulp scale instead of stopping at a fixed absolute width.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h.eval(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

UsefulPair verify_pair(BoundedSequence& seq, MonotoneBijection h, double beta,
                       long K, double tol) {
  if (!(beta > 0.0 && beta < 1.0))
    throw error(errc::parameter, "verify_pair: beta must lie strictly inside (0,1)");
  if (K < 0) throw error(errc::parameter, "verify_pair: K must be >= 0");
  UsefulPair pair;
  pair.beta = beta;
  const double s_thr = s_threshold(h);
  for (long k = 0; k <= K; ++k) {
    double u = eval_checked(seq, k);
    double bound = h.eval(std::pow(beta, static_cast<double>(k)));
    double slack = tol * std::max(1.0, std::fabs(bound));
    if (u > bound + slack) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "envelope violated at k = %ld: u_k = %.17g > h(beta^k) = %.17g", k, u, bound);
      throw domination_error(buf, k, u, bound);
    }
    if (!pair.useful_witness && u > s_thr) pair.useful_witness = k;
    if (k == 0 && std::fabs(u - h.h1) <= tol * std::max(1.0, std::fabs(h.h1)))
      pair.sup_at_zero = true;  // u_0 = h(1): u_0 is the maximum outright
  }
  pair.verified_horizon = K;
  seq.tail_bound = [h, beta](long k) {
    return h.eval(std::pow(beta, static_cast<double>(k + 1)));
  };
  pair.h = std::move(h);
  return pair;
}

double beta_infimum(const BoundedSequence& seq, const MonotoneBijection& h, long K) {
  const double tol = 1e-9 * std::max(1.0, std::fabs(h.h1));
  double u0 = eval_checked(seq, 0);
  if (u0 > h.h1 + tol)
    throw error(errc::precondition, "beta_infimum: u_0 exceeds h(1)");
  double best = 0.0;
  const double s_thr = s_threshold(h);
  for (long k = 1; k <= K; ++k) {
    double u = eval_checked(seq, k);
    if (u >= h.h1 - tol) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "beta_infimum: u_%ld = %.17g reaches h(1); h is not an envelope candidate",
                    k, u);
      throw error(errc::precondition, buf);
    }
    if (u <= s_thr) continue;  // outside S(u,h)
    double x = inverse_eval(h, u);
    best = std::max(best, std::exp(std::log(x) / static_cast<double>(k)));
  }
  return best;
}

MonotoneBijection combine(const MonotoneBijection& h1, const MonotoneBijection& h2,
                          CombineMode mode, std::optional<double> t) {
  switch (mode) {
    case CombineMode::take_min:
      return MonotoneBijection::from_function(
          [f = h1.eval, g = h2.eval](double x) { return std::min(f(x), g(x)); });
    case CombineMode::take_max:
      return MonotoneBijection::from_function(
          [f = h1.eval, g = h2.eval](double x) { return std::max(f(x), g(x)); });
    case CombineMode::convex: {
      if (!t) throw error(errc::parameter, "combine: convex mode needs t");
      double w = *t;
      if (w < 0.0 || w > 1.0)
        throw error(errc::parameter, "combine: t must lie in [0,1]");
      if (w == 1.0) return h1;
      if (w == 0.0) return h2;
      return MonotoneBijection::from_function(
          [w, f = h1.eval, g = h2.eval](double x) { return w * f(x) + (1.0 - w) * g(x); });
    }
  }
  throw error(errc::parameter, "combine: unknown mode");
}

StoppingReport formula_F(const BoundedSequence& seq, long k, const UsefulPair& pair) {
  if (pair.verified_horizon < 0)
    throw error(errc::certificate_required, "formula_F needs a verified pair");
  StoppingReport rep;
  rep.input_k = k;
  double u = eval_checked(seq, k);
  if (u <= s_threshold(pair.h)) {
    rep.F_value = kInf;
    return rep;
  }
  double x = inverse_eval(pair.h, u);
  // x = 1 (u touches h(1)) gives F = 0, the Corollary case.
  rep.F_value = std::log(x) / std::log(pair.beta);
  rep.floor_F = static_cast<long>(std::floor(rep.F_value));
  rep.minimal_drop_index = *rep.floor_F + 1;
  return rep;
}

StopResult solve_stop(const BoundedSequence& seq, const UsefulPair& pair,
                      long witness_cap) {
  if (pair.verified_horizon < 0 && !pair.useful_witness) {
    // Unverified pair: usefulness is discovered (or refuted) while scanning.
  } else if (pair.verified_horizon >= 0 && !pair.useful_witness) {
    throw error(errc::not_useful,
                "solve_stop: pair is not useful for the sequence (formula is +inf)");
  }
  const double s_thr = s_threshold(pair.h);
  const double dom_tol = 1e-9;
  StopResult res;
  double record = -kInf;
  long stop = -1;  // -1 means "not yet finite"
  for (long k = 0;; ++k) {
    if (stop >= 0 && k > stop) break;
    if (stop < 0 && k > witness_cap)
      throw error(errc::not_useful,
                  "solve_stop: no term above h(0) within the witness cap");
    double u = eval_checked(seq, k);
    double bound = pair.h.eval(std::pow(pair.beta, static_cast<double>(k)));
    if (u > bound + dom_tol * std::max(1.0, std::fabs(bound))) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "certificate violated while solving: u_%ld = %.17g > %.17g", k, u, bound);
      throw domination_error(buf, k, u, bound);
    }
    res.prefix.push_back(u);
    if (u > record) {
      record = u;
      if (u > s_thr) {
        double x = inverse_eval(pair.h, u);
        double F = std::log(x) / std::log(pair.beta);
        // Directed nudge: F is an upper bound in exact arithmetic, so a
        // razor-edge floor may only be rounded up, never down.
        stop = static_cast<long>(std::floor(F + 1e-9));
      }
    }
  }
  res.K_bound = stop;
  res.max_value = record;
  const double tie = 1e-12;
  for (long k = 0; k <= stop; ++k)
    if (res.prefix[static_cast<std::size_t>(k)] >= record - tie) res.argmax.push_back(k);
  return res;
}

long greatest_maximizer(const BoundedSequence& seq, const UsefulPair& pair) {
  StopResult r = solve_stop(seq, pair);
  return r.argmax.back();
}

std::pair<double, double> optimal_affine(std::span<const double> prefix, long K_s,
                                         long N_c, double c) {
  if (K_s < 0 || N_c <= K_s || static_cast<std::size_t>(N_c) >= prefix.size())
    throw error(errc::parameter, "optimal_affine: need 0 <= K_s < N_c < prefix length");
  const double u_star = prefix[static_cast<std::size_t>(K_s)];
  if (!(c < u_star))
    throw error(errc::parameter, "optimal_affine: c must be strictly below u_{K_s}");
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (prefix[k] > u_star + 1e-12)
      throw error(errc::precondition, "optimal_affine: K_s is not the prefix maximum");
    if (k > static_cast<std::size_t>(K_s) && k <= static_cast<std::size_t>(N_c) &&
        prefix[k] >= u_star)
      throw error(errc::precondition,
                  "optimal_affine: K_s is not the greatest prefix maximizer");
    if (k >= static_cast<std::size_t>(N_c) && prefix[k] > c)
      throw error(errc::parameter, "optimal_affine: some u_k > c beyond N_c");
  }
  double gamma = -kInf;
  for (long k = K_s + 1; k <= N_c; ++k)
    gamma = std::max(gamma, (u_star - prefix[static_cast<std::size_t>(k)]) /
                                static_cast<double>(K_s - k));
  // gamma < 0 because K_s is the greatest maximizer.
  double scale = u_star - c;
  double b = std::exp(gamma / scale);
  double a = scale * std::exp(-static_cast<double>(K_s) * gamma / scale);
  return {a, b};
}

}  // namespace peaks
