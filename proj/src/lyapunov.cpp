#include "peaks/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace peaks {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFixedPointDelta = 1e-8;

std::vector<Vec> verification_points(const DynamicalSystem& sys, long samples) {
  std::vector<Vec> pts = sample_ambient(sys, samples);
  for (const Vec& p : sample_initial(sys.initial_set, samples)) pts.push_back(p);
  // One step of images so the decrement is exercised off the initial set.
  std::size_t base = pts.size();
  for (std::size_t i = 0; i < base; ++i) {
    try {
      pts.push_back(sys.map_T(pts[i]));
    } catch (const error&) {
      // unreachable image points are simply skipped
    }
  }
  return pts;
}

double checked_V(const PsdFunction& V, const Vec& x) {
  double v = V.eval(x);
  if (std::isnan(v)) throw error(errc::evaluation, "V produced NaN");
  return v;
}

// Inverse of a strictly increasing alpha on [lo, hi] by bisection.
double invert_increasing(const std::function<double(double)>& f, double lo, double hi,
                         double y) {
  double flo = f(lo), fhi = f(hi);
  double slack = 1e-9 * std::max({1.0, std::fabs(flo), std::fabs(fhi)});
  if (y < flo - slack || y > fhi + slack)
    throw error(errc::domain, "inverse: value outside the function range");
  y = std::clamp(y, flo, fhi);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

OptLyapunovCandidate verify_opt_lyapunov(const PsdFunction& V,
                                         const DynamicalSystem& sys, double lambda,
                                         long samples) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw error(errc::parameter, "verify_opt_lyapunov: lambda must be in (0,1)");
  const double tol = 1e-9;
  for (const Vec& x : verification_points(sys, samples)) {
    double vx = checked_V(V, x);
    if (vx < -tol)
      throw domination_error("V is negative at a sampled point", 0, vx, 0.0);
    if (std::isinf(vx)) continue;  // lambda * inf = inf: nothing to check
    Vec tx = sys.map_T(x);
    double vtx = checked_V(V, tx);
    if (vtx > lambda * vx + tol * std::max(1.0, vx)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "decrement violated: V(T(x)) = %.17g > lambda V(x) = %.17g", vtx,
                    lambda * vx);
      throw domination_error(buf, 0, vtx, lambda * vx);
    }
    if ((tx - x).norm() <= kFixedPointDelta) {
      // Fixed points carry V in {0, +inf}.
      if (vx > 1e-6)
        throw domination_error("V at an approximate fixed point is neither 0 nor +inf",
                               0, vx, 0.0);
    }
  }
  double v_sup = -kInf;
  for (const Vec& x : sample_initial(sys.initial_set, samples))
    v_sup = std::max(v_sup, checked_V(V, x));
  if (!(v_sup > tol))
    throw error(errc::range, "verify_opt_lyapunov: sup of V over the initial set is 0");
  if (v_sup > 1.0 + 1e-9)
    throw error(errc::range, "verify_opt_lyapunov: sup of V over the initial set exceeds 1");
  OptLyapunovCandidate cand;
  cand.V = V;
  cand.lambda = lambda;
  cand.V_sup = std::min(v_sup, 1.0);
  cand.ratio = operator_ratio(V, sys, 1, samples).ratio;
  return cand;
}

OperatorRatioReport operator_ratio(const PsdFunction& P, const DynamicalSystem& sys,
                                   long k, long samples) {
  if (k < 0) throw error(errc::parameter, "operator_ratio: k must be >= 0");
  OperatorRatioReport rep;
  std::vector<Vec> pts = verification_points(sys, samples);
  if (P.positivity_witness) pts.push_back(*P.positivity_witness);
  double sup = -kInf;
  for (const Vec& x : pts) {
    double px = checked_V(P, x);
    // Membership in N(T): P(T(x)) = 0 must force P(T^2(x)) = 0.
    try {
      Vec tx = sys.map_T(x);
      if (checked_V(P, tx) == 0.0 && checked_V(P, sys.map_T(tx)) != 0.0)
        rep.n_condition_held = false;
    } catch (const error&) {
    }
    if (!(px > 0.0) || std::isinf(px)) continue;
    ++rep.support_samples;
    try {
      double py = checked_V(P, iterate_map(sys, x, k));
      sup = std::max(sup, py / px);
    } catch (const orbit_divergence_error&) {
    }
  }
  if (rep.support_samples == 0)
    throw error(errc::degenerate_input,
                "operator_ratio: no sampled point has P(x) in (0, inf)");
  rep.ratio = sup == -kInf ? 0.0 : sup;
  return rep;
}

CertificateReport verify_certificate(const CompatibilityCertificate& cert,
                                     const PsdFunction& g, const DynamicalSystem& sys,
                                     long horizon, long samples) {
  CertificateReport rep;
  rep.worst_margin = kInf;

  // Sampled nu values double as the checked-domain extension.
  long k_probe = std::min(horizon, 64L);
  std::vector<Vec> init_pts = sample_initial(sys.initial_set, samples);
  std::vector<double> nu_hat(static_cast<std::size_t>(k_probe) + 1, -kInf);
  {
    std::vector<Vec> xs = init_pts;
    for (long k = 0; k <= k_probe; ++k) {
      for (Vec& x : xs) {
        nu_hat[static_cast<std::size_t>(k)] =
            std::max(nu_hat[static_cast<std::size_t>(k)], sys.objective_phi(x));
        if (k < k_probe) x = sys.map_T(x);
      }
    }
  }
  double lo = cert.domain_lo, hi = cert.domain_hi;
  for (double v : nu_hat) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  // Strict increase and a continuity proxy on the widened domain.
  rep.monotone = true;
  const int grid = 257;
  double prev = cert.alpha(lo);
  for (int i = 1; i < grid; ++i) {
    double x = lo + (hi - lo) * i / (grid - 1);
    double v = cert.alpha(x);
    if (!(v > prev)) rep.monotone = false;
    double step = (hi - lo) * 1e-8;
    if (std::fabs(cert.alpha(x - step) - v) > 1e-2 * std::max(1.0, std::fabs(hi - lo)))
      rep.monotone = false;  // jump at the sampled resolution
    prev = v;
  }

  for (long k = 0; k <= k_probe; ++k)
    if (cert.alpha(nu_hat[static_cast<std::size_t>(k)]) > 0.0)
      rep.alpha_positive_somewhere = true;

  for (std::size_t i = 0; i < init_pts.size(); ++i) {
    Vec x = init_pts[i];
    for (long k = 0; k <= horizon; ++k) {
      double margin = checked_V(g, x) - cert.alpha(sys.objective_phi(x));
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.witness_sample = static_cast<long>(i);
        rep.witness_k = k;
      }
      if (k < horizon) x = sys.map_T(x);
    }
  }
  rep.ok = rep.monotone && rep.alpha_positive_somewhere && rep.worst_margin >= -1e-9;
  return rep;
}

CompatibilityCertificate certificate_from_margins(double nu_opt, double epsilon,
                                                  double eta) {
  if (!(epsilon > 0.0) || !(eta > 0.0))
    throw error(errc::parameter, "certificate_from_margins: margins must be positive");
  double shift = nu_opt - std::min(eta, epsilon);
  CompatibilityCertificate cert;
  cert.alpha = [shift](double s) { return s - shift; };
  cert.alpha_inverse = [shift](double y) { return y + shift; };
  cert.I_lo = shift;
  cert.I_hi = shift + 1.0;
  cert.domain_lo = cert.I_lo;
  cert.domain_hi = cert.I_hi;
  return cert;
}

LyapunovPairOutcome pair_from_lyapunov(const OptLyapunovCandidate& cand,
                                       const CompatibilityCertificate& cert,
                                       BoundedSequence& seq, long K) {
  LyapunovPairOutcome out;
  if (cand.ratio <= 0.0) {
    out.immediate_optimum = true;  // K^s = 0 and nu_opt = nu_0
    return out;
  }
  double vbar = cand.V_sup;
  MonotoneBijection h;
  if (cert.alpha_inverse) {
    auto ainv = *cert.alpha_inverse;
    h.eval = [ainv, vbar](double x) { return ainv(x * vbar); };
  } else {
    auto a = cert.alpha;
    double lo = cert.I_lo, hi = cert.I_hi;
    h.eval = [a, lo, hi, vbar](double x) { return invert_increasing(a, lo, hi, x * vbar); };
  }
  // h^{-1}(y) = alpha(y)/V_sup is always available in closed form.
  auto alpha = cert.alpha;
  h.inverse_hint = [alpha, vbar](double y) { return alpha(y) / vbar; };
  h.h0 = h.eval(0.0);
  h.h1 = h.eval(1.0);
  UsefulPair pair = verify_pair(seq, std::move(h), cand.ratio, K);
  if (!pair.useful_witness)
    throw error(errc::not_useful, "pair_from_lyapunov: constructed pair is not useful");
  out.pair = std::move(pair);
  return out;
}

YoshizawaResult yoshizawa_construct(const UsefulPair& pair, const DynamicalSystem& sys,
                                    long k_max) {
  if (pair.verified_horizon < 0 || !pair.useful_witness)
    throw error(errc::certificate_required,
                "yoshizawa_construct needs a verified useful pair");
  YoshizawaResult res;
  res.k_max = k_max;
  res.truncation_seen = std::make_shared<std::atomic<bool>>(false);

  MonotoneBijection h = pair.h;
  double beta = pair.beta;
  double h0 = h.h0, h1 = h.h1;
  DynamicalSystem sys_copy = sys;
  auto flag = res.truncation_seen;
  res.V.eval = [h, beta, h0, h1, k_max, sys_copy, flag](const Vec& x0) {
    Vec x = x0;
    double sup = 0.0;
    double inv_beta_pow = 1.0;  // beta^{-k}
    long last_alive = -1;
    for (long k = 0; k <= k_max; ++k) {
      double phi = sys_copy.objective_phi(x);
      double omega = std::min(h1, std::max(phi, h0));
      double term = inv_beta_pow * inverse_eval(h, omega);
      sup = std::max(sup, term);
      if (phi > h0) last_alive = k;
      if (k < k_max) {
        inv_beta_pow /= beta;
        try {
          x = sys_copy.map_T(x);
          for (long c = 0; c < x.size(); ++c)
            if (!std::isfinite(x[c]) || std::fabs(x[c]) > 1e150)
              throw orbit_divergence_error("orbit diverged", k + 1);
        } catch (const orbit_divergence_error&) {
          // Diverging orbits with clamped terms contribute nothing further
          // only if the objective has dropped below h(0); otherwise the
          // truncation is visible through last_alive.
          break;
        }
      }
    }
    if (last_alive > k_max - 25) flag->store(true);
    return sup;
  };
  // A point of the initial set with a term above h(0) gives positivity.
  for (const Vec& p : sample_initial(sys.initial_set, 64)) {
    double v = res.V.eval(p);
    if (v > 0.0 && std::isfinite(v)) {
      res.V.positivity_witness = p;
      break;
    }
  }

  // The certificate: s - h(0) below h(0), h^{-1} on (h(0), h(1)], extended
  // affinely above h(1) so sampling outside the orbit range stays defined.
  MonotoneBijection h2 = pair.h;
  res.h_hat.alpha = [h2, h0, h1](double s) {
    if (s <= h0) return s - h0;
    if (s <= h1) return inverse_eval(h2, s);
    return 1.0 + (s - h1);
  };
  MonotoneBijection h3 = pair.h;
  res.h_hat.alpha_inverse = [h3, h0, h1](double y) {
    if (y <= 0.0) return y + h0;
    if (y <= 1.0) return h3.eval(y);
    return h1 + (y - 1.0);
  };
  res.h_hat.I_lo = h0;
  res.h_hat.I_hi = h1;
  res.h_hat.domain_lo = h0 - 10.0 * std::max({1.0, std::fabs(h0), std::fabs(h1)});
  res.h_hat.domain_hi = h1;
  return res;
}

std::function<double(double)> kappa_conjugacy(std::function<double(double)> f,
                                              double factor, bool contraction) {
  // Sampled shape preconditions on (0, 10].
  {
    double prev = 0.0;
    for (int i = 1; i <= 128; ++i) {
      double x = 10.0 * i / 128.0;
      double v = f(x);
      if (!(v > prev))
        throw error(errc::precondition, "kappa_conjugacy: f is not strictly increasing");
      if (!contraction && !(v > x))
        throw error(errc::precondition, "kappa_conjugacy: expansion mode needs f(x) > x");
      if (contraction && !(v < x))
        throw error(errc::precondition, "kappa_conjugacy: contraction mode needs f(x) < x");
      prev = v;
    }
  }
  if (!contraction && !(factor > 1.0))
    throw error(errc::parameter, "kappa_conjugacy: expansion mode needs factor > 1");
  if (contraction && !(factor > 0.0 && factor < 1.0))
    throw error(errc::parameter, "kappa_conjugacy: contraction mode needs factor in (0,1)");

  // Bisection inverse used for the non-closed direction.
  auto bisect_inverse = [](const std::function<double(double)>& fn, double y,
                           bool above) {
    // above: fn(x) > x so the root sits in [0, y]; otherwise in [y, hi].
    double lo, hi;
    if (above) {
      lo = 0.0;
      hi = y;
    } else {
      lo = y;
      hi = std::max(2.0 * y, 1e-12);
      for (int i = 0; i < 2000 && fn(hi) < y; ++i) hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (fn(mid) < y)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  // Expanding core: forward = the map with forward(x) > x, inverse its
  // inverse; gamma > 1. g(x) = gamma^k * seed(forward^{-k}(x)) on
  // [forward^k(1), forward^{k+1}(1)).
  struct Core {
    std::function<double(double)> forward, inverse;
    double gamma;
    double f1;
    double operator()(double x) const {
      if (x < 0.0)
        throw error(errc::domain, "kappa_conjugacy: argument must be nonnegative");
      if (x == 0.0) return 0.0;
      auto seed = [this](double z) { return 1.0 + (z - 1.0) * (gamma - 1.0) / (f1 - 1.0); };
      long k = 0;
      double z = x;
      if (x >= 1.0) {
        double edge = f1;
        while (x >= edge) {
          edge = forward(edge);
          ++k;
          if (k > 4000) throw error(errc::precondition, "kappa_conjugacy: range too wide");
        }
        for (long i = 0; i < k; ++i) z = inverse(z);
      } else {
        double edge = 1.0;
        while (x < edge) {
          edge = inverse(edge);
          --k;
          if (k < -4000) throw error(errc::precondition, "kappa_conjugacy: range too wide");
        }
        for (long i = 0; i < -k; ++i) z = forward(z);
      }
      return std::pow(gamma, static_cast<double>(k)) * seed(std::clamp(z, 1.0, f1));
    }
  };

  Core core;
  if (!contraction) {
    core.forward = f;
    core.inverse = [f, bisect_inverse](double y) { return bisect_inverse(f, y, true); };
    core.gamma = factor;
  } else {
    // Apply the expansion construction to f^{-1} with factor 1/lambda.
    core.forward = [f, bisect_inverse](double y) { return bisect_inverse(f, y, false); };
    core.inverse = f;
    core.gamma = 1.0 / factor;
  }
  core.f1 = core.forward(1.0);
  if (!(core.f1 > 1.0))
    throw error(errc::precondition, "kappa_conjugacy: forward map does not expand at 1");

  if (!contraction) return [core](double x) { return core(x); };
  // Contraction mode: g from the expansion of f^{-1} satisfies
  // g(f^{-1}(y)) = g(y)/lambda, i.e. g(f(x)) = lambda g(x).
  return [core](double x) { return core(x); };
}

OptLyapunovCandidate normalize_rho_decrease(const PsdFunction& W,
                                            std::function<double(double)> rho,
                                            const DynamicalSystem& sys, double lambda,
                                            long samples) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw error(errc::parameter, "normalize_rho_decrease: lambda must be in (0,1)");
  if (std::fabs(rho(0.0)) > 1e-12)
    throw error(errc::precondition, "normalize_rho_decrease: rho(0) must be 0");

  // W must be finite on the sampled points and satisfy the rho-decrease.
  double w_sup = -kInf;
  for (const Vec& x : sample_initial(sys.initial_set, samples))
    w_sup = std::max(w_sup, checked_V(W, x));
  if (!(w_sup > 0.0) || std::isinf(w_sup))
    throw error(errc::range,
                "normalize_rho_decrease: sup of W over the initial set must be finite positive");
  double x_max = std::max(2.0 * w_sup, 2.0);
  {
    double prev = 0.0;
    for (int i = 1; i <= 128; ++i) {
      double x = x_max * i / 128.0;
      double v = rho(x);
      if (!(v > prev))
        throw error(errc::precondition, "normalize_rho_decrease: rho is not strictly increasing");
      if (!(v < x))
        throw error(errc::precondition, "normalize_rho_decrease: rho(x) < x fails on the grid");
      prev = v;
    }
  }
  for (const Vec& x : verification_points(sys, samples)) {
    double wx = checked_V(W, x);
    if (std::isinf(wx)) continue;
    double wtx = checked_V(W, sys.map_T(x));
    if (wtx > rho(wx) + 1e-9 * std::max(1.0, wx))
      throw error(errc::precondition,
                  "normalize_rho_decrease: W(T(x)) <= rho(W(x)) fails at a sample");
  }

  auto g = kappa_conjugacy(rho, lambda, /*contraction=*/true);
  double denom = g(w_sup);
  PsdFunction V;
  auto Weval = W.eval;
  V.eval = [Weval, g, denom](const Vec& x) {
    double w = Weval(x);
    if (std::isinf(w)) return kInf;
    return g(w) / denom;
  };
  V.positivity_witness = W.positivity_witness;
  return verify_opt_lyapunov(V, sys, lambda, samples);
}

UsefulPair hahn_majorant_pair(const DynamicalSystem& sys, const PsdFunction& V,
                              std::function<double(double)> alpha1,
                              std::function<double(double)> psi, long samples,
                              BoundedSequence& seq, long K) {
  if (std::fabs(sys.phi_shift) > 1e-12)
    throw error(errc::parameter,
                "hahn_majorant_pair: phi(0) must be 0; pre-shift the objective");
  if (std::fabs(psi(0.0)) > 1e-12)
    throw error(errc::precondition, "hahn_majorant_pair: psi must vanish at 0");
  for (const Vec& x : verification_points(sys, samples)) {
    double vx = checked_V(V, x);
    if (std::isinf(vx)) continue;
    if (alpha1(x.norm()) > vx + 1e-9 * std::max(1.0, vx))
      throw error(errc::precondition,
                  "hahn_majorant_pair: alpha1(|x|) <= V(x) fails at a sample");
  }
  double v_sup = -kInf;
  for (const Vec& x : sample_initial(sys.initial_set, samples))
    v_sup = std::max(v_sup, checked_V(V, x));

  // Sampled sup of phi over the ball of radius s: directions x radii grid.
  const long d = sys.dim;
  std::vector<Vec> dirs;
  if (d == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
  } else {
    const int n_dir = 64;
    for (int i = 0; i < n_dir; ++i) {
      double ang = 2.0 * M_PI * i / n_dir;
      Vec u = Vec::Zero(d);
      u[0] = std::cos(ang);
      u[1] = std::sin(ang);
      dirs.push_back(u);
    }
  }
  auto phi = sys.objective_phi;
  auto ball_sup = [phi, dirs](double s) {
    double best = 0.0;  // the center is in every ball and phi(0) = 0
    for (const Vec& u : dirs)
      for (int i = 1; i <= 32; ++i) best = std::max(best, phi(u * (s * i / 32.0)));
    return best;
  };

  auto a1_inv = [alpha1](double y) {
    double hi = 1.0;
    for (int i = 0; i < 2000 && alpha1(hi) < y; ++i) hi *= 2.0;
    return invert_increasing(alpha1, 0.0, hi, y);
  };

  MonotoneBijection h;
  h.eval = [ball_sup, psi, a1_inv, v_sup](double x) {
    double s = a1_inv(std::max(0.0, x) * v_sup);
    return ball_sup(s) + psi(s);
  };
  h.h0 = h.eval(0.0);
  h.h1 = h.eval(1.0);
  double beta = operator_ratio(V, sys, 1, samples).ratio;
  if (!(beta > 0.0 && beta < 1.0))
    throw error(errc::range, "hahn_majorant_pair: sampled operator ratio not in (0,1)");
  return verify_pair(seq, std::move(h), beta, K);
}

}  // namespace peaks
