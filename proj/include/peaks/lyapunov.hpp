#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>

#include "peaks/envelope.hpp"
#include "peaks/system.hpp"

namespace peaks {

// A proper positive-semidefinite function: nonnegative, +inf allowed, with
// at least one point where it is finite and strictly positive. +inf is the
// plain double infinity; lambda * inf = inf and comparisons stay total.
struct PsdFunction {
  std::function<double(const Vec&)> eval;
  std::optional<Vec> positivity_witness;
};

// A decrement certificate for the peaks problem: V >= 0 (infinity allowed),
// sup of V over the initial set in (0,1], V(T(x)) <= lambda V(x).
struct OptLyapunovCandidate {
  PsdFunction V;
  double lambda = 0.5;
  double V_sup = 0.0;   // estimated over initial-set samples
  double ratio = 0.0;   // sampled operator ratio, <= lambda
};

// A strictly increasing continuous alpha with alpha(I) = [0,1] linking the
// objective to a Lyapunov-type function along orbits.
struct CompatibilityCertificate {
  std::function<double(double)> alpha;
  std::optional<std::function<double(double)>> alpha_inverse;
  double I_lo = 0.0;
  double I_hi = 1.0;
  double domain_lo = 0.0;  // checked domain; verification widens it with
  double domain_hi = 1.0;  // the sampled value interval of nu.
};

// Samples the ambient space and the initial set; checks nonnegativity, the
// decrement on points with finite V, fixed-point consistency at approximate
// fixed points (|T(x)-x| <= 1e-8), and estimates V_sup. Throws a violation
// (domination) error with a witness, or a range error when V_sup leaves
// (0,1].
OptLyapunovCandidate verify_opt_lyapunov(const PsdFunction& V,
                                         const DynamicalSystem& sys,
                                         double lambda, long samples);

struct OperatorRatioReport {
  double ratio = 0.0;           // sampled sup of P(T^k(x))/P(x)
  bool n_condition_held = true; // P(T(x)) = 0 => P(T^2(x)) = 0 on samples
  long support_samples = 0;     // points with P(x) in (0, inf)
};

// Sampled operator ratio over ambient, initial-set and orbit points with
// P(x) finite positive; degenerate-input error when no such point is seen.
OperatorRatioReport operator_ratio(const PsdFunction& P, const DynamicalSystem& sys,
                                   long k, long samples);

struct CertificateReport {
  bool ok = false;
  bool monotone = false;
  bool alpha_positive_somewhere = false;
  double worst_margin = 0.0;  // min over samples of g(T^k(x)) - alpha(phi(T^k(x)))
  std::optional<long> witness_sample;
  std::optional<long> witness_k;
};

// Checks alpha strictly increasing and continuous on the checked domain
// (sampled), alpha(nu_k) > 0 for some enumerated k, and the pointwise
// inequality alpha(phi(T^k(x))) <= g(T^k(x)) along sampled orbits.
// Violations come back in the report, not as exceptions.
CertificateReport verify_certificate(const CompatibilityCertificate& cert,
                                     const PsdFunction& g, const DynamicalSystem& sys,
                                     long horizon, long samples);

// alpha(s) = s - nu_opt + min{eta, eps}, with alpha(I) = [0,1] for
// I = [nu_opt - min, nu_opt - min + 1].
CompatibilityCertificate certificate_from_margins(double nu_opt, double epsilon,
                                                  double eta);

struct LyapunovPairOutcome {
  std::optional<UsefulPair> pair;
  bool immediate_optimum = false;  // ratio = 0: K^s = 0 and nu_opt = nu_0
};

// Direct route: h(x) = alpha^{-1}(x * V_sup) paired with beta = ratio.
// ratio = 0 short-circuits to the immediate-optimum outcome.
LyapunovPairOutcome pair_from_lyapunov(const OptLyapunovCandidate& cand,
                                       const CompatibilityCertificate& cert,
                                       BoundedSequence& seq, long K);

struct YoshizawaResult {
  PsdFunction V;
  CompatibilityCertificate h_hat;
  long k_max = 0;
  // Set whenever some evaluation's running supremum had terms still alive
  // near the truncation index; never silent.
  std::shared_ptr<std::atomic<bool>> truncation_seen;
};

// Converse route: V(x) = sup_{k <= k_max} beta^{-k} h^{-1}(omega(phi(T^k(x))))
// with omega clamping into [h(0), h(1)], plus the piecewise certificate
// s - h(0) below h(0) and h^{-1}(s) on (h(0), h(1)].
YoshizawaResult yoshizawa_construct(const UsefulPair& pair, const DynamicalSystem& sys,
                                    long k_max = 1000);

// Conjugacy construction: g strictly increasing continuous with g(0) = 0 and
// g(f(x)) = factor * g(x). Expansion mode needs factor > 1 and f(x) > x;
// contraction mode needs factor in (0,1), f(x) < x and f invertible (the
// construction is applied to f^{-1}).
std::function<double(double)> kappa_conjugacy(std::function<double(double)> f,
                                              double factor, bool contraction);

// Normalizes a rho-decrease W(T(x)) <= rho(W(x)) into a geometric decrement
// via g = kappa_conjugacy(rho, lambda, contraction): returns the verified
// candidate (g o W) / sup(g o W).
OptLyapunovCandidate normalize_rho_decrease(const PsdFunction& W,
                                            std::function<double(double)> rho,
                                            const DynamicalSystem& sys, double lambda,
                                            long samples = 512);

// Classical route: alpha(s) = (sampled sup of phi over the ball of radius s)
// + psi(s), h(x) = alpha(alpha1^{-1}(x * V_sup)), beta = sampled operator
// ratio. Requires phi(0) = 0 (phi_shift zero) and alpha1(|x|) <= V(x).
UsefulPair hahn_majorant_pair(const DynamicalSystem& sys, const PsdFunction& V,
                              std::function<double(double)> alpha1,
                              std::function<double(double)> psi, long samples,
                              BoundedSequence& seq, long K);

}  // namespace peaks
