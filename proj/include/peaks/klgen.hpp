#pragma once

#include <functional>
#include <optional>

#include "peaks/envelope.hpp"
#include "peaks/system.hpp"

namespace peaks {

// A two-argument bound function, increasing in the state surrogate s and
// decreasing in time t. No continuity or sign constraints.
struct KLGenFunction {
  std::function<double(double s, double t)> eval;
  bool monotonicity_checked = false;
};

// Samples monotonicity over a grid of s values and a geometric t grid;
// throws precondition error on a violation, otherwise returns the function
// with the checked flag set.
KLGenFunction make_klgen_checked(std::function<double(double, double)> f,
                                 double s_lo, double s_hi,
                                 double t_max = 1e4);

// A pair (gamma, theta) with phi(T^k(x)) <= gamma(theta(x), k) and theta
// bounded above on the initial set.
struct KLGenUpperBound {
  KLGenFunction gamma;
  std::function<double(const Vec&)> theta;
  double theta_sup = 0.0;
  bool useful_flag = false;
};

// Grid options for infima over t >= 0: t in {0} plus a geometric ladder up
// to t_max (default 1e4).
double inf_over_t(const std::function<double(double)>& f, double t_max = 1e4);

// Strictly decreasing continuous majorant of a decreasing f with inf = m.
// Case m >= f(0): m + 1/(x+1). Otherwise the integer staircase with affine
// bridges plus 1/(x+1), maxed with 1/(x+1) + m. f is evaluated at integers
// only, as the construction prescribes. m = -inf is allowed when inf f is.
std::function<double(double)> majorize_decreasing(std::function<double(double)> f,
                                                  double m,
                                                  double inf_horizon = 1e4);

// Builds h in Omega([0,1]) with gamma(s,t) <= h(e^{-t}) and h(0) = m, by
// composing the decreasing majorant of the time slice with -ln.
MonotoneBijection sontag_extension(const KLGenFunction& gamma, double s, double m);

// Mapping from a KL_gen upper bound to a verified pair (h, e^{-1});
// useful when m is chosen strictly below some nu_k.
UsefulPair pair_from_klgen(const KLGenUpperBound& bound, BoundedSequence& seq,
                           double m, long K);

// Mapping from a verified pair to a KL_gen upper bound:
// gamma(s,t) = min{s, h(beta^t)} and theta(x) = sup_k phi(T^k(x)), the
// orbit supremum certified complete by the pair's tail bound.
KLGenUpperBound klgen_from_pair(const UsefulPair& pair, const DynamicalSystem& sys,
                                long horizon, long samples = 1024);

struct KLGenVerifyReport {
  double worst_margin = 0.0;
  bool violated = false;
  std::optional<long> witness_sample;
  std::optional<long> witness_k;
  bool useful = false;
  double inf_gamma_at_theta_sup = 0.0;
};

// Samples the initial set, iterates orbits to the horizon and reports the
// worst margin gamma(theta(x),k) - phi(T^k(x)) plus the usefulness check.
// A negative margin is a violation report, not an exception.
KLGenVerifyReport verify_klgen_bound(const KLGenUpperBound& bound,
                                     const DynamicalSystem& sys, long horizon,
                                     long samples);

}  // namespace peaks
