#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "peaks/seq.hpp"

namespace peaks {

// A function strictly increasing and continuous on [0,1]. Values h(0) and
// h(1) are cached; the inverse on [h(0),h(1)] uses the closed form when one
// is supplied and bisection otherwise.
struct MonotoneBijection {
  std::function<double(double)> eval;
  std::optional<std::function<double(double)>> inverse_hint;
  double h0 = 0.0;
  double h1 = 1.0;

  static MonotoneBijection from_function(
      std::function<double(double)> f,
      std::optional<std::function<double(double)>> inverse = std::nullopt);
  static MonotoneBijection linear(double a);            // x -> a*x
  static MonotoneBijection affine(double a, double c);  // x -> a*x + c
};

// Sampled strict-monotonicity check on [0,1]; used when the function comes
// from untrusted input.
bool sampled_strictly_increasing(const MonotoneBijection& h, int samples = 257);

// Returns x in [0,1] with h(x) = y. Throws a domain error when y lies
// outside [h(0), h(1)] (up to a small slack).
double inverse_eval(const MonotoneBijection& h, double y);

// A verified element of Gamma(u): u_k <= h(beta^k) checked for k up to
// verified_horizon; the tail argument (when any) is the caller's. The
// witness is the least k with u_k > h(0), when one was seen.
struct UsefulPair {
  MonotoneBijection h;
  double beta = 0.5;
  long verified_horizon = -1;
  std::optional<long> useful_witness;
  bool sup_at_zero = false;  // u_0 = h(1): u_0 is already the supremum
};

// Checks u_k <= h(beta^k) for k = 0..K and installs the geometric tail
// bound tau(k) = h(beta^{k+1}) on the sequence. Throws domination_error at
// the first violated index; parameter error when beta is outside (0,1).
UsefulPair verify_pair(BoundedSequence& seq, MonotoneBijection h, double beta,
                       long K, double tol = 1e-9);

// Least beta whose pair with h is verified on the prefix: the supremum over
// k in S(u,h), k >= 1, of exp(ln(h^{-1}(u_k))/k); 0 when that set is empty.
double beta_infimum(const BoundedSequence& seq, const MonotoneBijection& h,
                    long K);

enum class CombineMode { take_min, take_max, convex };

// Pointwise min / max / convex combination; the lattice and convexity
// structure keeps the result strictly increasing and continuous.
MonotoneBijection combine(const MonotoneBijection& h1,
                          const MonotoneBijection& h2, CombineMode mode,
                          std::optional<double> t = std::nullopt);

// ln(h^{-1}(u_k)) / ln(beta), +inf when k is not in S(u,h). The floor
// bounds the greatest maximizer of u; floor+1 is the least j with
// h(beta^j) < u_k.
struct StoppingReport {
  double F_value = 0.0;  // +inf when k is outside S(u,h)
  std::optional<long> floor_F;
  std::optional<long> minimal_drop_index;
  long input_k = 0;
};

StoppingReport formula_F(const BoundedSequence& seq, long k,
                         const UsefulPair& pair);

struct StopResult {
  long K_bound = 0;        // final stopping index reached
  double max_value = 0.0;  // sup of the sequence
  std::vector<long> argmax;
  std::vector<double> prefix;  // u_0..u_{K_bound}, as evaluated
};

// Adaptive enumeration: the stopping index is re-evaluated only at new
// record terms and the scan ends at the current stopping index. Every
// enumerated term is re-checked against its envelope value; a violation
// means the certificate was wrong and raises domination_error.
StopResult solve_stop(const BoundedSequence& seq, const UsefulPair& pair,
                      long witness_cap = 100000);

// Greatest maximizer of the sequence, via the stopping-index enumeration.
long greatest_maximizer(const BoundedSequence& seq, const UsefulPair& pair);

// The optimal affine envelope a*b^k + c through the greatest maximizer:
// gamma = max_{K_s < k <= N_c} (u_{K_s} - u_k)/(K_s - k) < 0,
// b = exp(gamma/(u_{K_s} - c)), a = (u_{K_s} - c) exp(-K_s gamma/(u_{K_s} - c)).
// Requires u_{K_s} = max(prefix), u_k <= c for k >= N_c and c < u_{K_s}.
std::pair<double, double> optimal_affine(std::span<const double> prefix,
                                         long K_s, long N_c, double c);

}  // namespace peaks
