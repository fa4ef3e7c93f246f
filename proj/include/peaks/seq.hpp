#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "peaks/errors.hpp"

namespace peaks {

// A real sequence bounded from above, given by an evaluator k -> u_k.
// Infinite suprema are replaced by an optional certified tail bound:
// tail_bound(k) must be >= sup_{j>k} u_j whenever it is present. Analyses
// that would need the true tail are reported as uncertified without it.
struct BoundedSequence {
  std::function<double(long)> eval;
  std::optional<std::function<double(long)>> tail_bound;
  std::string label;
};

struct ArgmaxReport {
  long horizon = 0;
  double prefix_max = 0.0;
  std::vector<long> prefix_argmax_set;
  std::optional<long> greatest_maximizer;  // max of the prefix argmax set
  bool certified = false;                  // tail bound ruled out later terms
  // limsup-based rank diagnostics, estimated from the tail bound; they never
  // gate the stopping-index route.
  std::optional<long> limsup_hit_first;     // first k with u_k >= limsup est
  std::optional<long> limsup_exceed_first;  // first k with u_k >  limsup est
  bool limsup_estimates = false;
};

// Scans u_0..u_K, reporting the prefix maximum and every maximizer within
// the default absolute tie tolerance. The report is certified when a tail
// bound is present and tail_bound(K) < prefix max.
ArgmaxReport prefix_argmax(const BoundedSequence& seq, long K,
                           double tie_tol = 1e-12);

// True iff the prefix maximum over [0,k] is >= tail_bound(k) (strict: >).
// Requires a tail bound; a true answer is sound, a false answer only means
// "not certifiable with this tail bound".
bool is_in_delta(const BoundedSequence& seq, long k, bool strict = false);

}  // namespace peaks
