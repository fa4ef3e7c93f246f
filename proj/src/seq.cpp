#include "peaks/seq.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace peaks {
namespace {

double eval_checked(const BoundedSequence& seq, long k) {
  double v;
  try {
    v = seq.eval(k);
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "sequence evaluation failed at k = %ld: %s", k, e.what());
    throw evaluation_error(buf, k);
  }
  if (std::isnan(v)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "sequence evaluation produced NaN at k = %ld", k);
    throw evaluation_error(buf, k);
  }
  return v;
}

}  // namespace

ArgmaxReport prefix_argmax(const BoundedSequence& seq, long K, double tie_tol) {
  if (K < 0) throw error(errc::parameter, "prefix_argmax: K must be >= 0");
  ArgmaxReport rep;
  rep.horizon = K;
  std::vector<double> u(static_cast<std::size_t>(K) + 1);
  double best = -std::numeric_limits<double>::infinity();
  for (long k = 0; k <= K; ++k) {
    u[static_cast<std::size_t>(k)] = eval_checked(seq, k);
    best = std::max(best, u[static_cast<std::size_t>(k)]);
  }
  rep.prefix_max = best;
  for (long k = 0; k <= K; ++k)
    if (u[static_cast<std::size_t>(k)] >= best - tie_tol) rep.prefix_argmax_set.push_back(k);
  if (!rep.prefix_argmax_set.empty()) rep.greatest_maximizer = rep.prefix_argmax_set.back();

  if (seq.tail_bound) {
    const auto& tau = *seq.tail_bound;
    rep.certified = tau(K) < best;
    // Best available upper estimate of limsup u: the smallest tail bound seen.
    double limsup_est = std::numeric_limits<double>::infinity();
    for (long k = 0; k <= K; ++k) limsup_est = std::min(limsup_est, tau(k));
    rep.limsup_estimates = true;
    for (long k = 0; k <= K; ++k) {
      double v = u[static_cast<std::size_t>(k)];
      if (!rep.limsup_hit_first && v >= limsup_est - tie_tol) rep.limsup_hit_first = k;
      if (!rep.limsup_exceed_first && v > limsup_est + tie_tol) rep.limsup_exceed_first = k;
    }
  }
  return rep;
}

bool is_in_delta(const BoundedSequence& seq, long k, bool strict) {
  if (k < 0) throw error(errc::parameter, "is_in_delta: k must be >= 0");
  if (!seq.tail_bound)
    throw error(errc::certificate_required,
                "is_in_delta needs a certified tail bound on the sequence");
  double best = -std::numeric_limits<double>::infinity();
  for (long j = 0; j <= k; ++j) best = std::max(best, eval_checked(seq, j));
  double tau = (*seq.tail_bound)(k);
  return strict ? best > tau : best >= tau;
}

}  // namespace peaks
