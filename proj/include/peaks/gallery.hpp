#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "peaks/envelope.hpp"
#include "peaks/lyapunov.hpp"
#include "peaks/system.hpp"

namespace peaks::gallery {

// The planar family: T = [[1,1],[1/4,1]], initial segment
// ([2mu,1]x[mu,1]) on the line through (2,1), objective y^2 - x^2 + p x.
// The map expands along (2,1) with factor 3/2 and contracts along (2,-1)
// with factor 1/2, so the per-step optima admit closed forms.
struct ExampleParams {
  double p = 30.0;
  double mu = 1.0 / 3.0;
};

void validate(const ExampleParams& params);  // p >= 3/2, mu in (0, 1/3]

struct ClosedForms {
  std::function<double(long)> nu;
  long n_lower = 0;        // first n with the unconstrained maximizer below 1/2
  long n_upper = 0;        // first n with the unconstrained maximizer below mu
  long n_zero = 0;         // first n with nu_n < 0 beyond the plateau
  long n_zero_table = 0;   // the convention the printed tables follow (no +1)
  std::function<long(double)> n_star;  // argmax of n -> phi_n(y) for fixed y
  double nu_opt = 0.0;     // p^2/3
  long K_least = 0;        // least maximizer (= n_lower)
  long K_greatest = 0;     // greatest maximizer (= n_upper - 1)
  double phi_n(double y, long n) const;  // -3 (3/2)^{2n} y^2 + 2 p (3/2)^n y
  double p = 0.0, mu = 0.0;
};

ClosedForms closed_forms(const ExampleParams& params);

// Closed-form nu with its exact tail supremum installed as the certificate.
BoundedSequence nu_sequence(const ExampleParams& params);

DynamicalSystem make_system(const ExampleParams& params);

// The two linear envelope pairs of the worked construction, with the
// table-convention decay horizon: a = p^2 with beta = (2/3)^{1/n0} and
// a = 2p^2/3 with beta = (1/2)^{1/n0}. Both are verified against seq.
UsefulPair pair_a(const ExampleParams& params, BoundedSequence& seq);
UsefulPair pair_b(const ExampleParams& params, BoundedSequence& seq);

// V = 2 mu^2/(x1 x2) on the invariant line (0 elsewhere), lambda = 5/9.
PsdFunction lyapunov_function(const ExampleParams& params);
OptLyapunovCandidate lyapunov_candidate(const ExampleParams& params,
                                        const DynamicalSystem& sys, long samples);

// eps = 8 mu^2 (2/3)^{2 n_upper - 1}; zeta must lie in (0, M) where
// M = p^2/3 - max{phi_{n*_{1/2}}(1/2), phi_{n_upper}(mu)}.
double epsilon_margin(const ExampleParams& params);
double zeta_margin(const ExampleParams& params);  // M above
double zeta1(const ExampleParams& params);        // M/2
double zeta2(const ExampleParams& params);        // M/1000

// alpha(s) = s - p^2/3 + min{zeta, eps}; default zeta = zeta1.
CompatibilityCertificate compatibility_certificate(
    const ExampleParams& params, std::optional<double> zeta = std::nullopt);

// The affine pair h(s) = s + p^2/3 - min{zeta, eps} with beta = 4/9.
UsefulPair h_zeta_pair(const ExampleParams& params, double zeta,
                       BoundedSequence& seq);

enum class Choice { pair_a, pair_b, lyapunov, certificate, h_zeta };

using Artifact = std::variant<UsefulPair, OptLyapunovCandidate, CompatibilityCertificate>;

// Dispatcher over the named constructions; zeta is required for h_zeta.
Artifact canonical_artifact(const ExampleParams& params, Choice choice,
                            std::optional<double> zeta = std::nullopt);

}  // namespace peaks::gallery
