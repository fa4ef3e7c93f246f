#include "peaks/gallery.hpp"

#include <cmath>

namespace peaks::gallery {
namespace {

double pow15(long n) { return std::pow(1.5, static_cast<double>(n)); }

}  // namespace

void validate(const ExampleParams& params) {
  if (!(params.p >= 1.5))
    throw error(errc::parameter, "example family needs p >= 3/2");
  if (!(params.mu > 0.0 && params.mu <= 1.0 / 3.0 + 1e-15))
    throw error(errc::parameter, "example family needs mu in (0, 1/3]");
}

double ClosedForms::phi_n(double y, long n) const {
  double t = pow15(n);
  return -3.0 * t * t * y * y + 2.0 * p * t * y;
}

ClosedForms closed_forms(const ExampleParams& params) {
  validate(params);
  const double p = params.p, mu = params.mu;
  ClosedForms cf;
  cf.p = p;
  cf.mu = mu;

  // y*_n = (2/3)^n p/3 decreases strictly; the formula indices are
  // floor-based and scan-corrected to be safe at representability edges.
  auto first_below = [p](double threshold) {
    long n = static_cast<long>(
        std::floor(std::log(3.0 * threshold / p) / std::log(2.0 / 3.0))) + 1;
    n = std::max(n, 0L);
    auto y_star = [p](long m) { return std::pow(2.0 / 3.0, static_cast<double>(m)) * p / 3.0; };
    while (y_star(n) >= threshold) ++n;
    while (n > 0 && y_star(n - 1) < threshold) --n;
    return n;
  };
  cf.n_lower = first_below(0.5);
  cf.n_upper = first_below(mu);
  cf.nu_opt = p * p / 3.0;
  cf.K_least = cf.n_lower;
  cf.K_greatest = cf.n_upper - 1;

  // First index past the plateau with a negative term.
  {
    long n = static_cast<long>(
        std::floor(std::log(2.0 * p / (3.0 * mu)) / std::log(1.5))) + 1;
    n = std::max(n, cf.n_upper);
    while (cf.phi_n(mu, n) >= 0.0) ++n;
    while (n > cf.n_upper && cf.phi_n(mu, n - 1) < 0.0) --n;
    cf.n_zero = n;
  }
  cf.n_zero_table = static_cast<long>(
      std::floor(std::log(2.0 * p / (3.0 * mu)) / std::log(1.5)));

  cf.n_star = [p](double y) {
    if (!(y > 0.0)) throw error(errc::parameter, "n_star needs y > 0");
    long n = static_cast<long>(
        std::floor(std::log(4.0 * p / (15.0 * y)) / std::log(1.5))) + 1;
    return std::max(n, 0L);
  };

  const long n_low = cf.n_lower, n_up = cf.n_upper;
  cf.nu = [cf2 = ClosedForms(cf), n_low, n_up, p](long n) {
    if (n < 0) throw error(errc::parameter, "nu is indexed by naturals");
    if (n < n_low) return cf2.phi_n(0.5, n);
    if (n < n_up) return p * p / 3.0;
    return cf2.phi_n(cf2.mu, n);
  };
  return cf;
}

BoundedSequence nu_sequence(const ExampleParams& params) {
  ClosedForms cf = closed_forms(params);
  BoundedSequence seq;
  seq.label = "example nu";
  seq.eval = cf.nu;
  // Exact tail supremum: beyond max(n_upper, n*_mu) the terms strictly
  // decrease, so the supremum over j > k is a finite maximum.
  long settle = std::max(cf.n_upper, cf.n_star(params.mu));
  auto nu = cf.nu;
  seq.tail_bound = [nu, settle](long k) {
    long last = std::max(k + 1, settle);
    double best = nu(k + 1);
    for (long j = k + 1; j <= last; ++j) best = std::max(best, nu(j));
    return best;
  };
  return seq;
}

DynamicalSystem make_system(const ExampleParams& params) {
  validate(params);
  Mat A(2, 2);
  A << 1.0, 1.0, 0.25, 1.0;
  Vec lo(2), hi(2), dir(2);
  lo << 2.0 * params.mu, params.mu;
  hi << 1.0, 1.0;
  dir << 2.0, 1.0;
  const double p = params.p;
  DynamicalSystem sys = make_linear_system(
      A, InitialSet::box_intersect_line(lo, hi, dir),
      [p](const Vec& x) { return x[1] * x[1] - x[0] * x[0] + p * x[0]; },
      "example");
  return sys;
}

namespace {

UsefulPair table_pair(const ExampleParams& params, BoundedSequence& seq, double a,
                      double base) {
  ClosedForms cf = closed_forms(params);
  double beta = std::pow(base, 1.0 / static_cast<double>(cf.n_zero_table));
  long K = std::max(cf.n_zero, cf.n_upper) + 8;
  return verify_pair(seq, MonotoneBijection::linear(a), beta, K);
}

}  // namespace

UsefulPair pair_a(const ExampleParams& params, BoundedSequence& seq) {
  return table_pair(params, seq, params.p * params.p, 2.0 / 3.0);
}

UsefulPair pair_b(const ExampleParams& params, BoundedSequence& seq) {
  return table_pair(params, seq, 2.0 * params.p * params.p / 3.0, 0.5);
}

PsdFunction lyapunov_function(const ExampleParams& params) {
  validate(params);
  const double mu = params.mu;
  PsdFunction V;
  V.eval = [mu](const Vec& x) {
    if (std::fabs(x[0] - 2.0 * x[1]) > 1e-12) return 0.0;  // off the line
    if (x[0] == 0.0 && x[1] == 0.0) return 0.0;
    return 2.0 * mu * mu / (x[0] * x[1]);
  };
  Vec w(2);
  w << 2.0 * mu, mu;
  V.positivity_witness = w;
  return V;
}

OptLyapunovCandidate lyapunov_candidate(const ExampleParams& params,
                                        const DynamicalSystem& sys, long samples) {
  return verify_opt_lyapunov(lyapunov_function(params), sys, 5.0 / 9.0, samples);
}

double epsilon_margin(const ExampleParams& params) {
  ClosedForms cf = closed_forms(params);
  return 8.0 * params.mu * params.mu *
         std::pow(2.0 / 3.0, static_cast<double>(2 * cf.n_upper - 1));
}

double zeta_margin(const ExampleParams& params) {
  ClosedForms cf = closed_forms(params);
  double off_peak = std::max(cf.phi_n(0.5, cf.n_star(0.5)), cf.phi_n(params.mu, cf.n_upper));
  return cf.nu_opt - off_peak;
}

double zeta1(const ExampleParams& params) { return zeta_margin(params) / 2.0; }
double zeta2(const ExampleParams& params) { return zeta_margin(params) / 1000.0; }

CompatibilityCertificate compatibility_certificate(const ExampleParams& params,
                                                   std::optional<double> zeta) {
  ClosedForms cf = closed_forms(params);
  double margin = zeta_margin(params);
  double z = zeta.value_or(margin / 2.0);
  if (!(z > 0.0 && z < margin))
    throw error(errc::parameter,
                "compatibility certificate: zeta must lie in (0, p^2/3 - max off-peak term)");
  double m = std::min(z, epsilon_margin(params));
  CompatibilityCertificate cert = certificate_from_margins(cf.nu_opt, m, m);
  // Widen the checked domain to the value range the example visits.
  cert.domain_lo = -10.0 * std::max(1.0, cf.nu_opt);
  cert.domain_hi = cert.I_hi;
  return cert;
}

UsefulPair h_zeta_pair(const ExampleParams& params, double zeta, BoundedSequence& seq) {
  ClosedForms cf = closed_forms(params);
  double margin = zeta_margin(params);
  if (!(zeta > 0.0 && zeta < margin))
    throw error(errc::parameter, "h_zeta_pair: zeta out of range");
  double c = cf.nu_opt - std::min(zeta, epsilon_margin(params));
  long K = std::max(cf.n_zero, cf.n_upper) + 8;
  return verify_pair(seq, MonotoneBijection::affine(1.0, c), 4.0 / 9.0, K);
}

Artifact canonical_artifact(const ExampleParams& params, Choice choice,
                            std::optional<double> zeta) {
  switch (choice) {
    case Choice::pair_a: {
      BoundedSequence seq = nu_sequence(params);
      return pair_a(params, seq);
    }
    case Choice::pair_b: {
      BoundedSequence seq = nu_sequence(params);
      return pair_b(params, seq);
    }
    case Choice::lyapunov:
      return lyapunov_candidate(params, make_system(params), 512);
    case Choice::certificate:
      return compatibility_certificate(params, zeta);
    case Choice::h_zeta: {
      if (!zeta) throw error(errc::parameter, "h_zeta needs zeta");
      BoundedSequence seq = nu_sequence(params);
      return h_zeta_pair(params, *zeta, seq);
    }
  }
  throw error(errc::parameter, "unknown artifact choice");
}

}  // namespace peaks::gallery
