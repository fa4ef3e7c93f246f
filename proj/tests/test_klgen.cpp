#include <cmath>
#include <random>

#include "doctest.h"
#include "peaks/gallery.hpp"
#include "peaks/klgen.hpp"

using namespace peaks;

TEST_CASE("majorize_decreasing: constant branch") {
  auto g = majorize_decreasing([](double) { return 3.0; }, 3.0);
  for (double x : {0.0, 1.0, 10.0, 500.0})
    CHECK(g(x) == doctest::Approx(3.0 + 1.0 / (x + 1.0)).epsilon(1e-15));
}

TEST_CASE("majorize_decreasing dominates a floor-step function") {
  auto f = [](double x) { return std::floor(5.0 - x); };
  double m = f(1e4);
  auto g = majorize_decreasing(f, m);
  double prev = 1e300;
  for (int i = 0; i <= 4000; ++i) {
    double x = 20.0 * i / 4000.0;
    double gx = g(x);
    CHECK(gx >= f(x));
    CHECK(gx < prev);  // strictly decreasing on the dense grid
    prev = gx;
  }
}

TEST_CASE("majorize_decreasing pins the infimum above the function's") {
  // f = e^{-x} has infimum 0; m = 0.5 forces the tail onto 1/(x+1) + m.
  auto f = [](double x) { return std::exp(-x); };
  auto g = majorize_decreasing(f, 0.5);
  CHECK(g(50.0) == doctest::Approx(0.5 + 1.0 / 51.0).epsilon(1e-12));
  CHECK(std::fabs(g(1e7) - 0.5) <= 1e-6);
  for (int i = 0; i <= 400; ++i) {
    double x = 40.0 * i / 400.0;
    CHECK(g(x) >= f(x));
  }
}

TEST_CASE("majorize_decreasing rejects a rising function") {
  CHECK_THROWS_AS(majorize_decreasing([](double x) { return x; }, 0.0), error);
}

TEST_CASE("sontag_extension dominates the slice with the prescribed intercept") {
  KLGenFunction gamma;
  gamma.eval = [](double s, double t) { return s * std::pow(2.0, -t); };
  MonotoneBijection h = sontag_extension(gamma, 4.0, 0.0);
  CHECK(h.h0 == 0.0);
  CHECK(h.eval(0.0) == 0.0);
  for (int i = 0; i <= 500; ++i) {
    double t = 50.0 * i / 500.0;
    CHECK(gamma.eval(4.0, t) <= h.eval(std::exp(-t)) + 1e-12);
  }
}

TEST_CASE("sontag_extension of a constant slice") {
  KLGenFunction gamma;
  gamma.eval = [](double s, double) { return s; };
  MonotoneBijection h = sontag_extension(gamma, 2.0, 2.0);  // m = inf = 2
  CHECK(h.h0 == 2.0);
  for (double t : {0.0, 1.0, 7.0, 30.0})
    CHECK(gamma.eval(2.0, t) <= h.eval(std::exp(-t)) + 1e-12);
  CHECK(sampled_strictly_increasing(h));
  // a flattened slice pins the admissible range of m
  CHECK_THROWS_AS(sontag_extension(gamma, 2.0, 1.0), error);
}

TEST_CASE("sontag_extension of a hyperbolic-min slice") {
  KLGenFunction gamma;
  gamma.eval = [](double s, double t) { return std::min(s, 10.0 / (t + 1.0)); };
  MonotoneBijection h = sontag_extension(gamma, 3.0, 0.0);
  CHECK(h.h0 == 0.0);
  for (int i = 0; i <= 500; ++i) {
    double t = 50.0 * i / 500.0;
    CHECK(gamma.eval(3.0, t) <= h.eval(std::exp(-t)) + 1e-12);
  }
}

TEST_CASE("pair_from_klgen on the worked example bound, p = 9, mu = 1/10") {
  gallery::ExampleParams params{9.0, 1.0 / 10.0};
  auto cf = gallery::closed_forms(params);
  double n0 = static_cast<double>(cf.n_zero);
  KLGenUpperBound bound;
  bound.gamma.eval = [n0, &params](double s, double t) {
    return std::min(s, params.p * params.p * (n0 + 1.0) / (3.0 * (t + 1.0)));
  };
  bound.theta = [&params](const Vec&) { return params.p * params.p / 3.0; };
  bound.theta_sup = params.p * params.p / 3.0;
  // domination sanity against the closed form
  for (long k = 0; k <= 40; ++k)
    CHECK(cf.nu(k) <= bound.gamma.eval(bound.theta_sup, static_cast<double>(k)) + 1e-12);

  BoundedSequence seq = gallery::nu_sequence(params);
  UsefulPair pair = pair_from_klgen(bound, seq, 1.0, 40);
  CHECK(pair.beta == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(pair.h.h0 == 1.0);
  CHECK(pair.useful_witness.has_value());
  StopResult stop = solve_stop(seq, pair);
  CHECK(stop.max_value == doctest::Approx(27.0).epsilon(1e-12));
  CHECK(stop.argmax.back() == 8);
}

TEST_CASE("pair_from_klgen with a constant-in-t bound verifies but is useless") {
  BoundedSequence seq;
  seq.eval = [](long k) { return 5.0 * std::pow(0.5, static_cast<double>(k)); };
  KLGenUpperBound bound;
  bound.gamma.eval = [](double s, double) { return s; };
  bound.theta_sup = 5.0;  // = sup nu
  UsefulPair pair = pair_from_klgen(bound, seq, 5.0, 30);
  CHECK(!pair.useful_witness.has_value());
}

TEST_CASE("klgen_from_pair: worked example theta_sup is the optimum") {
  gallery::ExampleParams params{30.0, 1.0 / 3.0};
  DynamicalSystem sys = gallery::make_system(params);
  BoundedSequence seq = gallery::nu_sequence(params);
  UsefulPair pair = gallery::pair_a(params, seq);
  KLGenUpperBound bound = klgen_from_pair(pair, sys, 100);
  CHECK(bound.theta_sup == doctest::Approx(300.0).epsilon(1e-9));
  CHECK(bound.useful_flag);
  KLGenVerifyReport rep = verify_klgen_bound(bound, sys, 50, 512);
  CHECK(!rep.violated);
  CHECK(rep.worst_margin >= -1e-12);
  CHECK(rep.useful);
}

TEST_CASE("klgen_from_pair needs a horizon long enough to certify theta") {
  gallery::ExampleParams params{30.0, 1.0 / 3.0};
  DynamicalSystem sys = gallery::make_system(params);
  BoundedSequence seq = gallery::nu_sequence(params);
  UsefulPair pair = gallery::pair_a(params, seq);
  CHECK_THROWS_AS(klgen_from_pair(pair, sys, 5), error);
}

TEST_CASE("klgen_from_pair on the zero objective is trivially dominated") {
  DynamicalSystem sys;
  sys.dim = 1;
  sys.initial_set = InitialSet::segment(Vec::Constant(1, 0.0), Vec::Constant(1, 1.0));
  sys.map_T = [](const Vec& x) -> Vec { return 0.5 * x; };
  sys.objective_phi = [](const Vec&) { return 0.0; };
  BoundedSequence seq{[](long) { return 0.0; }, std::nullopt, "zero"};
  UsefulPair pair = verify_pair(seq, MonotoneBijection::linear(1.0), 0.5, 20);
  KLGenUpperBound bound = klgen_from_pair(pair, sys, 50);
  CHECK(bound.theta_sup == 0.0);
  KLGenVerifyReport rep = verify_klgen_bound(bound, sys, 30, 64);
  CHECK(!rep.violated);
}

TEST_CASE("roundtrip pair -> klgen -> pair keeps the stopping index within one") {
  gallery::ExampleParams params{9.0, 1.0 / 3.0};
  DynamicalSystem sys = gallery::make_system(params);
  BoundedSequence seq1 = gallery::nu_sequence(params);
  UsefulPair pair = gallery::pair_b(params, seq1);
  StopResult direct = solve_stop(seq1, pair);

  KLGenUpperBound bound = klgen_from_pair(pair, sys, 200);
  BoundedSequence seq2 = gallery::nu_sequence(params);
  double m = pair.h.h0 + 1e-6;
  UsefulPair back = pair_from_klgen(bound, seq2, m, 60);
  CHECK(back.useful_witness.has_value());
  StopResult round = solve_stop(seq2, back);
  CHECK(round.max_value == doctest::Approx(direct.max_value).epsilon(1e-12));
  CHECK(round.argmax.back() == direct.argmax.back());
}

TEST_CASE("verify_klgen_bound flags a shrunk bound at the touching index") {
  gallery::ExampleParams params{9.0, 1.0 / 3.0};
  DynamicalSystem sys = gallery::make_system(params);
  BoundedSequence seq = gallery::nu_sequence(params);
  UsefulPair pair = gallery::pair_b(params, seq);
  KLGenUpperBound bound = klgen_from_pair(pair, sys, 200);
  KLGenUpperBound shrunk = bound;
  auto base = bound.gamma.eval;
  shrunk.gamma.eval = [base](double s, double t) { return 0.99 * base(s, t); };
  KLGenVerifyReport rep = verify_klgen_bound(shrunk, sys, 50, 256);
  CHECK(rep.violated);
  CHECK(rep.worst_margin < 0.0);
}

TEST_CASE("zero objective with zero bound has all-zero margins") {
  DynamicalSystem sys;
  sys.dim = 1;
  sys.initial_set = InitialSet::segment(Vec::Constant(1, 0.0), Vec::Constant(1, 1.0));
  sys.map_T = [](const Vec& x) -> Vec { return 0.5 * x; };
  sys.objective_phi = [](const Vec&) { return 0.0; };
  KLGenUpperBound bound;
  bound.gamma.eval = [](double, double) { return 0.0; };
  bound.theta = [](const Vec&) { return 0.0; };
  bound.theta_sup = 0.0;
  KLGenVerifyReport rep = verify_klgen_bound(bound, sys, 20, 64);
  CHECK(rep.worst_margin == 0.0);
  CHECK(!rep.violated);
}

TEST_CASE("classical route: a true KL bound gives a pair with zero intercept") {
  // T(x) = x/2, phi = x on [1,2]; gamma(s,t) = s 2^{-t}, psi = |x|.
  DynamicalSystem sys;
  sys.dim = 1;
  sys.initial_set = InitialSet::segment(Vec::Constant(1, 1.0), Vec::Constant(1, 2.0));
  sys.map_T = [](const Vec& x) -> Vec { return 0.5 * x; };
  sys.objective_phi = [](const Vec& x) { return x[0]; };
  KLGenUpperBound bound;
  bound.gamma = make_klgen_checked(
      [](double s, double t) { return s * std::pow(2.0, -t); }, 0.0, 4.0);
  bound.theta = [](const Vec& x) { return std::fabs(x[0]); };
  bound.theta_sup = 2.0;
  KLGenVerifyReport rep = verify_klgen_bound(bound, sys, 40, 64);
  CHECK(!rep.violated);

  NuOracle oracle(sys, 128, 2);
  BoundedSequence seq = oracle.sequence();
  UsefulPair pair = pair_from_klgen(bound, seq, 0.0, 40);
  CHECK(pair.h.h0 == 0.0);
  CHECK(pair.useful_witness.has_value());  // some nu_k > 0
}

TEST_CASE("monotonicity check rejects a transposed bound") {
  CHECK_THROWS_AS(
      make_klgen_checked([](double s, double t) { return t - s; }, -1.0, 1.0),
      error);
}
