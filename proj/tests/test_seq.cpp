#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "peaks/envelope.hpp"
#include "peaks/gallery.hpp"
#include "peaks/seq.hpp"

using namespace peaks;

namespace {

// Random 20-term head followed by a certified geometric tail; the spike
// forces a unique known greatest maximizer inside the head.
struct RandomSeq {
  BoundedSequence seq;
  long spike = 0;
  double amp = 1.0;
  double rho = 0.5;
  std::vector<double> head;
};

RandomSeq make_random_sequence(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> headv(-5.0, 10.0);
  std::uniform_real_distribution<double> ampv(0.5, 5.0);
  std::uniform_real_distribution<double> rhov(0.3, 0.95);
  RandomSeq r;
  r.head.resize(20);
  for (double& v : r.head) v = headv(rng);
  r.amp = ampv(rng);
  r.rho = rhov(rng);
  r.spike = static_cast<long>(rng() % 20);
  double mx = *std::max_element(r.head.begin(), r.head.end());
  r.head[static_cast<std::size_t>(r.spike)] = std::max(mx, r.amp) + 1.0;
  auto head = r.head;
  double amp = r.amp, rho = r.rho;
  r.seq.eval = [head, amp, rho](long k) {
    if (k < 20) return head[static_cast<std::size_t>(k)];
    return amp * std::pow(rho, static_cast<double>(k));
  };
  // Exact tail bound: max of the remaining head plus the geometric tail.
  r.seq.tail_bound = [head, amp, rho](long k) {
    double best = amp * std::pow(rho, static_cast<double>(std::max(k + 1, 20L)));
    for (long j = k + 1; j < 20; ++j)
      best = std::max(best, head[static_cast<std::size_t>(j)]);
    return best;
  };
  r.seq.label = "random head + geometric tail";
  return r;
}

}  // namespace

TEST_CASE("prefix_argmax on the worked example, p = 30, mu = 1/3") {
  BoundedSequence seq = gallery::nu_sequence({30.0, 1.0 / 3.0});
  ArgmaxReport rep = prefix_argmax(seq, 12);
  CHECK(rep.prefix_max == doctest::Approx(300.0).epsilon(1e-12));
  REQUIRE(rep.prefix_argmax_set.size() == 1);
  CHECK(rep.prefix_argmax_set[0] == 8);
  CHECK(rep.greatest_maximizer == 8);
  CHECK(rep.certified);
}

TEST_CASE("prefix_argmax reports all ties on a constant sequence") {
  BoundedSequence seq{[](long) { return 5.0; }, std::nullopt, "constant"};
  ArgmaxReport rep = prefix_argmax(seq, 4);
  CHECK(rep.prefix_argmax_set == std::vector<long>{0, 1, 2, 3, 4});
  CHECK(!rep.certified);
}

TEST_CASE("prefix_argmax certifies a concave head with a decreasing tail bound") {
  // u_k = -(k-3)^2; direct enumeration gives the unique maximizer 3.
  BoundedSequence seq;
  seq.eval = [](long k) { return -static_cast<double>((k - 3) * (k - 3)); };
  seq.tail_bound = [](long k) {
    long j = std::max(k + 1, 4L);  // decreasing beyond 3
    return -static_cast<double>((j - 3) * (j - 3));
  };
  ArgmaxReport rep = prefix_argmax(seq, 10);
  CHECK(rep.prefix_argmax_set == std::vector<long>{3});
  CHECK(rep.prefix_max == 0.0);
  CHECK(rep.certified);
}

TEST_CASE("prefix_argmax wraps evaluation failures with the index") {
  BoundedSequence seq;
  seq.eval = [](long k) -> double {
    if (k == 3) throw std::runtime_error("backing store went away");
    return static_cast<double>(k);
  };
  try {
    prefix_argmax(seq, 5);
    FAIL("expected evaluation_error");
  } catch (const evaluation_error& e) {
    CHECK(e.index == 3);
  }
}

TEST_CASE("is_in_delta requires the tail certificate") {
  BoundedSequence seq{[](long) { return 0.0; }, std::nullopt, ""};
  CHECK_THROWS_AS(is_in_delta(seq, 0), error);
}

TEST_CASE("is_in_delta on the worked example with the exact tail, p = 3") {
  // nu_2 = 3 is the optimum; the exact tail supremum beyond 2 is 2.95...
  BoundedSequence seq = gallery::nu_sequence({3.0, 1.0 / 3.0});
  CHECK(is_in_delta(seq, 2));
  CHECK(is_in_delta(seq, 2, /*strict=*/true));
}

TEST_CASE("is_in_delta is false on a strictly increasing head") {
  BoundedSequence seq;
  seq.eval = [](long k) { return static_cast<double>(k); };
  seq.tail_bound = [](long k) { return static_cast<double>(k + 1); };
  CHECK(!is_in_delta(seq, 0));
}

TEST_CASE("is_in_delta strict on a geometric sequence with exact tail") {
  BoundedSequence seq;
  seq.eval = [](long k) { return 10.0 * std::pow(0.5, static_cast<double>(k)); };
  seq.tail_bound = [](long k) { return 10.0 * std::pow(0.5, static_cast<double>(k + 1)); };
  CHECK(is_in_delta(seq, 0, /*strict=*/true));
}

TEST_CASE("delta membership is upward closed along the horizon") {
  std::mt19937_64 rng(7001);
  for (int trial = 0; trial < 40; ++trial) {
    RandomSeq r = make_random_sequence(rng);
    bool seen = false;
    for (long k = 0; k <= 40; ++k) {
      bool now = is_in_delta(r.seq, k);
      if (seen) CHECK(now);
      seen = seen || now;
    }
    CHECK(seen);  // the spike certifies membership eventually
  }
}

TEST_CASE("argmax containment: certified maximizers pass is_in_delta") {
  std::mt19937_64 rng(7002);
  for (int trial = 0; trial < 40; ++trial) {
    RandomSeq r = make_random_sequence(rng);
    ArgmaxReport rep = prefix_argmax(r.seq, 40);
    REQUIRE(rep.certified);
    for (long k : rep.prefix_argmax_set) CHECK(is_in_delta(r.seq, k));
  }
}

TEST_CASE("rank inequalities hold on random head + tail sequences") {
  std::mt19937_64 rng(7003);
  for (int trial = 0; trial < 60; ++trial) {
    RandomSeq r = make_random_sequence(rng);
    ArgmaxReport rep = prefix_argmax(r.seq, 60);
    REQUIRE(rep.certified);
    REQUIRE(rep.limsup_estimates);
    REQUIRE(rep.limsup_hit_first.has_value());
    REQUIRE(rep.limsup_exceed_first.has_value());
    long k_hit = *rep.limsup_hit_first;
    long k_exc = *rep.limsup_exceed_first;
    long K_least = rep.prefix_argmax_set.front();
    long K_great = *rep.greatest_maximizer;
    CHECK(k_hit <= k_exc);
    CHECK(k_hit <= K_least);
    CHECK(k_exc <= K_great);
    CHECK(K_least <= K_great);
    CHECK(K_great == r.spike);
  }
}

TEST_CASE("suprema stability: prefix max is flat past the greatest maximizer") {
  std::mt19937_64 rng(7004);
  for (int trial = 0; trial < 30; ++trial) {
    RandomSeq r = make_random_sequence(rng);
    ArgmaxReport rep = prefix_argmax(r.seq, 25);
    long K = *rep.greatest_maximizer;
    double at_K = r.seq.eval(K);
    for (long k = K; k <= 50; ++k) {
      double prefix = -1e300;
      for (long j = 0; j <= k; ++j) prefix = std::max(prefix, r.seq.eval(j));
      CHECK(prefix == at_K);
    }
  }
}
