#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peaks/envelope.hpp"
#include "peaks/klgen.hpp"
#include "peaks/lyapunov.hpp"
#include "peaks/system.hpp"

namespace peaks {

// Line-oriented problem files: named [sections] of key = value lines, with
// expressions quoted verbatim. See README for the full key list. Exactly
// one [system] section is required; [pair], [klgen], [lyapunov] and
// [solver] are optional.
struct SolverSettings {
  long grid = 1000;
  long refine_rounds = 4;
  long horizon = 100;
  double tolerance = 1e-9;
};

struct PairSpec {
  enum class Kind { linear, affine, expression };
  Kind kind = Kind::linear;
  double a = 1.0;
  double c = 0.0;
  double beta = 0.5;
  std::string h_expr;                  // variable x, on [0,1]
  std::optional<std::string> h_inverse;  // variable y
};

struct KlgenSpec {
  std::string gamma_expr;  // variables s, t
  std::optional<std::string> theta_expr;
  std::optional<double> theta_const;
  std::optional<double> m;
};

struct LyapunovSpec {
  std::string V_expr;  // variables x1..xd
  double lambda = 0.5;
  std::optional<std::string> alpha_expr;  // variable s
  std::optional<std::pair<double, double>> I;
};

struct ProblemFile {
  // system section
  long dim = 0;
  std::optional<std::pair<double, double>> family_example;  // (p, mu)
  std::optional<InitialSet> initial;
  std::vector<double> matrix;            // row-major, linear map
  std::vector<std::string> map_exprs;    // T1..Td, variables x1..xd
  std::string phi_expr;
  std::optional<PairSpec> pair;
  std::optional<KlgenSpec> klgen;
  std::optional<LyapunovSpec> lyapunov;
  SolverSettings solver;

  static ProblemFile parse(const std::string& text);
  static ProblemFile load(const std::string& path);

  DynamicalSystem build_system() const;
  MonotoneBijection build_h() const;  // requires [pair]
  // gamma/theta from [klgen]; theta_sup estimated over initial samples and
  // m defaulted to the estimated infimum of gamma(theta_sup, .).
  KLGenUpperBound build_klgen(const DynamicalSystem& sys, long samples) const;
  double klgen_m(const KLGenUpperBound& bound) const;
  PsdFunction build_V() const;                      // requires [lyapunov]
  CompatibilityCertificate build_alpha() const;     // requires alpha + I
};

}  // namespace peaks
