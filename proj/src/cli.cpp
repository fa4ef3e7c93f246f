#include "peaks/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "peaks/gallery.hpp"
#include "peaks/problem_file.hpp"
#include "peaks/tables.hpp"

namespace peaks::cli {
namespace {

std::string f2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string raw(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options {
  std::string input;
  std::optional<long> grid, refine, horizon;
  std::optional<double> tolerance;
  std::string format = "text";
  std::optional<double> p, mu;
  std::string emit_problem;
  std::vector<std::string> positional;
};

double parse_real_or_fraction(const std::string& s) {
  std::size_t slash = s.find('/');
  auto num = [](const std::string& t) {
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
      throw error(errc::usage, "expected a number, got '" + t + "'");
    return v;
  };
  if (slash == std::string::npos) return num(s);
  double d = num(s.substr(slash + 1));
  if (d == 0.0) throw error(errc::usage, "fraction with zero denominator");
  return num(s.substr(0, slash)) / d;
}

Options parse_options(const std::vector<std::string>& argv, std::size_t start) {
  Options opt;
  for (std::size_t i = start; i < argv.size(); ++i) {
    const std::string& a = argv[i];
    auto next = [&]() -> const std::string& {
      if (i + 1 >= argv.size()) throw error(errc::usage, "flag " + a + " needs a value");
      return argv[++i];
    };
    if (a == "--input") opt.input = next();
    else if (a == "--grid") opt.grid = std::stol(next());
    else if (a == "--refine") opt.refine = std::stol(next());
    else if (a == "--horizon") opt.horizon = std::stol(next());
    else if (a == "--tolerance") opt.tolerance = parse_real_or_fraction(next());
    else if (a == "--format") opt.format = next();
    else if (a == "--p") opt.p = parse_real_or_fraction(next());
    else if (a == "--mu") opt.mu = parse_real_or_fraction(next());
    else if (a == "--emit-problem") opt.emit_problem = next();
    else if (!a.empty() && a[0] == '-') throw error(errc::usage, "unknown flag " + a);
    else opt.positional.push_back(a);
  }
  if (opt.format != "text" && opt.format != "csv")
    throw error(errc::usage, "--format must be text or csv");
  return opt;
}

ProblemFile load_problem(const Options& opt) {
  if (opt.input.empty()) throw error(errc::usage, "this command needs --input <file>");
  ProblemFile pf = ProblemFile::load(opt.input);
  if (opt.grid) pf.solver.grid = *opt.grid;
  if (opt.refine) pf.solver.refine_rounds = *opt.refine;
  if (opt.horizon) pf.solver.horizon = *opt.horizon;
  if (opt.tolerance) pf.solver.tolerance = *opt.tolerance;
  return pf;
}

UsefulPair verified_pair(const ProblemFile& pf, BoundedSequence& seq) {
  MonotoneBijection h = pf.build_h();
  return verify_pair(seq, std::move(h), pf.pair->beta, pf.solver.horizon,
                     pf.solver.tolerance);
}

std::string pair_summary(const UsefulPair& pair) {
  std::ostringstream out;
  out << "  h(0) = " << raw(pair.h.h0) << "\n";
  out << "  h(1) = " << raw(pair.h.h1) << "\n";
  out << "  beta = " << raw(pair.beta) << "\n";
  out << "  verified_horizon = " << pair.verified_horizon << "\n";
  out << "  useful = " << (pair.useful_witness ? "true" : "false") << "\n";
  if (pair.useful_witness) out << "  witness = " << *pair.useful_witness << "\n";
  out << "  sup_at_zero = " << (pair.sup_at_zero ? "true" : "false") << "\n";
  return out.str();
}

CommandResult cmd_tables(const Options& opt) {
  if (opt.positional.size() != 1)
    throw error(errc::usage, "tables needs one argument: 1, 2 or 3");
  int which = std::stoi(opt.positional[0]);
  tables::TableDocument doc = tables::reproduce_table(which);
  return {0, opt.format == "csv" ? doc.to_csv() : doc.to_text()};
}

CommandResult cmd_example(const Options& opt) {
  if (!opt.p || !opt.mu) throw error(errc::usage, "example needs --p and --mu");
  gallery::ExampleParams params{*opt.p, *opt.mu};
  auto cf = gallery::closed_forms(params);
  std::ostringstream out;
  out << "example instance\n";
  out << "  p = " << raw(params.p) << "\n";
  out << "  mu = " << raw(params.mu) << "\n";
  out << "  n_low = " << cf.n_lower << "\n";
  out << "  n_up = " << cf.n_upper << "\n";
  out << "  n_zero = " << cf.n_zero << " (table convention " << cf.n_zero_table << ")\n";
  out << "  K_least = " << cf.K_least << "\n";
  out << "  K_greatest = " << cf.K_greatest << "\n";
  out << "  nu_opt = " << f2(cf.nu_opt) << "\n";
  out << "  nu[0..6] =";
  for (long k = 0; k <= 6; ++k) out << " " << f2(cf.nu(k));
  out << "\n";

  BoundedSequence seq = gallery::nu_sequence(params);
  UsefulPair pb = gallery::pair_b(params, seq);
  StoppingReport rep = formula_F(seq, cf.K_greatest, pb);
  out << "  pair (2p^2/3, (1/2)^(1/n0)): floor F(K^s) = " << *rep.floor_F << "\n";

  if (!opt.emit_problem.empty()) {
    std::ofstream f(opt.emit_problem);
    if (!f) throw error(errc::io, "cannot write " + opt.emit_problem);
    f << "[system]\n";
    f << "family = example\n";
    f << "p = " << raw(params.p) << "\n";
    f << "mu = " << raw(params.mu) << "\n\n";
    f << "[pair]\n";
    f << "h = linear\n";
    f << "a = " << raw(2.0 * params.p * params.p / 3.0) << "\n";
    f << "beta = " << raw(pb.beta) << "\n\n";
    f << "[solver]\n";
    f << "grid = 1000\nrefine_rounds = 4\nhorizon = 100\n";
    out << "  problem file written to " << opt.emit_problem << "\n";
  }
  return {0, out.str()};
}

CommandResult cmd_solve(const Options& opt) {
  ProblemFile pf = load_problem(opt);
  if (!pf.pair) throw error(errc::parse, "solve needs a [pair] section");
  DynamicalSystem sys = pf.build_system();
  // The pair is checked term by term while the enumeration runs; a
  // violation surfaces as a domination error with the offending index.
  UsefulPair pair;
  pair.h = pf.build_h();
  pair.beta = pf.pair->beta;
  PeaksSolution sol = solve_peaks(sys, pair, pf.solver.grid, pf.solver.refine_rounds);
  std::ostringstream out;
  out << "solve report\n";
  out << "  system = " << sys.label << "\n";
  out << "  h(0) = " << raw(pair.h.h0) << ", h(1) = " << raw(pair.h.h1)
      << ", beta = " << raw(pair.beta) << "\n";
  out << "  K_bound = " << sol.K_bound << "\n";
  out << "  nu_opt = " << f2(sol.nu_opt) << "\n";
  out << "  k_opt = " << sol.k_opt << "\n";
  out << "  greatest_maximizer = " << sol.greatest_maximizer << "\n";
  out << "  x_opt = (";
  for (long i = 0; i < sol.x_opt.size(); ++i)
    out << (i ? ", " : "") << raw(sol.x_opt[i]);
  out << ")\n";
  out << "  static_problems_solved = " << sol.static_results.size() << "\n";
  out << "appendix\n";
  out << "  nu_opt_raw = " << raw(sol.nu_opt) << "\n";
  for (const auto& r : sol.static_results)
    out << "  nu[" << r.k << "] = " << raw(r.value) << "\n";
  return {0, out.str()};
}

CommandResult cmd_verify(const Options& opt) {
  if (opt.positional.size() != 1)
    throw error(errc::usage, "verify needs one of: pair, klgen, lyapunov");
  const std::string& what = opt.positional[0];
  ProblemFile pf = load_problem(opt);
  DynamicalSystem sys = pf.build_system();
  std::ostringstream out;

  if (what == "pair") {
    if (!pf.pair) throw error(errc::parse, "verify pair needs a [pair] section");
    NuOracle oracle(sys, pf.solver.grid, pf.solver.refine_rounds);
    BoundedSequence seq = oracle.sequence();
    UsefulPair pair = verified_pair(pf, seq);
    out << "verify pair report\n  verified = true\n" << pair_summary(pair);
    return {0, out.str()};
  }
  if (what == "klgen") {
    KLGenUpperBound bound = pf.build_klgen(sys, 512);
    KLGenVerifyReport rep = verify_klgen_bound(bound, sys, pf.solver.horizon, 512);
    out << "verify klgen report\n";
    out << "  theta_sup = " << raw(bound.theta_sup) << "\n";
    out << "  worst_margin = " << raw(rep.worst_margin) << "\n";
    out << "  violated = " << (rep.violated ? "true" : "false") << "\n";
    out << "  useful = " << (rep.useful ? "true" : "false") << "\n";
    out << "  inf_gamma_at_theta_sup = " << raw(rep.inf_gamma_at_theta_sup) << "\n";
    if (rep.violated) {
      out << "  witness_sample = " << *rep.witness_sample << "\n";
      out << "  witness_k = " << *rep.witness_k << "\n";
      return {1, out.str()};
    }
    return {0, out.str()};
  }
  if (what == "lyapunov") {
    PsdFunction V = pf.build_V();
    OptLyapunovCandidate cand = verify_opt_lyapunov(V, sys, pf.lyapunov->lambda, 512);
    out << "verify lyapunov report\n";
    out << "  lambda = " << raw(cand.lambda) << "\n";
    out << "  V_sup = " << raw(cand.V_sup) << "\n";
    out << "  ratio = " << raw(cand.ratio) << "\n";
    if (pf.lyapunov->alpha_expr) {
      CompatibilityCertificate cert = pf.build_alpha();
      CertificateReport rep =
          verify_certificate(cert, cand.V, sys, pf.solver.horizon, 256);
      out << "  certificate_ok = " << (rep.ok ? "true" : "false") << "\n";
      out << "  certificate_worst_margin = " << raw(rep.worst_margin) << "\n";
      if (!rep.ok) return {1, out.str()};
    }
    return {0, out.str()};
  }
  throw error(errc::usage, "verify needs one of: pair, klgen, lyapunov");
}

CommandResult cmd_convert(const Options& opt) {
  if (opt.positional.size() != 1)
    throw error(errc::usage,
                "convert needs one of: pair-to-klgen, klgen-to-pair, "
                "pair-to-lyapunov, lyapunov-to-pair");
  const std::string& mode = opt.positional[0];
  ProblemFile pf = load_problem(opt);
  DynamicalSystem sys = pf.build_system();
  std::ostringstream out;

  auto numeric_pair = [&](BoundedSequence& seq) { return verified_pair(pf, seq); };

  if (mode == "pair-to-klgen") {
    if (!pf.pair) throw error(errc::parse, "conversion needs a [pair] section");
    NuOracle oracle(sys, pf.solver.grid, pf.solver.refine_rounds);
    BoundedSequence seq = oracle.sequence();
    UsefulPair pair = numeric_pair(seq);
    KLGenUpperBound bound = klgen_from_pair(pair, sys, pf.solver.horizon);
    KLGenVerifyReport rep = verify_klgen_bound(bound, sys, pf.solver.horizon, 256);
    out << "pair-to-klgen report\n";
    out << "  gamma(s,t) = min{s, h(beta^t)}\n";
    out << "  theta = orbit supremum of the objective\n";
    out << "  theta_sup = " << raw(bound.theta_sup) << "\n";
    out << "  useful = " << (bound.useful_flag ? "true" : "false") << "\n";
    out << "  worst_margin = " << raw(rep.worst_margin) << "\n";
    return {rep.violated ? 1 : 0, out.str()};
  }
  if (mode == "klgen-to-pair") {
    KLGenUpperBound bound = pf.build_klgen(sys, 512);
    double m = pf.klgen_m(bound);
    NuOracle oracle(sys, pf.solver.grid, pf.solver.refine_rounds);
    BoundedSequence seq = oracle.sequence();
    UsefulPair pair = pair_from_klgen(bound, seq, m, pf.solver.horizon);
    out << "klgen-to-pair report\n";
    out << "  m = " << raw(m) << "\n" << pair_summary(pair);
    if (pair.useful_witness) {
      StopResult stop = solve_stop(seq, pair);
      out << "  K_bound = " << stop.K_bound << "\n";
      out << "  nu_opt = " << f2(stop.max_value) << "\n";
      out << "  greatest_maximizer = " << stop.argmax.back() << "\n";
    }
    return {0, out.str()};
  }
  if (mode == "pair-to-lyapunov") {
    if (!pf.pair) throw error(errc::parse, "conversion needs a [pair] section");
    NuOracle oracle(sys, pf.solver.grid, pf.solver.refine_rounds);
    BoundedSequence seq = oracle.sequence();
    UsefulPair pair = numeric_pair(seq);
    YoshizawaResult yr = yoshizawa_construct(pair, sys, 1000);
    double v_sup = 0.0, worst = 0.0;
    for (const Vec& x : sample_initial(sys.initial_set, 256)) {
      double vx = yr.V.eval(x);
      double vtx = yr.V.eval(sys.map_T(x));
      v_sup = std::max(v_sup, vx);
      worst = std::max(worst, vtx - pair.beta * vx);
    }
    CertificateReport crep = verify_certificate(yr.h_hat, yr.V, sys, 64, 128);
    out << "pair-to-lyapunov report\n";
    out << "  V(x) = sup_k beta^-k h^-1(omega(phi(T^k x))), k_max = " << yr.k_max << "\n";
    out << "  V_sup_on_samples = " << raw(v_sup) << "\n";
    out << "  worst_decrement_excess = " << raw(worst) << "\n";
    out << "  truncation_seen = " << (yr.truncation_seen->load() ? "true" : "false") << "\n";
    out << "  certificate_I = [" << raw(yr.h_hat.I_lo) << ", " << raw(yr.h_hat.I_hi) << "]\n";
    out << "  certificate_ok = " << (crep.ok ? "true" : "false") << "\n";
    bool bad = worst > 1e-9 || v_sup > 1.0 + 1e-9 || !crep.ok;
    return {bad ? 1 : 0, out.str()};
  }
  if (mode == "lyapunov-to-pair") {
    PsdFunction V = pf.build_V();
    OptLyapunovCandidate cand = verify_opt_lyapunov(V, sys, pf.lyapunov->lambda, 512);
    CompatibilityCertificate cert = pf.build_alpha();
    NuOracle oracle(sys, pf.solver.grid, pf.solver.refine_rounds);
    BoundedSequence seq = oracle.sequence();
    LyapunovPairOutcome pr = pair_from_lyapunov(cand, cert, seq, pf.solver.horizon);
    out << "lyapunov-to-pair report\n";
    if (pr.immediate_optimum) {
      out << "  immediate_optimum = true (ratio 0: K^s = 0, nu_opt = nu_0)\n";
      out << "  nu_0 = " << f2(oracle.value(0)) << "\n";
      return {0, out.str()};
    }
    out << pair_summary(*pr.pair);
    StopResult stop = solve_stop(seq, *pr.pair);
    out << "  K_bound = " << stop.K_bound << "\n";
    out << "  nu_opt = " << f2(stop.max_value) << "\n";
    out << "  greatest_maximizer = " << stop.argmax.back() << "\n";
    return {0, out.str()};
  }
  throw error(errc::usage, "unknown conversion '" + mode + "'");
}

int exit_code_for(errc code) {
  switch (code) {
    case errc::usage:
    case errc::io:
    case errc::parse:
    case errc::parameter:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

std::string usage() {
  return
      "usage: peakstool <command> [flags]\n"
      "commands:\n"
      "  solve --input <file>                 solve the peaks problem with the file's pair\n"
      "  verify pair|klgen|lyapunov --input <file>\n"
      "  convert pair-to-klgen|klgen-to-pair|pair-to-lyapunov|lyapunov-to-pair --input <file>\n"
      "  tables 1|2|3 [--format text|csv]     reproduce the worked-example tables\n"
      "  example --p <v> --mu <v> [--emit-problem <file>]\n"
      "flags: --grid <n> --refine <n> --horizon <n> --tolerance <x> --format text|csv\n"
      "environment: PEAKS_THREADS caps grid-scan parallelism\n";
}

CommandResult run_command(const std::vector<std::string>& argv) {
  try {
    if (argv.empty()) return {2, usage()};
    const std::string& cmd = argv[0];
    Options opt = parse_options(argv, 1);
    if (cmd == "tables") return cmd_tables(opt);
    if (cmd == "example") return cmd_example(opt);
    if (cmd == "solve") return cmd_solve(opt);
    if (cmd == "verify") return cmd_verify(opt);
    if (cmd == "convert") return cmd_convert(opt);
    return {2, "unknown command '" + cmd + "'\n" + usage()};
  } catch (const error& e) {
    std::string kind = exit_code_for(e.code()) == 2 ? "input error" : "verification violation";
    return {exit_code_for(e.code()), kind + ": " + std::string(e.what()) + "\n"};
  } catch (const std::exception& e) {
    return {1, std::string("error: ") + e.what() + "\n"};
  }
}

}  // namespace peaks::cli
