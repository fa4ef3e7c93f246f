#include "peaks/problem_file.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "peaks/expr.hpp"
#include "peaks/gallery.hpp"

namespace peaks {
namespace {

struct Line {
  std::string section;
  std::string key;
  std::string value;  // raw; quotes stripped for quoted()
  bool quoted = false;
  long number = 0;  // line number for diagnostics
};

[[noreturn]] void fail(long line, const std::string& msg) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "problem file line %ld: %s", line, msg.c_str());
  throw parse_error(buf, static_cast<std::size_t>(line));
}

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  long num = 0;
  while (std::getline(in, raw)) {
    ++num;
    std::string s = raw;
    // strip comment (outside quotes) and whitespace
    bool in_quote = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') in_quote = !in_quote;
      if (s[i] == '#' && !in_quote) {
        s = s.substr(0, i);
        break;
      }
    }
    auto trim = [](std::string t) {
      std::size_t b = t.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      std::size_t e = t.find_last_not_of(" \t\r");
      return t.substr(b, e - b + 1);
    };
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(num, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) fail(num, "empty section name");
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(num, "expected key = value");
    Line line;
    line.section = section;
    line.key = trim(s.substr(0, eq));
    line.value = trim(s.substr(eq + 1));
    line.number = num;
    if (line.section.empty()) fail(num, "key outside any [section]");
    if (line.key.empty()) fail(num, "empty key");
    if (!line.value.empty() && line.value.front() == '"') {
      if (line.value.size() < 2 || line.value.back() != '"')
        fail(num, "unterminated quoted value");
      line.value = line.value.substr(1, line.value.size() - 2);
      line.quoted = true;
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

double parse_number(const Line& l) {
  const char* s = l.value.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0') fail(l.number, "expected a number for '" + l.key + "'");
  return v;
}

long parse_integer(const Line& l) {
  double v = parse_number(l);
  long n = static_cast<long>(v);
  if (static_cast<double>(n) != v) fail(l.number, "expected an integer for '" + l.key + "'");
  return n;
}

std::vector<double> parse_vector(const Line& l) {
  std::vector<double> out;
  std::istringstream in(l.value);
  std::string tok;
  while (in >> tok) {
    const char* s = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0') fail(l.number, "expected numbers for '" + l.key + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(l.number, "expected numbers for '" + l.key + "'");
  return out;
}

Vec to_vec(const std::vector<double>& v) {
  Vec x(static_cast<long>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<long>(i)] = v[i];
  return x;
}

std::vector<std::string> state_vars(long dim) {
  std::vector<std::string> vars;
  for (long i = 1; i <= dim; ++i) vars.push_back("x" + std::to_string(i));
  return vars;
}

std::function<double(const Vec&)> scalar_field(const std::string& text, long dim) {
  expr::Expression e = expr::parse(text, state_vars(dim));
  return [e](const Vec& x) {
    std::vector<double> b(x.data(), x.data() + x.size());
    return expr::evaluate(e, b);
  };
}

}  // namespace

ProblemFile ProblemFile::parse(const std::string& text) {
  ProblemFile pf;
  bool saw_system = false;
  std::string initial_kind;
  std::vector<double> box_lo, box_hi, seg_a, seg_b, line_dir;
  std::vector<Vec> points;
  std::map<std::string, std::string> pair_kv, klgen_kv, lyap_kv;
  std::optional<double> family_p, family_mu;
  std::map<long, std::string> map_expr_by_index;

  for (const Line& l : tokenize(text)) {
    if (l.section == "system") {
      saw_system = true;
      if (l.key == "dim") pf.dim = parse_integer(l);
      else if (l.key == "family") {
        if (l.value != "example") fail(l.number, "unknown family '" + l.value + "'");
      } else if (l.key == "p") family_p = parse_number(l);
      else if (l.key == "mu") family_mu = parse_number(l);
      else if (l.key == "initial") initial_kind = l.value;
      else if (l.key == "box_lo") box_lo = parse_vector(l);
      else if (l.key == "box_hi") box_hi = parse_vector(l);
      else if (l.key == "seg_a") seg_a = parse_vector(l);
      else if (l.key == "seg_b") seg_b = parse_vector(l);
      else if (l.key == "line_dir") line_dir = parse_vector(l);
      else if (l.key == "point") points.push_back(to_vec(parse_vector(l)));
      else if (l.key == "matrix") pf.matrix = parse_vector(l);
      else if (l.key == "phi") pf.phi_expr = l.value;
      else if (l.key.size() >= 2 && l.key[0] == 'T') {
        char* end = nullptr;
        long idx = std::strtol(l.key.c_str() + 1, &end, 10);
        if (*end != '\0' || idx < 1) fail(l.number, "unknown system key '" + l.key + "'");
        map_expr_by_index[idx] = l.value;
      } else fail(l.number, "unknown system key '" + l.key + "'");
    } else if (l.section == "pair") pair_kv[l.key] = l.value;
    else if (l.section == "klgen") klgen_kv[l.key] = l.value;
    else if (l.section == "lyapunov") lyap_kv[l.key] = l.value;
    else if (l.section == "solver") {
      if (l.key == "grid") pf.solver.grid = parse_integer(l);
      else if (l.key == "refine_rounds") pf.solver.refine_rounds = parse_integer(l);
      else if (l.key == "horizon") pf.solver.horizon = parse_integer(l);
      else if (l.key == "tolerance") pf.solver.tolerance = parse_number(l);
      else fail(l.number, "unknown solver key '" + l.key + "'");
    } else fail(l.number, "unknown section [" + l.section + "]");
  }
  if (!saw_system) throw error(errc::parse, "problem file: missing [system] section");
  if (pf.solver.grid < 2) throw error(errc::parameter, "solver.grid must be >= 2");
  if (pf.solver.refine_rounds < 0 || pf.solver.horizon < 0 || !(pf.solver.tolerance > 0.0))
    throw error(errc::parameter, "solver settings out of range");

  if (family_p || family_mu) {
    if (!family_p || !family_mu)
      throw error(errc::parse, "family = example needs both p and mu");
    pf.family_example = std::make_pair(*family_p, *family_mu);
    pf.dim = 2;
  } else {
    if (pf.dim <= 0) throw error(errc::parse, "system needs dim >= 1");
    if (initial_kind == "box")
      pf.initial = InitialSet::box(to_vec(box_lo), to_vec(box_hi));
    else if (initial_kind == "segment")
      pf.initial = InitialSet::segment(to_vec(seg_a), to_vec(seg_b));
    else if (initial_kind == "points")
      pf.initial = InitialSet::finite_points(points);
    else if (initial_kind == "box_intersect_line")
      pf.initial = InitialSet::box_intersect_line(to_vec(box_lo), to_vec(box_hi),
                                                  to_vec(line_dir));
    else
      throw error(errc::parse, "system needs initial = box | segment | points | box_intersect_line");
    if (pf.initial->ambient_dim() != pf.dim)
      throw error(errc::parameter, "initial set dimension does not match dim");
    for (const auto& [idx, text] : map_expr_by_index) {
      if (idx > pf.dim) throw error(errc::parse, "map component index exceeds dim");
      (void)text;
    }
    if (pf.matrix.empty()) {
      if (static_cast<long>(map_expr_by_index.size()) != pf.dim)
        throw error(errc::parse, "system needs either matrix or T1..Td expressions");
      pf.map_exprs.resize(static_cast<std::size_t>(pf.dim));
      for (long i = 1; i <= pf.dim; ++i)
        pf.map_exprs[static_cast<std::size_t>(i - 1)] = map_expr_by_index.at(i);
    } else if (static_cast<long>(pf.matrix.size()) != pf.dim * pf.dim) {
      throw error(errc::parameter, "matrix needs dim*dim entries");
    }
    if (pf.phi_expr.empty()) throw error(errc::parse, "system needs phi");
  }

  auto need = [](std::map<std::string, std::string>& kv, const std::string& key,
                 const char* section) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end())
      throw error(errc::parse, std::string("missing key '") + key + "' in [" + section + "]");
    return it->second;
  };
  auto opt_num = [](std::map<std::string, std::string>& kv,
                    const std::string& key) -> std::optional<double> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
      throw error(errc::parse, "expected a number for '" + key + "'");
    return v;
  };

  if (!pair_kv.empty()) {
    PairSpec spec;
    std::string kind = need(pair_kv, "h", "pair");
    if (kind == "linear") {
      spec.kind = PairSpec::Kind::linear;
      spec.a = opt_num(pair_kv, "a").value_or(1.0);
    } else if (kind == "affine") {
      spec.kind = PairSpec::Kind::affine;
      spec.a = opt_num(pair_kv, "a").value_or(1.0);
      spec.c = opt_num(pair_kv, "c").value_or(0.0);
    } else if (kind == "expr") {
      spec.kind = PairSpec::Kind::expression;
      spec.h_expr = need(pair_kv, "h_expr", "pair");
      if (pair_kv.count("h_inverse")) spec.h_inverse = pair_kv["h_inverse"];
    } else {
      throw error(errc::parse, "pair.h must be linear | affine | expr");
    }
    auto beta = opt_num(pair_kv, "beta");
    if (!beta) throw error(errc::parse, "missing key 'beta' in [pair]");
    spec.beta = *beta;
    if (!(spec.beta > 0.0 && spec.beta < 1.0))
      throw error(errc::parameter, "pair.beta must lie strictly inside (0,1)");
    pf.pair = std::move(spec);
  }

  if (!klgen_kv.empty()) {
    KlgenSpec spec;
    spec.gamma_expr = need(klgen_kv, "gamma", "klgen");
    if (klgen_kv.count("theta")) spec.theta_expr = klgen_kv["theta"];
    spec.theta_const = opt_num(klgen_kv, "theta_const");
    if (!spec.theta_expr && !spec.theta_const)
      throw error(errc::parse, "[klgen] needs theta or theta_const");
    spec.m = opt_num(klgen_kv, "m");
    pf.klgen = std::move(spec);
  }

  if (!lyap_kv.empty()) {
    LyapunovSpec spec;
    spec.V_expr = need(lyap_kv, "V", "lyapunov");
    auto lambda = opt_num(lyap_kv, "lambda");
    if (!lambda) throw error(errc::parse, "missing key 'lambda' in [lyapunov]");
    spec.lambda = *lambda;
    if (!(spec.lambda > 0.0 && spec.lambda < 1.0))
      throw error(errc::parameter, "lyapunov.lambda must lie strictly inside (0,1)");
    if (lyap_kv.count("alpha")) spec.alpha_expr = lyap_kv["alpha"];
    if (lyap_kv.count("I")) {
      std::istringstream in(lyap_kv["I"]);
      double lo, hi;
      if (!(in >> lo >> hi) || !(lo < hi))
        throw error(errc::parse, "lyapunov.I needs two increasing numbers");
      spec.I = std::make_pair(lo, hi);
    }
    pf.lyapunov = std::move(spec);
  }

  // Referenced expressions must parse now, not at first use.
  long dim = pf.dim;
  if (!pf.family_example) {
    (void)expr::parse(pf.phi_expr, state_vars(dim));
    for (const auto& t : pf.map_exprs) (void)expr::parse(t, state_vars(dim));
  }
  if (pf.pair && pf.pair->kind == PairSpec::Kind::expression) {
    (void)expr::parse(pf.pair->h_expr, {"x"});
    if (pf.pair->h_inverse) (void)expr::parse(*pf.pair->h_inverse, {"y"});
  }
  if (pf.klgen) {
    (void)expr::parse(pf.klgen->gamma_expr, {"s", "t"});
    if (pf.klgen->theta_expr) (void)expr::parse(*pf.klgen->theta_expr, state_vars(dim));
  }
  if (pf.lyapunov) {
    (void)expr::parse(pf.lyapunov->V_expr, state_vars(dim));
    if (pf.lyapunov->alpha_expr) (void)expr::parse(*pf.lyapunov->alpha_expr, {"s"});
  }
  return pf;
}

ProblemFile ProblemFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io, "cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

DynamicalSystem ProblemFile::build_system() const {
  if (family_example) {
    gallery::ExampleParams params{family_example->first, family_example->second};
    return gallery::make_system(params);
  }
  DynamicalSystem sys;
  sys.dim = dim;
  sys.initial_set = *initial;
  if (!matrix.empty()) {
    Mat A(dim, dim);
    for (long r = 0; r < dim; ++r)
      for (long c = 0; c < dim; ++c)
        A(r, c) = matrix[static_cast<std::size_t>(r * dim + c)];
    sys.map_T = [A](const Vec& x) -> Vec { return A * x; };
  } else {
    std::vector<expr::Expression> comps;
    for (const auto& t : map_exprs) comps.push_back(expr::parse(t, state_vars(dim)));
    sys.map_T = [comps, d = dim](const Vec& x) {
      std::vector<double> b(x.data(), x.data() + x.size());
      Vec y(d);
      for (long i = 0; i < d; ++i)
        y[i] = expr::evaluate(comps[static_cast<std::size_t>(i)], b);
      return y;
    };
  }
  sys.objective_phi = scalar_field(phi_expr, dim);
  sys.phi_shift = sys.objective_phi(Vec::Zero(dim));
  sys.label = "problem";
  return sys;
}

MonotoneBijection ProblemFile::build_h() const {
  if (!pair) throw error(errc::parse, "problem file has no [pair] section");
  switch (pair->kind) {
    case PairSpec::Kind::linear:
      return MonotoneBijection::linear(pair->a);
    case PairSpec::Kind::affine:
      return MonotoneBijection::affine(pair->a, pair->c);
    case PairSpec::Kind::expression: {
      expr::Expression he = expr::parse(pair->h_expr, {"x"});
      std::optional<std::function<double(double)>> inv;
      if (pair->h_inverse) {
        expr::Expression ie = expr::parse(*pair->h_inverse, {"y"});
        inv = [ie](double y) {
          double b[1] = {y};
          return expr::evaluate(ie, b);
        };
      }
      MonotoneBijection h = MonotoneBijection::from_function(
          [he](double x) {
            double b[1] = {x};
            return expr::evaluate(he, b);
          },
          std::move(inv));
      if (!sampled_strictly_increasing(h))
        throw error(errc::parameter, "pair.h_expr is not strictly increasing on [0,1]");
      return h;
    }
  }
  throw error(errc::parse, "unreachable pair kind");
}

KLGenUpperBound ProblemFile::build_klgen(const DynamicalSystem& sys, long samples) const {
  if (!klgen) throw error(errc::parse, "problem file has no [klgen] section");
  KLGenUpperBound bound;
  expr::Expression ge = expr::parse(klgen->gamma_expr, {"s", "t"});
  bound.gamma.eval = [ge](double s, double t) {
    double b[2] = {s, t};
    return expr::evaluate(ge, b);
  };
  if (klgen->theta_expr) {
    bound.theta = scalar_field(*klgen->theta_expr, sys.dim);
  } else {
    double c = *klgen->theta_const;
    bound.theta = [c](const Vec&) { return c; };
  }
  double sup = -1e300;
  for (const Vec& x : sample_initial(sys.initial_set, samples))
    sup = std::max(sup, bound.theta(x));
  bound.theta_sup = sup;
  return bound;
}

double ProblemFile::klgen_m(const KLGenUpperBound& bound) const {
  if (klgen && klgen->m) return *klgen->m;
  return inf_over_t(
      [&bound](double t) { return bound.gamma.eval(bound.theta_sup, t); });
}

PsdFunction ProblemFile::build_V() const {
  if (!lyapunov) throw error(errc::parse, "problem file has no [lyapunov] section");
  PsdFunction V;
  V.eval = scalar_field(lyapunov->V_expr, dim);
  return V;
}

CompatibilityCertificate ProblemFile::build_alpha() const {
  if (!lyapunov || !lyapunov->alpha_expr || !lyapunov->I)
    throw error(errc::parse, "problem file needs lyapunov.alpha and lyapunov.I");
  expr::Expression ae = expr::parse(*lyapunov->alpha_expr, {"s"});
  CompatibilityCertificate cert;
  cert.alpha = [ae](double s) {
    double b[1] = {s};
    return expr::evaluate(ae, b);
  };
  cert.I_lo = lyapunov->I->first;
  cert.I_hi = lyapunov->I->second;
  cert.domain_lo = cert.I_lo;
  cert.domain_hi = cert.I_hi;
  double a0 = cert.alpha(cert.I_lo), a1 = cert.alpha(cert.I_hi);
  if (std::fabs(a0) > 1e-6 || std::fabs(a1 - 1.0) > 1e-6)
    throw error(errc::parameter, "lyapunov.I endpoints must map to alpha(I) = [0,1]");
  return cert;
}

}  // namespace peaks
