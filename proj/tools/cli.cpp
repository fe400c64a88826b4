#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kolmo/defsets.hpp"
#include "kolmo/disc_norms.hpp"
#include "kolmo/error.hpp"
#include "kolmo/json_io.hpp"
#include "kolmo/normalform.hpp"
#include "kolmo/paramopt.hpp"
#include "kolmo/power_series.hpp"
#include "kolmo/prisma.hpp"

namespace kolmo::cli {
namespace {

constexpr const char* kVersion = "0.1.0";

// Cells are pre-formatted strings; an empty cell is a masked value.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Outcome {
  Json doc;
  Table table;
  bool ok = true;
};

std::string cell(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}
std::string cell(const Rational& q) { return to_fraction_string(q); }
std::string cell(bool b) { return b ? "true" : "false"; }
std::string cell(std::size_t n) { return std::to_string(n); }
std::string cell(unsigned n) { return std::to_string(n); }
std::string cell(int n) { return std::to_string(n); }
std::string cell(const std::optional<double>& x) { return x ? cell(*x) : std::string(); }

// JSON has no infinity; unbounded quantities become null.
Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Rational number(const std::string& text, const std::string& flag) {
  try {
    return parse_rational(text);
  } catch (const Error&) {
    throw Error(Errc::parse, flag + " expects a fraction p/q or a decimal, got '" + text + "'");
  }
}

double real(const std::string& text, const std::string& flag) { return to_double(number(text, flag)); }

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

// A series given as JSON or as a comma-separated coefficient list "c0,c1,...".
TruncSeries parse_series(const std::string& text) {
  if (!text.empty() && text.front() == '{') return series_from_json(Json::parse(text));
  std::vector<Rational> coeffs;
  for (const auto& part : split(text, ',')) coeffs.push_back(number(part, "--series"));
  if (coeffs.empty()) throw Error(Errc::parse, "--series needs at least one coefficient");
  return TruncSeries(std::move(coeffs));
}

// A definition set as JSON or shorthand: diag, closed-diag, cone:α,
// linear:a:c, power:γ:k, exp:slope:intercept, product:α1,α2,...
DefSet parse_set(const std::string& text, const Rational& S) {
  if (!text.empty() && text.front() == '{') return defset_from_json(Json::parse(text));
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::vector<std::string> args =
      colon == std::string::npos ? std::vector<std::string>{} : split(text.substr(colon + 1), ':');
  auto want = [&](std::size_t count) {
    if (args.size() != count)
      throw Error(Errc::parse, "set '" + text + "' needs " + std::to_string(count) + " parameter(s)");
  };
  if (head == "diag") return want(0), DefSet::open_diagonal(S);
  if (head == "closed-diag") return want(0), DefSet::closed_diagonal(S);
  if (head == "cone") return want(1), DefSet::cone(number(args[0], "cone"), S);
  if (head == "linear") {
    want(2);
    return DefSet::from_boundary(BoundaryFn::linear(number(args[0], "linear"), number(args[1], "linear")), S);
  }
  if (head == "power") {
    want(2);
    return DefSet::from_boundary(BoundaryFn::power(number(args[0], "power"), number(args[1], "power")), S);
  }
  if (head == "exp") {
    want(2);
    return defset_of_exponential(number(args[0], "exp"), number(args[1], "exp"), S);
  }
  if (head == "product") {
    want(1);
    std::vector<Rational> alphas;
    if (!args[0].empty())
      for (const auto& a : split(args[0], ',')) alphas.push_back(number(a, "product"));
    return defset_of_product(alphas, S);
  }
  throw Error(Errc::parse, "unknown set shorthand '" + text + "'");
}

// powers, hilbert, geometric:c0:ratio:e0:step or table:c:e;c:e;...
WeightSequence parse_weights(const std::string& text) {
  if (text == "powers") return WeightSequence::powers();
  if (text == "hilbert") return WeightSequence::hilbert();
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "geometric") {
    auto a = split(rest, ':');
    if (a.size() != 4) throw Error(Errc::parse, "geometric weights need c0:ratio:e0:step");
    return WeightSequence::geometric(real(a[0], "weights"), real(a[1], "weights"), real(a[2], "weights"),
                                     real(a[3], "weights"));
  }
  if (head == "table") {
    std::vector<std::pair<double, double>> entries;
    for (const auto& pair : split(rest, ';')) {
      auto ce = split(pair, ':');
      if (ce.size() != 2) throw Error(Errc::parse, "table weights need c:e entries separated by ';'");
      entries.emplace_back(real(ce[0], "weights"), real(ce[1], "weights"));
    }
    return WeightSequence::tabulated(std::move(entries));
  }
  throw Error(Errc::parse, "unknown weight sequence '" + text + "'");
}

Json rapid_json(const RapidConvergence& rc) {
  return Json{{"holds", rc.holds}, {"C", rc.C}, {"rho", rc.rho}};
}

// ---------------------------------------------------------------- commands

struct MorseOpts {
  std::size_t steps = 4;
  std::size_t order = 0;  // 0 selects default_truncation(steps)
  std::string beta = "1";
  unsigned n = 3;
};

LieTrace run_morse(const MorseOpts& o, std::size_t& order) {
  if (o.n < 3) throw Error(Errc::domain, "--n must be at least 3");
  order = o.order ? o.order : default_truncation(o.steps);
  MorseInstance m = morse_instance(number(o.beta, "--beta"), o.n, order);
  return lie_iterate_formal(m.a, m.b0, o.steps);
}

Json morse_header(const MorseOpts& o, std::size_t order) {
  return Json{{"n", o.n}, {"beta", cell(number(o.beta, "--beta"))}, {"steps", o.steps}, {"order", order}};
}

Outcome cmd_morse_trace(const MorseOpts& o) {
  std::size_t order = 0;
  LieTrace trace = run_morse(o, order);
  Outcome res;
  res.doc = morse_header(o, order);
  res.doc["trace"] = to_json(trace);
  res.table.header = {"round", "power", "f", "b"};
  for (std::size_t r = 0; r <= trace.rounds.size(); ++r) {
    const TruncSeries& f = r < trace.rounds.size() ? trace.rounds[r].f : trace.final_f;
    TruncSeries b = r < trace.rounds.size() ? trace.rounds[r].b : trace.final_remainder();
    for (std::size_t k = 0; k <= f.trunc_order(); ++k)
      res.table.rows.push_back({cell(r), cell(k), cell(f[k]), k <= b.trunc_order() ? cell(b[k]) : ""});
  }
  return res;
}

Outcome cmd_normalize(const MorseOpts& o) {
  std::size_t order = 0;
  LieTrace trace = run_morse(o, order);
  TruncSeries psi = normalizer_series(trace);
  TruncSeries rem = trace.final_remainder();
  Outcome res;
  res.doc = morse_header(o, order);
  res.doc["normal_form"] = to_json(trace.final_f);
  res.doc["remainder_order"] = rem.is_zero() ? Json(nullptr) : Json(rem.order());
  res.doc["psi"] = to_json(psi);
  res.table.header = {"power", "normal_form", "psi"};
  std::size_t top = std::max(trace.final_f.trunc_order(), psi.trunc_order());
  for (std::size_t k = 0; k <= top; ++k)
    res.table.rows.push_back({cell(k), k <= trace.final_f.trunc_order() ? cell(trace.final_f[k]) : "",
                              k <= psi.trunc_order() ? cell(psi[k]) : ""});
  return res;
}

struct CertOpts {
  std::string t0 = "0.004", lambda = "1/4", mu = "1/2", r = "1/2", beta = "1";
  int n = 3;
  std::size_t steps = 6;
  bool formal = false;
  std::size_t order = 0;
};

Outcome cmd_certify(const CertOpts& o) {
  Certificate c = certify(real(o.t0, "--t0"), real(o.lambda, "--lambda"), real(o.mu, "--mu"),
                          real(o.r, "--r"), real(o.beta, "--beta"), o.n);
  Outcome res;
  res.doc = Json{{"certificate", to_json(c)}, {"steps", nullptr}};
  res.table.header = {"n", "t", "s", "bound"};
  if (!c.passes()) {
    res.ok = false;
    return res;
  }
  std::vector<CertifiedStep> steps;
  try {
    steps = lie_iterate_certified(c, o.steps);
  } catch (const Error& e) {
    if (e.code() != Errc::certificate_breach) throw;
    res.doc["breach"] = e.what();
    res.ok = false;
    return res;
  }
  Json sj = to_json(steps);
  std::vector<double> bounds;
  for (const auto& s : steps) bounds.push_back(s.bound);
  res.doc["rapid_convergence"] = rapid_json(rapid_convergence_check(bounds));

  std::vector<double> formal;
  if (o.formal) {
    MorseOpts m{o.steps, o.order, o.beta, static_cast<unsigned>(o.n)};
    std::size_t order = 0;
    LieTrace trace = run_morse(m, order);
    res.doc["formal_order"] = order;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      TruncSeries b = i < trace.rounds.size() ? trace.rounds[i].b : trace.final_remainder();
      double norm = majorant_norm(b, steps[i].t).value;
      formal.push_back(norm);
      sj[i]["formal_norm"] = norm;
      sj[i]["dominated"] = norm <= steps[i].bound;
      if (!(norm <= steps[i].bound)) res.ok = false;
    }
    res.table.header.push_back("formal_norm");
  }
  res.doc["steps"] = sj;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::vector<std::string> row{cell(steps[i].n), cell(steps[i].t), cell(steps[i].s), cell(steps[i].bound)};
    if (o.formal) row.push_back(cell(formal[i]));
    res.table.rows.push_back(std::move(row));
  }
  return res;
}

struct ThresholdOpts {
  std::string lambda = "1/4", mu = "1/2", r = "1/2", beta = "1";
  int n = 3;
};

Outcome cmd_threshold(const ThresholdOpts& o) {
  double lambda = real(o.lambda, "--lambda"), mu = real(o.mu, "--mu"), r = real(o.r, "--r"),
         beta = real(o.beta, "--beta");
  double T0 = threshold_T0(lambda, mu, r, beta, o.n);
  double t_inf = (mu - lambda) / (1 - lambda) * T0;
  Outcome res;
  res.doc = Json{{"lambda", lambda}, {"mu", mu}, {"r", r}, {"beta", beta}, {"n", o.n}, {"T0", T0}, {"t_inf", t_inf}};
  res.table.header = {"lambda", "mu", "r", "beta", "n", "T0", "t_inf"};
  res.table.rows.push_back({cell(lambda), cell(mu), cell(r), cell(beta), cell(o.n), cell(T0), cell(t_inf)});
  return res;
}

struct OptimizeOpts {
  std::string mode = "basic";
  unsigned n = 3;
};

Outcome cmd_optimize(const OptimizeOpts& o) {
  if (o.mode == "basic" && o.n != 3) throw Error(Errc::domain, "the basic objective is defined for n = 3 only");
  if (o.n < 3) throw Error(Errc::domain, "--n must be at least 3");
  OptResult r = o.mode == "basic" ? maximize_basic() : maximize_equalized(o.n);
  Outcome res;
  res.doc = Json{{"mode", o.mode}, {"n", o.n}};
  res.doc.update(to_json(r));
  res.table.header = {"mode", "n", "lambda", "mu", "r", "e_t_inf", "t_inf", "iterations", "grad_norm"};
  res.table.rows.push_back({o.mode, cell(o.n), cell(r.lambda), cell(r.mu), cell(r.r), cell(r.value),
                            cell(r.t_inf), cell(r.iterations), cell(r.grad_norm)});
  return res;
}

Outcome cmd_qtable(const std::vector<unsigned>& ns) {
  for (unsigned n : ns)
    if (n < 3) throw Error(Errc::domain, "--n entries must be at least 3");
  auto rows = q_table(ns);
  Outcome res;
  Json arr = Json::array();
  res.table.header = {"n", "lambda", "mu", "Q", "true_radius", "t_inf"};
  for (const auto& r : rows) {
    arr.push_back(to_json(r));
    res.table.rows.push_back(
        {cell(r.n), cell(r.lambda), cell(r.mu), cell(r.Q), cell(r.true_radius), cell(r.t_inf)});
  }
  res.doc = Json{{"rows", arr}};
  return res;
}

struct PrismaOpts {
  std::string t0 = "1", s0, mu, x0 = "1/16", R = "1", k = "0", l = "1", lambda = "1/2";
  std::size_t steps = 5;
  bool parametric = false;
  std::size_t max_exact_steps = 20;
};

double log_magnitude(const Rational& x) { return x == 0 ? -std::numeric_limits<double>::infinity() : log_abs(x); }
double log_magnitude(double x) { return std::log(std::fabs(x)); }

template <class T>
Outcome run_prisma(const PrismaOpts& o, PrismaState<T> st, const IterConfig<T>& cfg) {
  Outcome res;
  res.doc = Json{{"exact", std::is_same_v<T, Rational>},
                 {"config", Json{{"R", scalar_json(cfg.R)},
                                 {"k", scalar_json(cfg.k)},
                                 {"l", scalar_json(cfg.l)},
                                 {"lambda", scalar_json(cfg.lambda)}}}};
  if (o.parametric) st.alpha = T(0);
  std::vector<PrismaState<T>> traj{st};
  try {
    for (std::size_t i = 0; i < o.steps; ++i)
      traj.push_back(o.parametric ? param_step(traj.back(), cfg) : step(traj.back(), cfg));
  } catch (const Error& e) {
    if (e.code() != Errc::leaves_domain) throw;
    res.doc["error"] = e.what();
    res.ok = false;
  }
  Json inv = Json::array(), closed = Json::array();
  std::vector<double> logs;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    inv.push_back(in_invariant_set(traj[i], cfg));
    // The closed form iterates the base pairs, which need s > λt throughout.
    try {
      closed.push_back(scalar_json(closed_form_xn(i, traj[0], cfg)));
    } catch (const Error& e) {
      if (e.code() != Errc::leaves_domain) throw;
      closed.push_back(nullptr);
    }
    logs.push_back(log_magnitude(traj[i].x));
  }
  res.doc["trajectory"] = to_json(traj);
  res.doc["closed_form_x"] = closed;
  res.doc["in_invariant_set"] = inv;
  try {
    res.doc["t_inf"] = scalar_json(t_infinity(traj[0].t, traj[0].s, cfg.lambda));
  } catch (const Error& e) {
    if (e.code() != Errc::nonpositive_limit) throw;
    res.doc["t_inf"] = nullptr;
  }
  RapidConvergence rc = rapid_convergence_check_log(logs);
  res.doc["rapid_convergence"] = rapid_json(rc);
  if (!rc.holds) res.ok = false;

  res.table.header = {"n", "t", "s", "x"};
  if (o.parametric) res.table.header.push_back("alpha");
  res.table.header.push_back("in_invariant_set");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::vector<std::string> row{cell(i), cell(traj[i].t), cell(traj[i].s), cell(traj[i].x)};
    if (o.parametric) row.push_back(cell(*traj[i].alpha));
    row.push_back(cell(inv[i].get<bool>()));
    res.table.rows.push_back(std::move(row));
  }
  return res;
}

Outcome cmd_prisma(const PrismaOpts& o) {
  if (!o.s0.empty() && !o.mu.empty()) throw Error(Errc::parse, "give at most one of --s0 and --mu");
  Rational t0 = number(o.t0, "--t0");
  Rational s0 = !o.s0.empty() ? number(o.s0, "--s0")
                : !o.mu.empty() ? Rational(number(o.mu, "--mu") * t0)
                                : Rational(3 * t0 / 4);
  PrismaState<Rational> st{t0, s0, number(o.x0, "--x0"), std::nullopt};
  IterConfig<Rational> cfg{number(o.R, "--R"), number(o.k, "--k"), number(o.l, "--l"),
                           number(o.lambda, "--lambda")};
  if (!(cfg.R > 0)) throw Error(Errc::domain, "--R must be positive");
  if (!(cfg.lambda > 0 && cfg.lambda < 1)) throw Error(Errc::domain, "--lambda must lie in (0,1)");
  if (cfg.k < 0 || cfg.l < 0) throw Error(Errc::domain, "--k and --l must be nonnegative");
  bool exact = is_integer(cfg.k) && is_integer(cfg.l) && o.steps <= o.max_exact_steps;
  if (exact) return run_prisma(o, st, cfg);
  PrismaState<double> sd{to_double(st.t), to_double(st.s), to_double(st.x), std::nullopt};
  IterConfig<double> cd{to_double(cfg.R), to_double(cfg.k), to_double(cfg.l), to_double(cfg.lambda)};
  return run_prisma(o, sd, cd);
}

struct DefsetOpts {
  std::vector<std::string> sets;
  std::string S = "1", t, s;
  unsigned grid = 50;
};

Json set_summary(const DefSet& A) {
  Json j = to_json(A);
  j["expression"] = A.to_string();
  return j;
}

Table boundary_samples(const DefSet& A, unsigned grid) {
  Table tab{{"t", "boundary"}, {}};
  double S = to_double(A.S());
  for (unsigned i = 1; i <= grid; ++i) {
    double t = S * i / grid;
    std::string value = A.kind() == DefSet::Kind::boundary ? cell(std::max(A.boundary()(t), 0.0)) : cell(t);
    tab.rows.push_back({cell(t), value});
  }
  return tab;
}

Outcome cmd_defset_contains(const DefsetOpts& o) {
  if (o.sets.size() != 1) throw Error(Errc::parse, "contains takes exactly one set");
  if (o.t.empty() || o.s.empty()) throw Error(Errc::parse, "contains needs --t and --s");
  DefSet A = parse_set(o.sets[0], number(o.S, "--S"));
  double t = real(o.t, "--t"), s = real(o.s, "--s");
  bool member = A.contains(t, s);
  Outcome res;
  res.doc = Json{{"set", set_summary(A)}, {"t", t}, {"s", s}, {"contains", member}};
  res.table = {{"t", "s", "contains"}, {{cell(t), cell(s), cell(member)}}};
  return res;
}

Outcome cmd_defset_convolve(const DefsetOpts& o) {
  if (o.sets.size() < 2) throw Error(Errc::parse, "convolve takes two or more sets");
  Rational S = number(o.S, "--S");
  DefSet acc = parse_set(o.sets[0], S);
  Json operands = Json::array({set_summary(acc)});
  for (std::size_t i = 1; i < o.sets.size(); ++i) {
    DefSet next = parse_set(o.sets[i], S);
    operands.push_back(set_summary(next));
    acc = convolve(acc, next);
  }
  Outcome res;
  res.doc = Json{{"operands", operands}, {"result", set_summary(acc)}};
  res.table = boundary_samples(acc, o.grid);
  return res;
}

Outcome cmd_defset_hull(const DefsetOpts& o) {
  if (o.sets.size() != 1) throw Error(Errc::parse, "hull takes exactly one set");
  DefSet A = parse_set(o.sets[0], number(o.S, "--S"));
  DefSet H = downset_hull(A);
  Outcome res;
  res.doc = Json{{"set", set_summary(A)}, {"hull", set_summary(H)}, {"unchanged", H == A}};
  res.table = boundary_samples(H, o.grid);
  return res;
}

Outcome cmd_defset_idempotent(const DefsetOpts& o) {
  if (o.sets.size() != 1) throw Error(Errc::parse, "idempotent takes exactly one set");
  if (o.grid < 1) throw Error(Errc::domain, "--grid must be positive");
  DefSet A = parse_set(o.sets[0], number(o.S, "--S"));
  double S = to_double(A.S());
  std::vector<std::pair<double, double>> pts;
  for (unsigned i = 1; i <= o.grid; ++i)
    for (unsigned j = 1; j <= o.grid; ++j) pts.emplace_back(S * i / o.grid, S * j / o.grid);
  bool idem = is_idempotent_on_grid(A, pts);
  Outcome res;
  res.doc = Json{{"set", set_summary(A)}, {"grid", o.grid}, {"idempotent", idem}};
  res.table = {{"grid", "idempotent"}, {{cell(o.grid), cell(idem)}}};
  return res;
}

struct NormsOpts {
  std::string series = "1,1,1", t = "1/2", s = "1/4", x = "1/2", shape = "geometric";
  unsigned k = 1;
  std::string lam_weights = "powers", mu_weights = "powers", p = "1", alpha = "1", C = "1";
  unsigned grid = 50;
};

Outcome cmd_nagumo(const NormsOpts& o) {
  TruncSeries f = parse_series(o.series);
  double t = real(o.t, "--t"), s = real(o.s, "--s");
  bool holds = nagumo_check(f, o.k, t, s);
  TruncSeries dk = f;
  double factorial = 1.0;
  for (unsigned i = 1; i <= o.k; ++i) {
    dk = derivative(dk);
    factorial *= i;
  }
  double lhs = majorant_norm(dk, s).value;
  double rhs = factorial / std::pow(t - s, o.k) * majorant_norm(f, t).value;
  Outcome res;
  res.doc = Json{{"series", to_json(f)}, {"k", o.k}, {"t", t}, {"s", s},
                 {"lhs", lhs},           {"rhs", rhs}, {"holds", holds}};
  res.table = {{"k", "t", "s", "lhs", "rhs", "holds"}, {{cell(o.k), cell(t), cell(s), cell(lhs), cell(rhs), cell(holds)}}};
  res.ok = holds;
  return res;
}

Outcome cmd_borel(const NormsOpts& o, bool series_given) {
  double x = real(o.x, "--x");
  Json shape;
  double bound = 0.0;
  if (series_given) {
    TruncSeries f = parse_series(o.series);
    for (const auto& c : f.coeffs())
      if (c < 0) throw Error(Errc::domain, "majorant coefficients must be nonnegative");
    shape = to_json(f);
    bound = borel_bound(f, x);
  } else {
    BorelMajorant m = o.shape == "geometric"          ? BorelMajorant::geometric()
                      : o.shape == "linear_rational" ? BorelMajorant::linear_rational()
                                                     : BorelMajorant::quadratic_rational();
    shape = o.shape;
    bound = borel_bound(m, x);
  }
  Outcome res;
  res.doc = Json{{"majorant", shape}, {"x", x}, {"bound", bound}};
  res.table = {{"x", "bound"}, {{cell(x), cell(bound)}}};
  return res;
}

Outcome cmd_lambda_p(const NormsOpts& o) {
  if (o.grid < 2) throw Error(Errc::domain, "--grid must be at least 2");
  std::vector<std::pair<double, double>> grid;
  for (unsigned i = 1; i <= o.grid; ++i)
    for (unsigned j = 1; j < i; ++j)
      grid.emplace_back(static_cast<double>(j) / o.grid, static_cast<double>(i) / o.grid);
  double p = real(o.p, "--p"), alpha = real(o.alpha, "--alpha"), C = real(o.C, "--C");
  LambdaPReport rep = lambda_p_check(parse_weights(o.lam_weights), parse_weights(o.mu_weights), p, alpha, C, grid);
  Outcome res;
  res.doc = Json{{"lambda_weights", o.lam_weights},
                 {"mu_weights", o.mu_weights},
                 {"p", p},
                 {"alpha", alpha},
                 {"C", C},
                 {"grid", o.grid},
                 {"holds", rep.holds},
                 {"worst_ratio", finite_or_null(rep.worst_ratio)},
                 {"truncated_at", rep.truncated_at ? Json(*rep.truncated_at) : Json(nullptr)}};
  res.table = {{"holds", "worst_ratio", "truncated_at"},
               {{cell(rep.holds), cell(rep.worst_ratio), rep.truncated_at ? cell(*rep.truncated_at) : ""}}};
  res.ok = rep.holds;
  return res;
}

struct PlotOpts {
  std::string mode = "basic";
  unsigned grid = 50;
};

Outcome cmd_plot_grid(const PlotOpts& o) {
  if (o.grid < 2) throw Error(Errc::domain, "--grid must be at least 2");
  auto pts = plot_grid(o.mode == "basic" ? Objective::basic : Objective::equalized, o.grid);
  Outcome res;
  Json arr = Json::array();
  res.table.header = {"lambda", "mu", "value"};
  for (const auto& p : pts) {
    arr.push_back(Json{{"lambda", p.lambda}, {"mu", p.mu}, {"value", p.value ? Json(*p.value) : Json(nullptr)}});
    res.table.rows.push_back({cell(p.lambda), cell(p.mu), cell(p.value)});
  }
  res.doc = Json{{"mode", o.mode}, {"resolution", o.grid}, {"points", arr}};
  return res;
}

// ---------------------------------------------------------------- output

std::string utc_now() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_csv(std::ostream& os, const Table& tab) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(tab.header);
  for (const auto& row : tab.rows) line(row);
}

void emit(std::ostream& os, const Outcome& res, bool csv, const Json* meta) {
  if (csv) {
    if (meta) os << "# " << meta->dump() << '\n';
    write_csv(os, res.table);
    return;
  }
  if (meta)
    os << Json{{"meta", *meta}, {"data", res.doc}}.dump(2) << '\n';
  else
    os << res.doc.dump(2) << '\n';
}

bool is_outcome_error(Errc code) {
  switch (code) {
    case Errc::certificate_breach:
    case Errc::divergence:
    case Errc::inconclusive:
    case Errc::leaves_domain:
    case Errc::nonpositive_limit:
    case Errc::infinite_norm:
      return true;
    default:
      return false;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact and certified computations for the quadratic normal-form iteration", "kolmo"};
  app.fallthrough();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", kVersion);

  std::string format = "json", out_path;
  bool stamp = false;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--out", out_path, "Write the document to this file instead of stdout");
  app.add_flag("--stamp", stamp, "Wrap the document with tool metadata and a timestamp");

  std::function<Outcome()> action;

  auto morse_flags = [](CLI::App* sub, MorseOpts& o) {
    sub->add_option("--steps", o.steps, "Iteration rounds")->capture_default_str();
    sub->add_option("--order", o.order, "Truncation order (default 2^(steps+1)+4)");
    sub->add_option("--beta", o.beta, "Coefficient of the perturbation z^n")->capture_default_str();
    sub->add_option("--n", o.n, "Degree of the perturbation")->capture_default_str();
  };

  MorseOpts morse, normal;
  auto* s_morse = app.add_subcommand("morse-trace", "Exact Lie iteration for z^2/2 + beta z^n");
  morse_flags(s_morse, morse);
  s_morse->callback([&] { action = [&] { return cmd_morse_trace(morse); }; });

  auto* s_norm = app.add_subcommand("normalize", "Normal form and normalizing coordinate change");
  morse_flags(s_norm, normal);
  s_norm->callback([&] { action = [&] { return cmd_normalize(normal); }; });

  CertOpts cert;
  auto* s_cert = app.add_subcommand("certify", "Check the convergence certificate and run the bound chain");
  s_cert->add_option("--t0", cert.t0, "Initial disc radius")->capture_default_str();
  s_cert->add_option("--lambda", cert.lambda, "Contraction ratio of the base pairs")->capture_default_str();
  s_cert->add_option("--mu", cert.mu, "Initial ratio s0/t0")->capture_default_str();
  s_cert->add_option("--r", cert.r, "Radius fraction of the quadratic set")->capture_default_str();
  s_cert->add_option("--beta", cert.beta, "Perturbation coefficient")->capture_default_str();
  s_cert->add_option("--n", cert.n, "Perturbation degree")->capture_default_str();
  s_cert->add_option("--steps", cert.steps, "Steps of the bound chain")->capture_default_str();
  s_cert->add_flag("--formal", cert.formal, "Compare each bound with the exact remainder's majorant norm");
  s_cert->add_option("--order", cert.order, "Truncation for --formal (default 2^(steps+1)+4)");
  s_cert->callback([&] { action = [&] { return cmd_certify(cert); }; });

  ThresholdOpts thr;
  auto* s_thr = app.add_subcommand("threshold", "Largest admissible initial radius");
  s_thr->add_option("--lambda", thr.lambda, "Contraction ratio")->capture_default_str();
  s_thr->add_option("--mu", thr.mu, "Initial ratio s0/t0")->capture_default_str();
  s_thr->add_option("--r", thr.r, "Radius fraction")->capture_default_str();
  s_thr->add_option("--beta", thr.beta, "Perturbation coefficient")->capture_default_str();
  s_thr->add_option("--n", thr.n, "Perturbation degree")->capture_default_str();
  s_thr->callback([&] { action = [&] { return cmd_threshold(thr); }; });

  OptimizeOpts opt;
  auto* s_opt = app.add_subcommand("optimize", "Maximize the certified limit radius over (lambda, mu)");
  s_opt->add_option("--mode", opt.mode, "Objective")->check(CLI::IsMember({"basic", "equalized"}))->capture_default_str();
  s_opt->add_option("--n", opt.n, "Perturbation degree (equalized only)")->capture_default_str();
  s_opt->callback([&] { action = [&] { return cmd_optimize(opt); }; });

  std::vector<unsigned> qns{3, 4, 5, 6, 7, 8, 9, 10, 20, 50};
  auto* s_q = app.add_subcommand("qtable", "Ratio of true to certified radius per degree");
  s_q->add_option("--n", qns, "Comma-separated degrees")->delimiter(',')->capture_default_str();
  s_q->callback([&] { action = [&] { return cmd_qtable(qns); }; });

  PrismaOpts pr;
  auto* s_pr = app.add_subcommand("prisma", "Iterate the quadratic prisma map");
  s_pr->add_option("--t0", pr.t0, "Initial t")->capture_default_str();
  s_pr->add_option("--s0", pr.s0, "Initial s (default 3t0/4)");
  s_pr->add_option("--mu", pr.mu, "Initial s as a fraction of t0");
  s_pr->add_option("--x0", pr.x0, "Initial x")->capture_default_str();
  s_pr->add_option("--R", pr.R, "Denominator constant")->capture_default_str();
  s_pr->add_option("--k", pr.k, "Exponent of s")->capture_default_str();
  s_pr->add_option("--l", pr.l, "Exponent of t - s")->capture_default_str();
  s_pr->add_option("--lambda", pr.lambda, "Contraction ratio")->capture_default_str();
  s_pr->add_option("--steps", pr.steps, "Iterations")->capture_default_str();
  s_pr->add_flag("--parametric", pr.parametric, "Accumulate the running sum of x");
  s_pr->callback([&] { action = [&] { return cmd_prisma(pr); }; });

  DefsetOpts ds;
  auto* s_ds = app.add_subcommand("defset", "Definition-set algebra");
  s_ds->require_subcommand(1);
  auto set_flags = [&](CLI::App* sub, bool grid) {
    sub->add_option("sets", ds.sets, "Sets as JSON or shorthand (diag, closed-diag, cone:a, linear:a:c, "
                                     "power:g:k, exp:slope:intercept, product:a1,a2)")
        ->required();
    sub->add_option("--S", ds.S, "Outer radius for shorthand sets")->capture_default_str();
    if (grid) sub->add_option("--grid", ds.grid, "Grid size")->capture_default_str();
  };
  auto* s_contains = s_ds->add_subcommand("contains", "Membership of a point (t, s)");
  set_flags(s_contains, false);
  s_contains->add_option("--t", ds.t, "Outer coordinate");
  s_contains->add_option("--s", ds.s, "Inner coordinate");
  s_contains->callback([&] { action = [&] { return cmd_defset_contains(ds); }; });
  auto* s_conv = s_ds->add_subcommand("convolve", "Convolution A1 * A2 * ... (left to right)");
  set_flags(s_conv, true);
  s_conv->callback([&] { action = [&] { return cmd_defset_convolve(ds); }; });
  auto* s_idem = s_ds->add_subcommand("idempotent", "Check A * A = A on a grid");
  set_flags(s_idem, true);
  s_idem->callback([&] { action = [&] { return cmd_defset_idempotent(ds); }; });
  auto* s_hull = s_ds->add_subcommand("hull", "Downset hull");
  set_flags(s_hull, true);
  s_hull->callback([&] { action = [&] { return cmd_defset_hull(ds); }; });

  NormsOpts nm;
  auto* s_nm = app.add_subcommand("norms", "Disc-norm estimates");
  s_nm->require_subcommand(1);
  auto* s_nag = s_nm->add_subcommand("nagumo", "Cauchy-Nagumo inequality for one series");
  s_nag->add_option("--series", nm.series, "Coefficients c0,c1,... or series JSON")->capture_default_str();
  s_nag->add_option("--k", nm.k, "Derivative order")->capture_default_str();
  s_nag->add_option("--t", nm.t, "Outer radius")->capture_default_str();
  s_nag->add_option("--s", nm.s, "Inner radius")->capture_default_str();
  s_nag->callback([&] { action = [&] { return cmd_nagumo(nm); }; });
  auto* s_bor = s_nm->add_subcommand("borel", "Borel majorant bound at x = |u|/(t-s)");
  auto* bor_series = s_bor->add_option("--series", nm.series, "Polynomial majorant coefficients");
  s_bor->add_option("--shape", nm.shape, "Closed-form majorant")
      ->check(CLI::IsMember({"geometric", "linear_rational", "quadratic_rational"}))
      ->capture_default_str()
      ->excludes(bor_series);
  s_bor->add_option("--x", nm.x, "Argument")->capture_default_str();
  s_bor->callback([&] { action = [&, bor_series] { return cmd_borel(nm, bor_series->count() > 0); }; });
  auto* s_lp = s_nm->add_subcommand("lambda-p", "Weight-pair summability on a grid of 0 < s < t <= 1");
  s_lp->add_option("--lambda-weights", nm.lam_weights, "powers, hilbert, geometric:c0:ratio:e0:step, table:c:e;...")
      ->capture_default_str();
  s_lp->add_option("--mu-weights", nm.mu_weights, "Same grammar as --lambda-weights")->capture_default_str();
  s_lp->add_option("--p", nm.p, "Exponent p >= 1")->capture_default_str();
  s_lp->add_option("--alpha", nm.alpha, "Pole order")->capture_default_str();
  s_lp->add_option("--C", nm.C, "Constant")->capture_default_str();
  s_lp->add_option("--grid", nm.grid, "Grid size")->capture_default_str();
  s_lp->callback([&] { action = [&] { return cmd_lambda_p(nm); }; });

  PlotOpts pg;
  auto* s_pg = app.add_subcommand("plot-grid", "Objective values on a (lambda, mu) grid for contour plots");
  s_pg->add_option("--mode", pg.mode, "Objective")->check(CLI::IsMember({"basic", "equalized"}))->capture_default_str();
  s_pg->add_option("--grid", pg.grid, "Points per axis")->capture_default_str();
  s_pg->callback([&] { action = [&] { return cmd_plot_grid(pg); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Outcome res;
  try {
    res = action();
  } catch (const Error& e) {
    if (!is_outcome_error(e.code())) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
    res.doc = Json{{"error", Json{{"code", std::string(errc_name(e.code()))}, {"message", e.what()}}}};
    res.table = {{"error", "message"}, {{std::string(errc_name(e.code())), e.what()}}};
    res.ok = false;
  } catch (const Json::exception& e) {
    err << "error: malformed JSON argument: " << e.what() << '\n';
    return 2;
  }

  Json meta;
  if (stamp) {
    Json args = Json::array();
    for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
    meta = Json{{"tool", "kolmo"}, {"version", kVersion}, {"arguments", args}, {"generated_at", utc_now()}};
  }
  const Json* meta_ptr = stamp ? &meta : nullptr;
  bool csv = format == "csv";
  if (out_path.empty()) {
    emit(out, res, csv, meta_ptr);
  } else {
    std::ofstream file(out_path);
    if (!file) {
      err << "error: cannot open " << out_path << " for writing\n";
      return 2;
    }
    emit(file, res, csv, meta_ptr);
  }
  return res.ok ? 0 : 1;
}

}  // namespace kolmo::cli
