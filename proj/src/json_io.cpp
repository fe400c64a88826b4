#include "kolmo/json_io.hpp"

#include "kolmo/error.hpp"

namespace kolmo {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(Errc::parse, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw Error(Errc::parse, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

Json scalar_json(const Rational& q) { return to_fraction_string(q); }
Json scalar_json(double x) { return x; }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number()) return rational_from_double(j.get<double>());
  throw Error(Errc::parse, "expected a fraction string or a number, got " + j.dump());
}

Json to_json(const TruncSeries& f) {
  Json coeffs = Json::array();
  for (const auto& c : f.coeffs()) coeffs.push_back(to_fraction_string(c));
  return Json{{"trunc_order", f.trunc_order()}, {"coeffs", coeffs}};
}

TruncSeries series_from_json(const Json& j) {
  const Json& n = field(j, "trunc_order");
  const Json& cs = field(j, "coeffs");
  if (!n.is_number_unsigned() && !(n.is_number_integer() && n.get<long>() >= 0))
    throw Error(Errc::parse, "trunc_order must be a natural number");
  if (!cs.is_array()) throw Error(Errc::parse, "coeffs must be an array");
  std::size_t N = n.get<std::size_t>();
  if (cs.size() != N + 1)
    throw Error(Errc::parse, "coeffs must have trunc_order + 1 entries");
  std::vector<Rational> c;
  c.reserve(cs.size());
  for (const auto& x : cs) c.push_back(rational_from_json(x));
  return TruncSeries(std::move(c));
}

Json to_json(const LocalOpBound& b) { return Json{{"C", b.C}, {"k", b.k}, {"l", b.l}}; }

LocalOpBound bound_from_json(const Json& j) {
  return {number_field(j, "C"), number_field(j, "k"), number_field(j, "l")};
}

Json to_json(const BoundaryFn& f) {
  using Op = BoundaryFn::Op;
  switch (f.op()) {
    case Op::linear: {
      auto [a, c] = f.params();
      return Json{{"op", "linear"}, {"a", scalar_json(a)}, {"c", scalar_json(c)}};
    }
    case Op::power: {
      auto [g, k] = f.params();
      return Json{{"op", "power"}, {"gamma", scalar_json(g)}, {"k", scalar_json(k)}};
    }
    case Op::compose: {
      auto [o, i] = f.children();
      return Json{{"op", "compose"}, {"outer", to_json(o)}, {"inner", to_json(i)}};
    }
    case Op::min: {
      auto [a, b] = f.children();
      return Json{{"op", "min"}, {"args", Json::array({to_json(a), to_json(b)})}};
    }
  }
  return Json();
}

BoundaryFn boundary_from_json(const Json& j) {
  const Json& op = field(j, "op");
  if (!op.is_string()) throw Error(Errc::parse, "'op' must be a string");
  std::string name = op.get<std::string>();
  if (name == "linear")
    return BoundaryFn::linear(rational_from_json(field(j, "a")), rational_from_json(field(j, "c")));
  if (name == "power")
    return BoundaryFn::power(rational_from_json(field(j, "gamma")),
                             rational_from_json(field(j, "k")));
  if (name == "compose")
    return BoundaryFn::compose(boundary_from_json(field(j, "outer")),
                               boundary_from_json(field(j, "inner")));
  if (name == "min") {
    const Json& args = field(j, "args");
    if (!args.is_array() || args.empty())
      throw Error(Errc::parse, "'min' needs a nonempty args array");
    BoundaryFn acc = boundary_from_json(args[0]);
    for (std::size_t i = 1; i < args.size(); ++i)
      acc = BoundaryFn::min(acc, boundary_from_json(args[i]));
    return acc;
  }
  throw Error(Errc::parse, "unknown boundary op '" + name + "'");
}

Json to_json(const DefSet& A) {
  switch (A.kind()) {
    case DefSet::Kind::boundary:
      return Json{{"kind", "boundary"}, {"boundary", to_json(A.boundary())}, {"S", scalar_json(A.S())}};
    case DefSet::Kind::closed_diagonal:
      return Json{{"kind", "closed_diagonal"}, {"S", scalar_json(A.S())}};
    case DefSet::Kind::extensional: break;
  }
  throw Error(Errc::unsupported_shape, "extensional sets have no JSON form");
}

DefSet defset_from_json(const Json& j) {
  // A bare boundary expression is accepted as shorthand for a boundary set.
  if (j.is_object() && j.contains("op")) return DefSet::from_boundary(boundary_from_json(j));
  const Json& kind = field(j, "kind");
  Rational S = j.contains("S") ? rational_from_json(j.at("S")) : Rational(1);
  if (kind == "boundary") return DefSet::from_boundary(boundary_from_json(field(j, "boundary")), S);
  if (kind == "closed_diagonal") return DefSet::closed_diagonal(S);
  if (kind == "open_diagonal") return DefSet::open_diagonal(S);
  throw Error(Errc::parse, "unknown set kind " + kind.dump());
}

PrismaState<Rational> rational_state_from_json(const Json& j) {
  PrismaState<Rational> st{rational_from_json(field(j, "t")), rational_from_json(field(j, "s")),
                           rational_from_json(field(j, "x")), std::nullopt};
  if (j.contains("alpha")) st.alpha = rational_from_json(j.at("alpha"));
  return st;
}

Json to_json(const LieTrace& trace) {
  Json rounds = Json::array();
  for (std::size_t n = 0; n < trace.rounds.size(); ++n) {
    const auto& r = trace.rounds[n];
    Json v = to_json(r.v.coefficient());
    rounds.push_back(Json{{"n", n},
                          {"f", to_json(r.f)},
                          {"b", to_json(r.b)},
                          {"b_order", r.b.is_zero() ? Json(nullptr) : Json(r.b.order())},
                          {"v", v},
                          {"v_order", r.v.order() == kInfiniteOrder ? Json(nullptr) : Json(r.v.order())},
                          {"substitution", to_json(r.substitution)}});
  }
  TruncSeries b = trace.final_remainder();
  return Json{{"a", to_json(trace.a)},
              {"rounds", rounds},
              {"final",
               Json{{"n", trace.rounds.size()},
                    {"f", to_json(trace.final_f)},
                    {"b", to_json(b)},
                    {"b_order", b.is_zero() ? Json(nullptr) : Json(b.order())}}}};
}

namespace {

Json condition_json(const Condition& c) {
  return Json{{"holds", c.holds}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.margin}};
}

}  // namespace

Json to_json(const Certificate& c) {
  return Json{{"t0", c.t0},         {"lambda", c.lambda}, {"mu", c.mu},
              {"r", c.r},           {"beta", c.beta},     {"n", c.n},
              {"s0", c.s0},         {"rho0", c.rho0},     {"C", c.C},
              {"R", c.R},           {"t_inf", c.t_inf},   {"passes", c.passes()},
              {"conditions",
               Json{{"i", condition_json(c.i)},
                    {"ii", condition_json(c.ii)},
                    {"iii", condition_json(c.iii)}}}};
}

Json to_json(const std::vector<CertifiedStep>& steps) {
  Json arr = Json::array();
  for (const auto& s : steps)
    arr.push_back(Json{{"n", s.n}, {"t", s.t}, {"s", s.s}, {"bound", s.bound}});
  return arr;
}

Json to_json(const OptResult& r) {
  Json j{{"lambda", r.lambda}, {"mu", r.mu}};
  if (r.r) j["r"] = *r.r;
  j["e_t_inf"] = r.value;
  j["t_inf"] = r.t_inf;
  j["iterations"] = r.iterations;
  j["grad_norm"] = r.grad_norm;
  return j;
}

Json to_json(const QRow& row) {
  return Json{{"n", row.n},   {"lambda", row.lambda},           {"mu", row.mu},
              {"Q", row.Q},   {"true_radius", row.true_radius}, {"t_inf", row.t_inf}};
}

}  // namespace kolmo
