#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kolmo/defsets.hpp"
#include "kolmo/disc_norms.hpp"
#include "kolmo/normalform.hpp"
#include "kolmo/paramopt.hpp"
#include "kolmo/power_series.hpp"
#include "kolmo/prisma.hpp"

namespace kolmo {

using Json = nlohmann::ordered_json;

/// {"trunc_order": N, "coeffs": ["num/den", ...]}
Json to_json(const TruncSeries& f);
TruncSeries series_from_json(const Json& j);

/// {"C": .., "k": .., "l": ..}
Json to_json(const LocalOpBound& b);
LocalOpBound bound_from_json(const Json& j);

/// {"op":"linear","a":"p/q","c":"p/q"}, {"op":"power","gamma":..,"k":..},
/// {"op":"compose","outer":..,"inner":..}, {"op":"min","args":[..]}.
/// Rational fields also accept JSON numbers and decimal strings.
Json to_json(const BoundaryFn& f);
BoundaryFn boundary_from_json(const Json& j);

/// {"kind":"boundary","boundary":..,"S":"p/q"} or {"kind":"closed_diagonal","S":..}.
Json to_json(const DefSet& A);
DefSet defset_from_json(const Json& j);

Json scalar_json(const Rational& q);
Json scalar_json(double x);
Rational rational_from_json(const Json& j);

template <class T>
Json to_json(const PrismaState<T>& st) {
  Json j{{"t", scalar_json(st.t)}, {"s", scalar_json(st.s)}, {"x", scalar_json(st.x)}};
  if (st.alpha) j["alpha"] = scalar_json(*st.alpha);
  return j;
}

template <class T>
Json to_json(const std::vector<PrismaState<T>>& traj) {
  Json arr = Json::array();
  for (const auto& st : traj) arr.push_back(to_json(st));
  return arr;
}

PrismaState<Rational> rational_state_from_json(const Json& j);

Json to_json(const LieTrace& trace);
Json to_json(const Certificate& c);
Json to_json(const std::vector<CertifiedStep>& steps);
Json to_json(const OptResult& r);
Json to_json(const QRow& row);

}  // namespace kolmo
