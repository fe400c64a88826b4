#include <doctest.h>

#include "generators.hpp"
#include "kolmo/error.hpp"
#include "kolmo/json_io.hpp"

using namespace kolmo;
using kolmo::testing::Gen;

namespace {

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

Json reparse(const Json& j) { return Json::parse(j.dump()); }

}  // namespace

TEST_SUITE("json_io") {
  TEST_CASE("series layout") {
    Json j = to_json(TruncSeries(std::vector<Rational>{0, q(-1, 2), 3}));
    CHECK(j.dump() == R"({"trunc_order":2,"coeffs":["0","-1/2","3"]})");
  }

  TEST_CASE("series round trip") {
    Gen gen(701);
    for (int trial = 0; trial < 50; ++trial) {
      TruncSeries f = gen.series(gen.integer(0, 12), 0, 1000000, 999983);
      TruncSeries g = series_from_json(reparse(to_json(f)));
      CHECK(g.trunc_order() == f.trunc_order());
      CHECK(g == f);
    }
    Rational huge = pow_int(q(7, 3), 90);
    TruncSeries h(std::vector<Rational>{huge, -huge});
    CHECK(series_from_json(reparse(to_json(h))) == h);
  }

  TEST_CASE("series parsing errors") {
    CHECK_THROWS_AS(series_from_json(Json::parse(R"({"coeffs":["1"]})")), Error);
    CHECK_THROWS_AS(series_from_json(Json::parse(R"({"trunc_order":2,"coeffs":["1"]})")), Error);
    CHECK_THROWS_AS(series_from_json(Json::parse(R"({"trunc_order":-1,"coeffs":[]})")), Error);
    CHECK_THROWS_AS(series_from_json(Json::parse(R"({"trunc_order":0,"coeffs":["1/0"]})")), Error);
    CHECK_THROWS_AS(series_from_json(Json::parse(R"({"trunc_order":0,"coeffs":[true]})")), Error);
    // Integers and decimals are accepted where fractions are expected.
    TruncSeries f = series_from_json(Json::parse(R"({"trunc_order":1,"coeffs":[2, 0.5]})"));
    CHECK(f[0] == 2);
    CHECK(f[1] == q(1, 2));
  }

  TEST_CASE("bounds") {
    LocalOpBound b{2.5, 1, 3};
    LocalOpBound c = bound_from_json(reparse(to_json(b)));
    CHECK(c.C == b.C);
    CHECK(c.k == b.k);
    CHECK(c.l == b.l);
    CHECK_THROWS_AS(bound_from_json(Json::parse(R"({"C":"x","k":0,"l":1})")), Error);
  }

  TEST_CASE("boundary trees and sets") {
    BoundaryFn f = BoundaryFn::min(
        BoundaryFn::compose(BoundaryFn::power(q(3, 2), q(1, 3)), BoundaryFn::linear(q(1, 2), q(-1, 7))),
        BoundaryFn::identity());
    CHECK(boundary_from_json(reparse(to_json(f))) == f);
    Json three = Json::parse(
        R"({"op":"min","args":[{"op":"linear","a":"1","c":"0"},{"op":"linear","a":"1/2","c":"0"},{"op":"power","gamma":1,"k":"1/2"}]})");
    BoundaryFn m = boundary_from_json(three);
    CHECK(m(0.25) == doctest::Approx(0.125));
    CHECK_THROWS_AS(boundary_from_json(Json::parse(R"({"op":"exp"})")), Error);
    CHECK_THROWS_AS(boundary_from_json(Json::parse(R"({"op":"min","args":[]})")), Error);

    for (const DefSet& A : {DefSet::cone(q(5, 2), 3), DefSet::closed_diagonal(q(1, 2)),
                            DefSet::from_boundary(f)})
      CHECK(defset_from_json(reparse(to_json(A))) == A);
    CHECK(defset_from_json(Json::parse(R"({"op":"linear","a":"1/2","c":0})")) == DefSet::cone(2));
    CHECK(defset_from_json(Json::parse(R"({"kind":"open_diagonal"})")) == DefSet::open_diagonal());
    CHECK_THROWS_AS(to_json(DefSet::extensional([](double, double) { return true; })), Error);
    CHECK_THROWS_AS(defset_from_json(Json::parse(R"({"kind":"blob"})")), Error);
  }

  TEST_CASE("prisma states") {
    PrismaState<Rational> st{q(1), q(1, 2), q(-3, 1000), q(1, 9)};
    Json j = to_json(st);
    CHECK(j.dump() == R"({"t":"1","s":"1/2","x":"-3/1000","alpha":"1/9"})");
    PrismaState<Rational> back = rational_state_from_json(reparse(j));
    CHECK(back.t == st.t);
    CHECK(back.s == st.s);
    CHECK(back.x == st.x);
    CHECK(back.alpha == st.alpha);
    Json d = to_json(PrismaState<double>{1.0, 0.5, 0.1, std::nullopt});
    CHECK(d.dump() == R"({"t":1.0,"s":0.5,"x":0.1})");
  }

  TEST_CASE("trace documents") {
    MorseInstance m = morse_instance(1, 3, 18);
    Json j = to_json(lie_iterate_formal(m.a, m.b0, 4));
    REQUIRE(j["rounds"].size() == 4);
    CHECK(j["rounds"][0]["b_order"] == 3);
    CHECK(j["rounds"][3]["v_order"] == 9);
    CHECK(j["final"]["f"]["coeffs"][18] == "-295245/16");
    CHECK(j["final"]["b_order"] == 18);
    TruncSeries f4 = series_from_json(reparse(j)["final"]["f"]);
    CHECK(f4[18] == q(-295245, 16));
  }

  TEST_CASE("floating documents re-parse to identical values") {
    Certificate c = certify(0.004, 0.25, 0.5, 0.5, 1.0, 3);
    Json cj = to_json(c);
    Json back = reparse(cj);
    CHECK(back == cj);
    CHECK(back["t_inf"].get<double>() == c.t_inf);
    CHECK(back["conditions"]["ii"]["rhs"].get<double>() == c.ii.rhs);

    Json sj = to_json(lie_iterate_certified(c, 5));
    CHECK(reparse(sj) == sj);
    CHECK(reparse(sj)[5]["bound"].get<double>() == lie_iterate_certified(c, 5)[5].bound);

    OptResult r = maximize_basic();
    Json oj = to_json(r);
    CHECK(oj.contains("e_t_inf"));
    CHECK_FALSE(oj.contains("r"));
    CHECK(reparse(oj)["lambda"].get<double>() == r.lambda);
    CHECK(reparse(oj).dump() == oj.dump());
  }
}
