#include "accretive/errors.hpp"
#include "accretive/io.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace accretive;
using io::Json;

TEST_CASE("number formatting and key order") {
  Json j = Json::object();
  j["zeta"] = 0.1;
  j["alpha"] = std::numbers::pi;
  j["n"] = 3;
  j["bad"] = std::numeric_limits<double>::infinity();
  CHECK(io::dump(j, -1) == R"({"zeta":0.10000000000000001,"alpha":3.1415926535897931,"n":3,"bad":null})");
  CHECK(io::dump(Json::array(), 2) == "[]");
  CHECK(io::dump(Json::object(), 2) == "{}");
  CHECK(io::dump(Json{{"a", Json::array({1, 2})}}, 2) == "{\n  \"a\": [\n    1,\n    2\n  ]\n}");
  // every double survives a text round trip
  Rng rng(60);
  std::normal_distribution<double> nd(0.0, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double x = nd(rng);
    CHECK(Json::parse(io::dump(Json(x))).get<double>() == x);
  }
}

TEST_CASE("ExpPoly JSON") {
  const ExpPoly f = ExpPoly::monomial(-1.0, 2, 3.0) + ExpPoly::constant(0.5);
  const Json j = io::to_json(f);
  REQUIRE(j.is_array());
  CHECK(io::dump(j, -1) == R"([{"rate":-1,"coeffs":[0,0,3]},{"rate":0,"coeffs":[0.5]}])");
  CHECK(io::exppoly_from_json(j) == f);
  CHECK(io::exppoly_from_json(Json(2.5)) == ExpPoly::constant(2.5));
  CHECK(io::exppoly_from_json(Json::array()).is_zero());

  // terms expanded about another centre are written as monomials in t
  const ExpPoly g(std::vector<Term>{Term{2.0, {1.0, -2.0, 0.5}, 1.0}});
  const ExpPoly back = io::exppoly_from_json(io::to_json(g));
  CHECK(back.terms()[0].centre == 0.0);
  for (double t : {0.0, 0.3, 1.0}) CHECK(back(t) == doctest::Approx(g(t)).epsilon(1e-14));

  Rng rng(61);
  const Interval I(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const ExpPoly h = oracle::random_exppoly(rng, 4);
    CHECK(io::exppoly_from_json(Json::parse(io::dump(io::to_json(h)))) == h);
  }

  CHECK_THROWS_AS(io::exppoly_from_json(Json::parse(R"({"terms": []})")), SchemaError);
  CHECK_THROWS_AS(io::exppoly_from_json(Json::parse(R"([{"rate": 1}])")), SchemaError);
  CHECK_THROWS_AS(io::exppoly_from_json(Json::parse(R"([{"rate": 1, "coeffs": [1], "extra": 0}])")), SchemaError);
  CHECK_THROWS_AS(io::exppoly_from_json(Json::parse(R"([{"rate": "x", "coeffs": [1]}])")), SchemaError);
  CHECK_THROWS_AS(io::exppoly_from_json(Json::parse(R"([{"rate": 0, "coeffs": [1, "2"]}])")), SchemaError);
  Json huge = Json::array({Json{{"rate", 0.0}, {"coeffs", std::vector<double>(200, 1.0)}}});
  CHECK_THROWS_AS(io::exppoly_from_json(huge), SchemaError);
}

TEST_CASE("interval and matrix JSON") {
  const Interval I = io::interval_from_json(Json::parse(R"({"a": -1, "b": 2})"));
  CHECK(I.a() == -1.0);
  CHECK(I.b() == 2.0);
  CHECK(io::dump(io::to_json(I), -1) == R"({"a":-1,"b":2})");
  CHECK_THROWS_AS(io::interval_from_json(Json::parse(R"({"a": 1, "b": 1})")), SchemaError);
  CHECK_THROWS_AS(io::interval_from_json(Json::parse(R"({"a": 0})")), SchemaError);
  CHECK_THROWS_AS(io::interval_from_json(Json::parse(R"({"a": 0, "b": 1, "c": 2})")), SchemaError);

  const Mat M = io::matrix_from_json(Json::parse("[[1, 2], [3, 4]]"), 2, 2);
  CHECK(M(0, 1) == 2.0);
  CHECK(M(1, 0) == 3.0);
  CHECK(io::dump(io::to_json(M), -1) == "[[1,2],[3,4]]");
  CHECK(io::matrix_from_json(io::to_json(M)) == M);
  CHECK_THROWS_AS(io::matrix_from_json(Json::parse("[[1, 2], [3]]")), SchemaError);
  CHECK_THROWS_AS(io::matrix_from_json(Json::parse("[[1, 2]]"), 2, 2), SchemaError);
  CHECK_THROWS_AS(io::matrix_from_json(Json::parse("[]")), SchemaError);
  CHECK_THROWS_AS(io::matrix_from_json(Json::parse("[[true]]")), SchemaError);
}

TEST_CASE("boundary function JSON") {
  const auto lin = io::boundary_function_from_json(Json::parse(R"({"kind": "linear", "slope": 2, "offset": 1})"));
  CHECK(lin(3.0) == 7.0);
  CHECK(lin.lipschitz_cert == 2.0);
  const auto sn = io::boundary_function_from_json(Json::parse(R"({"kind": "scaledsin", "amplitude": -1.5})"));
  CHECK(sn(0.5) == doctest::Approx(-1.5 * std::sin(0.5)));
  CHECK(sn.lipschitz_cert == 1.5);
  const auto tab = io::boundary_function_from_json(Json::parse(R"({"kind": "table", "knots": [0, 1, 2], "values": [0, 2, 1]})"));
  CHECK(tab(0.5) == doctest::Approx(1.0));
  CHECK(tab(1.5) == doctest::Approx(1.5));
  CHECK(tab(5.0) == doctest::Approx(1.0));
  CHECK(tab.lipschitz_cert == doctest::Approx(2.0));
  const auto cert = io::boundary_function_from_json(Json::parse(R"({"kind": "linear", "slope": 1, "lipschitz_cert": 2.5})"));
  CHECK(cert.lipschitz_cert == 2.5);

  for (const char* bad : {R"({"kind": "cubic"})", R"({"slope": 1})", R"({"kind": "linear"})",
                          R"({"kind": "linear", "slope": 1, "amplitude": 2})",
                          R"({"kind": "table", "knots": [1, 0], "values": [0, 1]})",
                          R"({"kind": "table", "knots": [0, 1], "values": [0]})",
                          R"({"kind": "linear", "slope": 1, "lipschitz_cert": -1})"}) {
    CHECK_THROWS_AS(io::boundary_function_from_json(Json::parse(bad)), SchemaError);
  }
}

TEST_CASE("scalar realisation JSON") {
  const auto R = io::scalar_realization_from_json(
      Json::parse(R"({"interval": {"a": 0, "b": 1}, "g": {"kind": "linear", "slope": 2.72}})"));
  CHECK_FALSE(R.admissible());
  const auto Rc = io::scalar_realization_from_json(Json::parse(R"({"g": {"kind": "scaledsin", "amplitude": 1}})"));
  CHECK(Rc.admissible());
  CHECK(Rc.context().b() == 1.0);
  const auto over = io::scalar_realization_from_json(
      Json::parse(R"({"g": {"kind": "scaledsin", "amplitude": 1}, "lipschitz_cert": 3})"));
  CHECK_FALSE(over.admissible());
  CHECK_THROWS_AS(io::scalar_realization_from_json(Json::parse(R"({"interval": {"a": 0, "b": 1}})")), SchemaError);
  CHECK_THROWS_AS(io::scalar_realization_from_json(Json::parse(R"({"g": {"kind": "linear", "slope": 0}, "h": 1})")),
                  SchemaError);
}

TEST_CASE("block state, norm and realisation JSON") {
  const derivative::Context ctx(0.0, 1.0);
  const blockop::BlockState s{ExpPoly::exponential(1.0), ExpPoly::constant(2.0)};
  const blockop::BlockState back = io::block_state_from_json(io::to_json(s));
  CHECK(back.u == s.u);
  CHECK(back.v == s.v);
  CHECK_THROWS_AS(io::block_state_from_json(Json::parse(R"({"u": 1})")), SchemaError);

  CHECK(io::norm_from_json(Json("l1"), 2).kind == NormDescriptor::Kind::L1);
  CHECK(io::norm_from_json(Json("linf"), 2).kind == NormDescriptor::Kind::LInf);
  CHECK(io::norm_from_json(Json::parse(R"({"gram": [[2, 0], [0, 1]]})"), 2).kind == NormDescriptor::Kind::Gram);
  CHECK_THROWS_AS(io::norm_from_json(Json("l3"), 2), SchemaError);
  CHECK_THROWS_AS(io::norm_from_json(Json::parse(R"({"gram": [[1]]})"), 2), SchemaError);

  const auto f = io::realization_from_json(ctx, Json::parse(R"({"kind": "f", "matrix": [[0.5, 0], [0, 0.5]]})"));
  CHECK(f.m_accretive());
  CHECK(f.relation());
  const auto sn = io::realization_from_json(ctx, Json::parse(R"({"kind": "f", "map": {"type": "sin", "amplitude": 0.9}})"));
  CHECK(sn.m_accretive());
  CHECK_FALSE(sn.relation());
  const auto M = io::realization_from_json(ctx, Json::parse(R"({"kind": "M", "matrix": [[1, 0], [0, 1], [1, 0], [0, 1]]})"));
  CHECK(M.m_accretive());
  const auto st = io::realization_from_json(ctx, Json::parse(R"({"kind": "ST", "S": [[1, 0], [0, 1]], "T": [[0, 0], [0, 0]]})"));
  CHECK(st.m_accretive());
  // Dirichlet data u_BD = 0 belongs to (S, T) = (I, 0)
  CHECK(st.contains({ExpPoly::monomial(0.0, 1) - ExpPoly::monomial(0.0, 2), ExpPoly::exponential(1.0)}));

  for (const char* bad : {R"({"kind": "Q"})", R"({"kind": "f"})", R"({"kind": "f", "matrix": [[2, 0], [0, 2]]})",
                          R"({"kind": "f", "matrix": [[0.5, 0], [0, 0.5]], "map": {"type": "sin", "amplitude": 1}})",
                          R"({"kind": "f", "map": {"type": "cos", "amplitude": 1}})",
                          R"({"kind": "M", "matrix": [[1, 0], [0, 1]]})",
                          R"({"kind": "ST", "S": [[1, 0], [0, 1]]})",
                          R"({"kind": "ST", "S": [[1, 0]], "T": [[1, 0], [0, 1]]})"}) {
    INFO(bad);
    CHECK_THROWS_AS(io::realization_from_json(ctx, Json::parse(bad)), SchemaError);
  }
}
