#include <doctest.h>

#include "support.hpp"

using namespace finsler;
using namespace testing;

namespace {

RandersMetric constant_randers(double b1) {
  RandersMetric m{3, {}, {}};
  for (int i = 0; i < 3; ++i) {
    std::vector<Expr> row;
    for (int j = 0; j < 3; ++j) row.push_back(Expr::constant(i == j ? 1.0 : 0.0));
    m.a.push_back(row);
  }
  m.b = {Expr::constant(b1), Expr::constant(0.0), Expr::constant(0.0)};
  return m;
}

std::vector<double> values_of(const std::vector<Jet>& v) {
  std::vector<double> out;
  for (const auto& j : v) out.push_back(j.value());
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("euclidean F^2 is the sum of squares") {
  const std::vector<double> x = {0.2, -0.1, 0.3}, y = {0.7, 0.4, -1.1};
  const JetConfig cfg{3, 2, 4};
  const Jet F2 = eval_F2(zoo::euclidean(), x, y, cfg);
  const Seeds s = seed_point(x, y, cfg);
  const Jet u2 = s.y[0] * s.y[0] + s.y[1] * s.y[1] + s.y[2] * s.y[2];
  CHECK(coeff_diff(F2, u2) == 0.0);
}

TEST_CASE("funk metric against its closed form") {
  const MetricSpec spec = zoo::funk_ball3();
  const JetConfig cfg{3, 1, 2};
  const std::vector<double> o = {0.0, 0.0, 0.0}, e1 = {1.0, 0.0, 0.0};
  CHECK(eval_F2(spec, o, e1, cfg).value() == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> x = {0.1, 0.2, 0.0}, y = {1.0, 0.3, 0.2};
  const double F = funk_F(x, y);
  CHECK(rel(eval_F2(spec, x, y, cfg).value(), F * F) <= 1e-14);
  CHECK(rel(eval_F(spec, x, y, cfg).value(), F) <= 1e-14);
  const Jet Fj = eval_F(spec, x, y, cfg);
  CHECK(coeff_rel(Fj * Fj, eval_F2(spec, x, y, cfg)) <= 1e-13);
}

TEST_CASE("F^2 equals F squared coefficientwise on the zoo") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    const auto pts = points_for(spec, 2);
    const JetConfig cfg{metric_dim(spec), 2, 4};
    for (const auto& p : pts) {
      const Jet F = eval_F(spec, p.x, p.y, cfg);
      CHECK(coeff_rel(F * F, eval_F2(spec, p.x, p.y, cfg)) <= 1e-12);
    }
  }
}

TEST_CASE("validation") {
  const MetricSpec euc = zoo::euclidean();
  const auto pts = points_for(euc, 10, 3);
  CHECK(validate(euc, pts).all_ok());

  const MetricSpec bad = constant_randers(1.2);
  const ValidationReport r = validate(bad, points_for(zoo::euclidean(), 10, 3));
  CHECK_FALSE(r.all_ok());
  bool saw_not_finsler = false;
  for (const auto& p : r.points)
    if (p.status == PointStatus::not_finsler) {
      saw_not_finsler = true;
      CHECK_FALSE(p.failures.empty());
    }
  CHECK(saw_not_finsler);

  const MetricSpec good = constant_randers(0.4);
  CHECK(validate(good, points_for(zoo::euclidean(), 10, 3)).all_ok());

  // outside the ball is reported as a domain problem, not a convexity one
  const std::vector<double> far = {0.9, 0.9, 0.0}, y = {1.0, 0.0, 0.0};
  CHECK(validate_point(zoo::funk_ball3(), far, y).status == PointStatus::outside_domain);
  CHECK_THROWS_AS(check_domain(zoo::spherical_generic(), far), DomainError);
}

TEST_CASE("family42 default instance validates on a box of radii 0.1..0.5") {
  const MetricSpec spec = zoo::family42_default();
  SamplerConfig sc;
  sc.seed = 9;
  sc.count = 20;
  sc.x_box.assign(3, {0.06, 0.29});
  const auto s = sample_points(spec, sc);
  const ValidationReport r = validate(spec, s.points);
  CHECK(r.ok_count() == s.points.size());
  for (const auto& p : s.points) {
    double r2 = 0.0;
    for (double v : p.x) r2 += v * v;
    CHECK(std::sqrt(r2) >= 0.1);
    CHECK(std::sqrt(r2) <= 0.51);
  }
}

TEST_CASE("family42 parameter search prefers a fully valid instance") {
  const auto pts = points_for(zoo::euclidean(), 12, 21);
  const std::vector<double> s0 = {0.5, 1.0}, h = {0.5, 5.0}, f = {1.0};
  const auto res = search_family42(1.0, 1.0, 2.0, s0, h, f, pts);
  CHECK(res.candidates == 4u);
  CHECK(res.validated_fraction == doctest::Approx(1.0));
}

TEST_CASE("fundamental tensor") {
  const std::vector<double> x = {0.1, -0.2, 0.15}, y = {0.6, 0.5, -0.7};
  const JetConfig cfg{3, 1, 5};
  {
    const FundamentalTensor ft = fundamental_tensor(eval_F2(zoo::euclidean(), x, y, cfg));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Jet expect = Jet::constant(ft.g(i, j).config(), i == j ? 1.0 : 0.0);
        CHECK(coeff_diff(ft.g(i, j), expect) == 0.0);
      }
  }
  {
    const FundamentalTensor ft = fundamental_tensor(eval_F2(zoo::conformal_riemannian(), x, y, cfg));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) CHECK(coeff_max(ft.g(i, j).d_dy(k)) <= 1e-14);
  }
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    for (const auto& p : points_for(spec, 2)) {
      const Jet F2 = eval_F2(spec, p.x, p.y, cfg);
      const FundamentalTensor ft = fundamental_tensor(F2);
      const Seeds s = seed_point(p.x, p.y, cfg);
      Jet gyy = Jet::constant(ft.g(0, 0).config(), 0.0);
      for (int i = 0; i < 3; ++i) {
        Jet gy = Jet::constant(ft.g(0, 0).config(), 0.0);
        for (int j = 0; j < 3; ++j) {
          gy += ft.g(i, j) * s.y[static_cast<std::size_t>(j)];
          gyy += ft.g(i, j) * s.y[static_cast<std::size_t>(i)] * s.y[static_cast<std::size_t>(j)];
        }
        CHECK(coeff_rel(gy, F2.d_dy(i) * 0.5) <= 1e-11);
      }
      CHECK(coeff_rel(gyy, F2) <= 1e-11);
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
          Jet acc = Jet::constant(ft.g(0, 0).config(), i == k ? -1.0 : 0.0);
          for (int j = 0; j < 3; ++j) acc += ft.g(i, j) * ft.g_inv(j, k);
          CHECK(coeff_max(acc) <= 1e-11 * std::max(1.0, coeff_max(ft.g(i, i))));
        }
    }
  }
}

TEST_CASE("positive homogeneity of F") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    for (const auto& p : points_for(spec, 4)) {
      const double F = finsler_norm<double>(spec, p.x, p.y);
      for (double lam : {0.5, 2.0, 3.0}) {
        std::vector<double> ly = p.y;
        for (double& v : ly) v *= lam;
        CHECK(rel(finsler_norm<double>(spec, p.x, ly), lam * F) <= 1e-10);
      }
    }
  }
}

TEST_CASE("spray scalars of spherically symmetric metrics") {
  const JetConfig cfg = standard_config(3);
  {
    const std::vector<double> x = {0.1, 0.2, 0.3}, y = {0.3, -0.2, 0.5};
    const SpraySource s = metric_spray(zoo::euclidean(), x, y, cfg);
    const PQPair pq = extract_PQ(values_of(s.G), x, y);
    CHECK(pq.P == 0.0);
    CHECK(pq.Q == 0.0);
    CHECK(pq.residual == 0.0);
  }
  {
    // x orthogonal to y
    const std::vector<double> x = {0.3, 0.1, 0.0}, y = {-0.1, 0.3, 0.8};
    const SpraySource s = metric_spray(zoo::family42_default(), x, y, cfg);
    const PQPair pq = extract_PQ(values_of(s.G), x, y);
    CHECK(pq.relative_residual <= 1e-9);
  }
  {
    const std::vector<double> x = {0.1, 0.2, 0.0}, y = {1.0, 0.3, 0.2};
    const SpraySource s = metric_spray(zoo::funk_ball3(), x, y, cfg);
    CHECK(extract_PQ(values_of(s.G), x, y).relative_residual >= 1e-4);
  }
  const std::vector<double> x = {0.1, 0.2, 0.3}, par = {0.2, 0.4, 0.6}, G = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(extract_PQ(G, x, par), DegenerateError);
}

TEST_CASE("expression documents round-trip") {
  const nlohmann::json doc = nlohmann::json::parse(R"({"op": "add", "args": [
      {"op": "mul", "args": [0.3, "x1", "y2"]},
      {"op": "sqrt", "args": [{"op": "add", "args": [1, {"op": "mul", "args": ["s", "s"]}]}]},
      {"op": "pow", "args": [{"op": "add", "args": [1, "r"]}], "exponent": -1.5},
      {"op": "div", "args": ["v", "u"]},
      {"op": "neg", "args": [{"op": "sub", "args": ["x3", "y1"]}]}]})");
  const Expr e = parse_expr(doc);
  const Expr back = parse_expr(to_json(e));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> x(3), y(3);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng) + 1.0;
    CHECK(evaluate_scalar(e, x, y) == evaluate_scalar(back, x, y));
  }
  CHECK_THROWS_AS(parse_expr(nlohmann::json::parse(R"({"op": "exp", "args": [1]})")), ConfigError);
  CHECK_THROWS_AS(parse_expr(nlohmann::json::parse(R"("z9")")), ConfigError);
}

TEST_CASE("metric documents") {
  const auto spec = parse_metric(nlohmann::json::parse(
      R"({"family": "sph_sym_family42", "lambda": 3, "a": 2, "b": 0.5, "h": {"op": "mul", "args": [0.1, "r"]}})"));
  const auto& m = std::get<Family42Metric>(spec);
  CHECK(m.lambda == 3.0);
  CHECK(m.a == 2.0);
  CHECK(parse_metric(to_json(spec)) .index() == spec.index());
  CHECK(family_name(parse_metric(to_json(spec))) == "sph_sym_family42");
  CHECK_THROWS_AS(parse_metric(nlohmann::json::parse(R"({"family": "kropina"})")), ConfigError);
  CHECK_THROWS_AS(parse_metric(nlohmann::json::parse(R"({"family": "funk_ball3", "dim": 4})")), ConfigError);
  CHECK_THROWS_AS(parse_metric(nlohmann::json::parse(R"({"family": "euclidean", "dim": 7})")), Error);
  // h may only depend on r
  CHECK_THROWS_AS(parse_metric(nlohmann::json::parse(R"({"family": "sph_sym_family42", "h": "y1"})")),
                  ConfigError);
}

}  // TEST_SUITE
