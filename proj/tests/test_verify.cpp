#include <doctest.h>

#include "finsler/verify.hpp"
#include "support.hpp"

using namespace finsler;
using namespace testing;

namespace {

CheckReport run(const std::string& name, const MetricSpec& spec, int count, std::uint64_t seed = 42) {
  return run_check(name, spec, points_for(spec, count, seed), Tolerances{});
}

double max_measure(const CheckReport& r, const std::string& measure) {
  double m = 0.0;
  for (const auto& p : r.points)
    for (const auto& ms : p.measures)
      if (ms.name == measure) m = std::max(m, ms.residual.rel);
  return m;
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("measure status") {
  const Measure small{"a", make_residual(1e-10, 1.0), 1e-7};
  const Measure big{"b", make_residual(1e-3, 1.0), 1e-7};
  const Measure tiny{"c", make_residual(0.0, 1e-15), 1e-7};
  CHECK(measure_status({small}) == CheckStatus::pass);
  CHECK(measure_status({small, big}) == CheckStatus::fail);
  CHECK(measure_status({tiny}) == CheckStatus::inconclusive);
  CHECK(make_residual(1.0, 0.0).rel == doctest::Approx(1e5));
}

TEST_CASE("check names") {
  for (const auto& n : check_names()) CHECK(is_check_name(n));
  CHECK_FALSE(is_check_name("thm99"));
  CHECK_THROWS_AS(run("thm99", zoo::funk_ball3(), 1), ConfigError);
}

TEST_CASE("Weyl-Douglas identity on the zoo") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    const CheckReport r = run("thm13", spec, 4, 7);
    if (name == "euclidean" || name == "constant_riemannian") {
      CHECK(r.status == CheckStatus::inconclusive);
      continue;
    }
    CHECK(r.status != CheckStatus::fail);
    CHECK(r.max_rel <= 1e-7);
  }
}

TEST_CASE("theta is symmetric in its first two slots") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    const CheckReport r = run("theta-symmetry", spec, 3, 8);
    CHECK(r.status != CheckStatus::fail);
    CHECK(r.max_rel <= 1e-10);
  }
}

TEST_CASE("Douglas tensor two ways") {
  for (const MetricSpec& spec : std::vector<MetricSpec>{zoo::funk_ball3(), zoo::randers_generic(), zoo::family42_default()}) {
    const CheckReport r = run("douglas-forms", spec, 3);
    CHECK(r.max_rel <= 1e-10);
  }
}

TEST_CASE("Ricci identities") {
  for (const MetricSpec& spec : std::vector<MetricSpec>{zoo::funk_ball3(), zoo::randers_generic(), zoo::spherical_generic()}) {
    const CheckReport r = run("ricci", spec, 3);
    CHECK(r.status == CheckStatus::pass);
    CHECK(r.max_rel <= 1e-8);
  }
}

TEST_CASE("spherically symmetric Weyl decomposition") {
  for (const MetricSpec& spec :
       std::vector<MetricSpec>{zoo::family42_default(), zoo::spherical_generic(), zoo::spherical_quadratic()}) {
    const CheckReport r = run("sph-decomp", spec, 5);
    CHECK(r.status != CheckStatus::fail);
    CHECK(max_measure(r, "sph-fit") <= 1e-9);
    CHECK(max_measure(r, "omega3-relation") <= 1e-8);
    CHECK(max_measure(r, "omega5-relation") <= 1e-8);
    CHECK(max_measure(r, "wjipl") <= 1e-8);
  }
  CHECK_THROWS_AS(run("sph-decomp", zoo::funk_ball3(), 1), ConfigError);
  // x parallel to y leaves the basis degenerate
  const std::vector<double> x = {0.1, 0.2, 0.3}, y = {0.2, 0.4, 0.6};
  CHECK_THROWS_AS(decompose_spherical_weyl(zoo::family42_default(), x, y), DegenerateError);
}

TEST_CASE("decomposition scalars against the spray scalars") {
  // u = |y|, s = <x, y>/u; the omegas are 0-homogeneous in y
  const MetricSpec spec = zoo::spherical_generic();
  for (const auto& p : points_for(spec, 3, 19)) {
    const SphericalDecomposition a = decompose_spherical_weyl(spec, p.x, p.y);
    std::vector<double> y3 = p.y;
    for (double& v : y3) v *= 3.0;
    const SphericalDecomposition b = decompose_spherical_weyl(spec, p.x, y3);
    double r2 = 0.0, xy = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      r2 += p.x[i] * p.x[i];
      xy += p.x[i] * p.y[i];
      yy += p.y[i] * p.y[i];
    }
    CHECK(a.r == doctest::Approx(std::sqrt(r2)).epsilon(1e-14));
    CHECK(a.u == doctest::Approx(std::sqrt(yy)).epsilon(1e-14));
    CHECK(a.s == doctest::Approx(xy / std::sqrt(yy)).epsilon(1e-13));
    double scale = 0.0;
    for (double w : a.omega) scale = std::max(scale, std::abs(w));
    for (int k = 0; k < 5; ++k) CHECK(std::abs(a.omega[k] - b.omega[k]) <= 1e-9 * std::max(scale, 1e-12));
  }
}

TEST_CASE("index pairings of the closed-form Weyl formula") {
  const CheckReport r = run("example42", zoo::family42_default(), 6);
  CHECK(r.status == CheckStatus::pass);
  CHECK(r.summary.at("matching_pairings") == 1.0);
  CHECK(r.summary.at("matches_free_j") == 1.0);
  CHECK(max_measure(r, "h-independence") <= 1e-8);

  const CheckReport r1 = run("example42", zoo::family42(1.0), 4);
  CHECK(r1.status == CheckStatus::pass);
  CHECK(r1.summary.at("matching_pairings") == 3.0);
  CHECK_THROWS_AS(run("example42", zoo::funk_ball3(), 1), ConfigError);
}

TEST_CASE("Weyl tensor does not depend on h") {
  // independent of the harness: two different h, compared directly
  Family42Metric m = zoo::family42_default();
  Family42Metric m2 = m;
  m2.h = Expr::constant(0.7) * Expr::symbol("r") + Expr::pow(Expr::symbol("r"), 3.0);
  for (const auto& p : points_for(MetricSpec(m), 3, 5)) {
    const CurvatureBundle a = build_bundle(MetricSpec(m), p.x, p.y, Depth::curvature);
    const CurvatureBundle b = build_bundle(MetricSpec(m2), p.x, p.y, Depth::curvature);
    double d = 0.0, s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        d = std::max(d, std::abs(a.weyl.W(i, k).value() - b.weyl.W(i, k).value()));
        s = std::max(s, std::abs(a.weyl.W(i, k).value()));
      }
    CHECK(s > 1e-6);
    CHECK(d <= 1e-8 * s);
    // the spray itself does change
    CHECK(std::abs(a.conn.G[0].value() - b.conn.G[0].value()) > 1e-6);
  }
}

TEST_CASE("quadratic Weyl formula") {
  const auto& m = zoo::family42_default();
  const CheckReport r = run("thm15", MetricSpec(m), 5);
  CHECK(r.status == CheckStatus::pass);
  CHECK(max_measure(r, "thm15-formula") <= 1e-6);
  for (const auto& p : r.points) {
    // omega2 against the family's prefactor
    double r2 = 0.0;
    for (double v : p.x) r2 += v * v;
    const double c = 4.0 * m.lambda * (m.lambda - 1.0) * m.b * m.b / std::pow(m.a + m.b * r2, 2);
    CHECK(std::abs(p.values.at("omega2")) == doctest::Approx(std::abs(c)).epsilon(1e-6));
  }
  const CheckReport g = run("thm15", zoo::spherical_generic(), 3);
  CHECK(g.status == CheckStatus::hypothesis_not_met);
  CHECK_FALSE(g.notes.empty());
}

TEST_CASE("generalized Sakaguchi identity") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    const CheckReport r = run("gsakaguchi", spec, 3, 23);
    if (r.status == CheckStatus::hypothesis_not_met) continue;
    CHECK(r.status != CheckStatus::fail);
    CHECK(r.max_rel <= 1e-7);
  }
  CHECK(run("gsakaguchi", zoo::family42_default(), 3).status == CheckStatus::pass);
}

TEST_CASE("second covariant derivative of the Douglas tensor") {
  for (const MetricSpec& spec : std::vector<MetricSpec>{zoo::funk_ball3(), zoo::family42_default()}) {
    const CheckReport r = run("prop53", spec, 3);
    CHECK(r.status == CheckStatus::pass);
    CHECK(r.max_rel <= 1e-6);
  }
}

TEST_CASE("points outside the domain are reported, not thrown") {
  std::vector<SamplePoint> pts = points_for(zoo::funk_ball3(), 2);
  pts.push_back(SamplePoint{{0.9, 0.9, 0.0}, {1.0, 0.0, 0.0}});
  const CheckReport r = run_check("thm13", zoo::funk_ball3(), pts, Tolerances{});
  CHECK(r.status == CheckStatus::fail);
  CHECK_FALSE(r.points.back().error.empty());
  CHECK(r.points.back().index == 2);
}

}  // TEST_SUITE
