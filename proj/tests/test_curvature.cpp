#include <doctest.h>

#include "finsler/verify.hpp"
#include "support.hpp"

using namespace finsler;
using namespace testing;

namespace {

double coeff_norm(const JetTensor& t) {
  double m = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) m = std::max(m, coeff_max(t.flat(k)));
  return m;
}

double coeff_tensor_diff(const JetTensor& a, const JetTensor& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, coeff_diff(a.flat(k), b.flat(k)));
  return m;
}

// Permutes the lower slots (0, 2, 3) of a rank-4 tensor T_j^i_kl.
JetTensor permute_lower(const JetTensor& t, int p0, int p2, int p3) {
  return make_tensor(t.dim(), t.variance(), [&](std::span<const int> i) {
    const int src[] = {i[static_cast<std::size_t>(p0)], i[1], i[static_cast<std::size_t>(p2)],
                       i[static_cast<std::size_t>(p3)]};
    return t.at(src);
  });
}

JetTensor swap_last(const JetTensor& t) {
  return make_tensor(t.dim(), t.variance(), [&](std::span<const int> i) {
    std::vector<int> s(i.begin(), i.end());
    std::swap(s[s.size() - 1], s[s.size() - 2]);
    return t.at(s);
  });
}

// Coefficient-level size of the products that make up R; vanishing
// tensors are measured against this rather than their own norm.
double riemann_scale(const CurvatureBundle& b) {
  double g = 0.0;
  for (const auto& G : b.conn.G) g = std::max(g, coeff_max(G));
  const double n = coeff_norm(b.conn.N);
  return std::max({coeff_norm(b.riemann.Rik), n * n, g * coeff_norm(b.conn.Gamma), 1e-14});
}

std::vector<CurvatureBundle> bundles(const MetricSpec& spec, int count, Depth depth) {
  std::vector<CurvatureBundle> out;
  for (const auto& p : points_for(spec, count, 17)) out.push_back(build_bundle(spec, p.x, p.y, depth));
  return out;
}

}  // namespace

TEST_SUITE("curvature") {

TEST_CASE("flat sprays") {
  const std::vector<double> x = {0.1, -0.3, 0.2}, y = {0.5, 0.4, -0.6};
  const CurvatureBundle b = build_bundle(zoo::euclidean(), x, y, Depth::flow);
  for (const auto& G : b.conn.G) CHECK(coeff_max(G) <= 1e-14);
  CHECK(coeff_norm(b.riemann.Rik) <= 1e-14);
  CHECK(coeff_norm(b.berwald.B) <= 1e-14);
  CHECK(coeff_norm(b.D) <= 1e-14);
  CHECK(coeff_norm(b.weyl.W) <= 1e-14);
  CHECK(coeff_norm(b.weyl.Wt) <= 1e-14);
}

TEST_CASE("conformal spray matches the Christoffel oracle") {
  const MetricSpec spec = zoo::conformal_riemannian(0.3);
  for (const auto& p : points_for(spec, 5)) {
    const SpraySource s = metric_spray(spec, p.x, p.y, standard_config(3));
    const auto G = conformal_spray(0.3, p.x, p.y);
    for (int i = 0; i < 3; ++i) CHECK(rel(s.G[static_cast<std::size_t>(i)].value(), G[static_cast<std::size_t>(i)], 1e-12) <= 1e-12);
  }
}

TEST_CASE("riemannian sprays are quadratic") {
  for (const MetricSpec& spec : {zoo::constant_riemannian(), zoo::conformal_riemannian()}) {
    for (const auto& b : bundles(spec, 2, Depth::flow)) {
      const double scale = std::max(1.0, coeff_norm(b.conn.N));
      CHECK(coeff_norm(b.berwald.B) <= 1e-12 * scale);
      CHECK(coeff_norm(b.berwald.E) <= 1e-12 * scale);
      CHECK(coeff_norm(b.berwald.H) <= 1e-12 * scale);
      CHECK(coeff_norm(b.D) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("Riemann family identities") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    for (const auto& b : bundles(spec, 2, Depth::curvature)) {
      const auto& y = b.conn.y;
      const double R = riemann_scale(b);
      CHECK(coeff_norm(contract_y(b.riemann.Rik, 1, y)) <= 1e-11 * R);
      CHECK(coeff_tensor_diff(contract_y(b.riemann.Rikl, 2, y), b.riemann.Rik) <= 1e-10 * R);
      CHECK(coeff_tensor_diff(swap_last(b.riemann.Rikl), b.riemann.Rikl * -1.0) <= 1e-12 * R);
      CHECK(coeff_tensor_diff(swap_last(b.riemann.Rjikl), b.riemann.Rjikl * -1.0) <= 1e-12 * R);
    }
  }
}

TEST_CASE("Berwald and Douglas symmetries") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    for (const auto& b : bundles(spec, 2, Depth::curvature)) {
      const auto& y = b.conn.y;
      const double bs = std::max(coeff_norm(b.berwald.B), 1e-14);
      for (const JetTensor* t : {&b.berwald.B, &b.D}) {
        const double s = std::max(coeff_norm(*t), bs);
        CHECK(coeff_tensor_diff(permute_lower(*t, 2, 0, 3), *t) <= 1e-12 * s);
        CHECK(coeff_tensor_diff(permute_lower(*t, 3, 2, 0), *t) <= 1e-12 * s);
        CHECK(coeff_tensor_diff(permute_lower(*t, 0, 3, 2), *t) <= 1e-12 * s);
        CHECK(coeff_norm(contract_y(*t, 0, y)) <= 1e-11 * s);
      }
      for (int j = 0; j < b.dim; ++j)
        for (int k = 0; k < b.dim; ++k) {
          Jet tr = b.D(j, 0, k, 0);
          for (int m = 1; m < b.dim; ++m) tr += b.D(j, m, k, m);
          CHECK(coeff_max(tr) <= 1e-11 * bs);
        }
      if (b.has_weyl) {
        CHECK(coeff_tensor_diff(swap_last(b.weyl.Wjikl), b.weyl.Wjikl * -1.0) <= 1e-12 * riemann_scale(b));
      }
    }
  }
}

TEST_CASE("Euler homogeneity degrees") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    for (const auto& b : bundles(spec, 2, Depth::curvature)) {
      const auto& y = b.conn.y;
      const JetTensor G = make_tensor(b.dim, {Variance::up}, [&](std::span<const int> i) {
        return b.conn.G[static_cast<std::size_t>(i[0])];
      });
      CHECK(euler_defect(G, y, 2.0) <= 1e-10);
      CHECK(euler_defect(b.conn.N, y, 1.0) <= 1e-10);
      // R, W and W~ vanish on several zoo metrics; measure against R's scale
      const double R = riemann_scale(b);
      const double r = std::max(coeff_norm(b.riemann.Rik), 1e-14);
      CHECK(euler_defect(b.riemann.Rik, y, 2.0) * r <= 1e-10 * R);
      CHECK(euler_defect(b.berwald.B, y, -1.0) <= 1e-10);
      CHECK(euler_defect(JetTensor::scalar(b.F), y, 1.0) <= 1e-10);
      if (b.has_weyl) {
        const double w = std::max(coeff_norm(b.weyl.W), 1e-14);
        const double wt = std::max(coeff_norm(b.weyl.Wt), 1e-14);
        CHECK(euler_defect(b.weyl.W, y, 2.0) * w <= 1e-10 * std::max(w, R));
        CHECK(euler_defect(b.weyl.Wt, y, 0.0) * wt <= 1e-10 * std::max(wt, R));
      }
    }
  }
}

TEST_CASE("funk metric: projectively flat, not Douglas") {
  for (const auto& b : bundles(zoo::funk_ball3(), 3, Depth::flow)) {
    const double R = curvature_scale(b);
    CHECK(b.weyl.W.max_abs() <= 1e-8 * std::max(R, b.riemann.Rik.max_abs()));
    const double bs = b.berwald.B.max_abs();
    CHECK(b.berwald.E.max_abs() <= 1e-12 * bs);
    CHECK(b.berwald.H.max_abs() <= 1e-12 * bs);
    CHECK(b.D.max_abs() > 1e-6);
  }
}

TEST_CASE("family42: Douglas, not Weyl") {
  for (const auto& b : bundles(zoo::family42_default(), 3, Depth::curvature)) {
    CHECK(b.D.max_abs() <= 1e-9 * b.berwald.B.max_abs());
    CHECK(b.weyl.W.max_abs() >= 1e-4 * curvature_scale(b));
  }
}

TEST_CASE("two-dimensional sprays have no Weyl family") {
  const std::vector<double> x = {0.1, 0.2}, y = {0.3, 0.9};
  const CurvatureBundle b = build_bundle(zoo::conformal_riemannian(0.3, 2), x, y, Depth::flow);
  CHECK_FALSE(b.has_weyl);
  CHECK(b.D.size() > 0);
  CHECK_THROWS_AS(compute_weyl_family(b.conn, b.riemann), DimensionError);
}

TEST_CASE("horizontal derivatives") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    for (const auto& b : bundles(spec, 1, Depth::curvature)) {
      const JetTensor F0 = horizontal_0(JetTensor::scalar(b.F), b.conn);
      CHECK(coeff_norm(F0) <= 1e-12 * std::max(1.0, coeff_norm(JetTensor::scalar(b.F))));
      for (const JetTensor* t : {&b.berwald.E, &b.conn.N}) {
        const JetTensor full = contract_y(horizontal_full(*t, b.conn), t->rank(), b.conn.y);
        const JetTensor h0 = horizontal_0(*t, b.conn);
        CHECK(coeff_tensor_diff(full, h0) <= 1e-11 * std::max({coeff_norm(h0), coeff_norm(full), 1e-3}));
      }
    }
  }
}

TEST_CASE("Ricci identities and the two Douglas constructions") {
  for (const auto& [name, spec] : zoo_metrics()) {
    CAPTURE(name);
    for (const auto& b : bundles(spec, 2, Depth::flow)) {
      const RicciIdentities r = ricci_identities(b);
      CHECK(r.rie_ber.rel <= 1e-8);
      CHECK(r.rie_e.rel <= 1e-8);
      CHECK(r.rie_e_trace.rel <= 1e-8);
      CHECK(r.rie_h.rel <= 1e-8);
      CHECK(r.rie_h_dot.rel <= 1e-8);
      CHECK(douglas_forms_residual(b).rel <= 1e-10);
    }
  }
}

TEST_CASE("explicit sprays reproduce metric curvature") {
  const MetricSpec spec = zoo::randers_generic();
  const auto p = points_for(spec, 1).front();
  const SpraySource src = metric_spray(spec, p.x, p.y, standard_config(3));
  const CurvatureBundle a = build_bundle(src, Depth::curvature);
  const CurvatureBundle e = build_bundle(explicit_spray(src.G, p.x, p.y, src.F), Depth::curvature);
  CHECK(coeff_tensor_diff(a.riemann.Rik, e.riemann.Rik) == 0.0);
  CHECK(coeff_tensor_diff(a.weyl.Wt, e.weyl.Wt) == 0.0);
}

TEST_CASE("jet-order budget") {
  CHECK(required_config(3, Depth::curvature).x_order <= required_config(3, Depth::flow).x_order);
  CHECK(required_config(3, Depth::flow).y_order <= standard_config(3).y_order);
  CHECK_NOTHROW(check_budget(standard_config(3), Depth::flow));
  CHECK_THROWS_AS(check_budget(JetConfig{3, 1, 6}, Depth::flow), TruncationError);
  CHECK_THROWS_AS(check_budget(JetConfig{3, 2, 9}, Depth::deep), TruncationError);
  const auto rows = order_budget(standard_config(3));
  REQUIRE(!rows.empty());
  CHECK(rows.front().coefficients_per_component == 5720u);
  const std::vector<double> x = {0.1, 0.1, 0.1}, y = {1.0, 0.0, 0.0};
  const JetConfig small{3, 1, 4};
  CHECK_THROWS_AS(build_bundle(zoo::funk_ball3(), x, y, Depth::curvature, small), TruncationError);
}

}  // TEST_SUITE
