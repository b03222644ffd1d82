#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler/classify.hpp"
#include "finsler/curvature.hpp"
#include "finsler/jet.hpp"
#include "finsler/metric.hpp"
#include "finsler/sampling.hpp"
#include "finsler/tensor.hpp"

namespace testing {

using namespace finsler;

struct NamedMetric {
  std::string name;
  MetricSpec spec;
};

inline std::vector<NamedMetric> zoo_metrics() {
  return {{"euclidean", zoo::euclidean()},
          {"constant_riemannian", zoo::constant_riemannian()},
          {"conformal_riemannian", zoo::conformal_riemannian()},
          {"randers_generic", zoo::randers_generic()},
          {"funk_ball3", zoo::funk_ball3()},
          {"family42", zoo::family42_default()},
          {"family42_lambda1", zoo::family42(1.0)},
          {"spherical_generic", zoo::spherical_generic()},
          {"spherical_quadratic", zoo::spherical_quadratic()}};
}

inline std::vector<SamplePoint> points_for(const MetricSpec& spec, int count, std::uint64_t seed = 42) {
  SamplerConfig sc;
  sc.seed = seed;
  sc.count = count;
  sc.min_points = 1;
  return sample_points(spec, sc).points;
}

inline Jet random_jet(const JetConfig& cfg, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Jet j(cfg);
  for (const auto& m : retained_indices(cfg)) j.set_coeff(m, u(rng));
  return j;
}

/// Every mixed partial of total order 1..order.
inline std::vector<MultiIndex> indices_up_to(int dim, int order) {
  std::vector<MultiIndex> out;
  for (const auto& m : retained_indices(JetConfig{dim, order, order}))
    if (m.x_degree() + m.y_degree() <= order && m.x_degree() + m.y_degree() > 0) out.push_back(m);
  return out;
}

/// Truncates both jets to their common orders.
inline std::pair<Jet, Jet> common(const Jet& a, const Jet& b) {
  const int xo = std::min(a.x_order(), b.x_order());
  const int yo = std::min(a.y_order(), b.y_order());
  return {a.truncated(xo, yo), b.truncated(xo, yo)};
}

inline double coeff_max(const Jet& a) {
  double m = 0.0;
  for (double c : a.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

inline double coeff_diff(const Jet& a, const Jet& b) {
  const auto [p, q] = common(a, b);
  double m = 0.0;
  for (std::size_t k = 0; k < p.coeffs().size(); ++k)
    m = std::max(m, std::abs(p.coeffs()[k] - q.coeffs()[k]));
  return m;
}

/// Coefficientwise relative difference against the larger of the two.
inline double coeff_rel(const Jet& a, const Jet& b, double floor = 1e-14) {
  const auto [p, q] = common(a, b);
  return coeff_diff(p, q) / std::max({coeff_max(p), coeff_max(q), floor});
}

/// Euler operator: sum_m f_{.m} y^m.
inline Jet euler(const Jet& f, std::span<const Jet> y) {
  Jet acc = f.d_dy(0) * y[0];
  for (std::size_t m = 1; m < y.size(); ++m) acc += f.d_dy(static_cast<int>(m)) * y[m];
  return acc;
}

/// Largest coefficientwise relative Euler defect over all components:
/// |E(T) - degree T| / max(|T|).
inline double euler_defect(const JetTensor& t, std::span<const Jet> y, double degree) {
  double num = 0.0, den = 1e-14;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Jet e = euler(t.flat(k), y);
    const auto [p, q] = common(e, t.flat(k) * degree);
    num = std::max(num, coeff_diff(p, q));
    den = std::max(den, coeff_max(t.flat(k)));
  }
  return num / den;
}

inline double rel(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Closed form of the Funk-type Randers metric on the unit 3-ball.
inline double funk_F(std::span<const double> p, std::span<const double> v) {
  const double x = p[0], y = p[1];
  const double u = v[0], w = v[1], z = v[2];
  const double lam = 1.0 - x * x - y * y;
  const double t = -y * u + x * w;
  const double alpha = std::sqrt(t * t + (u * u + w * w + z * z) * lam) / lam;
  const double beta = t / lam;
  return alpha + beta;
}

/// Christoffel spray of g = (1 + c x^1)^2 delta:
/// G^i = (d rho . y) y^i - |y|^2 d rho_i / 2 with rho = log(1 + c x^1).
inline std::vector<double> conformal_spray(double c, std::span<const double> x, std::span<const double> y) {
  const double r1 = c / (1.0 + c * x[0]);
  double yy = 0.0;
  for (double v : y) yy += v * v;
  std::vector<double> G(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) G[i] = r1 * y[0] * y[i] - (i == 0 ? 0.5 * yy * r1 : 0.0);
  return G;
}

}  // namespace testing
