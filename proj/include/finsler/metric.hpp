#pragma once

// Metric zoo: jet-valued F and F^2 for each supported Finsler family,
// pointwise validation of the Finsler axioms, the fundamental tensor, and the
// spherically symmetric spray scalars.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

struct EuclideanMetric {
  int dim = 3;
};

/// F^2 = g_ij(x) y^i y^j.
struct RiemannianMetric {
  int dim = 3;
  std::vector<std::vector<Expr>> g;
};

/// F = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i.
struct RandersMetric {
  int dim = 3;
  std::vector<std::vector<Expr>> a;
  std::vector<Expr> b;
};

/// The flat Randers metric on the unit 3-ball with
/// alpha = sqrt((-x2 y1 + x1 y2)^2 + |y|^2 (1 - x1^2 - x2^2)) / (1 - x1^2 - x2^2),
/// beta = (-x2 y1 + x1 y2) / (1 - x1^2 - x2^2).
struct FunkBall3Metric {};

/// F = |y| phi(|x|, <x,y>/|y|) on the ball of radius domain_radius.
struct SphericallySymmetricMetric {
  int dim = 3;
  Expr phi;
  double domain_radius = 1.0;
};

/// Spherically symmetric family with constant f:
/// phi(r, s) = s h(r) - f_const (s/s0 - 1) / (a + b r^2)^lambda.
struct Family42Metric {
  int dim = 3;
  double a = 1.0;
  double b = 1.0;
  double lambda = 2.0;
  double s0 = 1.0;
  Expr h = Expr::constant(0.5);
  double f_const = 1.0;
};

using MetricSpec = std::variant<EuclideanMetric, RiemannianMetric, RandersMetric, FunkBall3Metric,
                                SphericallySymmetricMetric, Family42Metric>;

int metric_dim(const MetricSpec& spec);
std::string family_name(const MetricSpec& spec);
bool is_spherically_symmetric(const MetricSpec& spec);

/// Structured-document form; see README for the schema.
MetricSpec parse_metric(const nlohmann::json& doc);
nlohmann::json to_json(const MetricSpec& spec);

/// Throws DomainError naming the violated constraint.
void check_domain(const MetricSpec& spec, std::span<const double> x);

/// F and F^2 evaluated on plain doubles (T = double) or seeded jets (T = Jet).
template <class T>
T finsler_norm(const MetricSpec& spec, std::span<const T> x, std::span<const T> y);
template <class T>
T finsler_norm_squared(const MetricSpec& spec, std::span<const T> x, std::span<const T> y);

Jet eval_F(const MetricSpec& spec, std::span<const double> x, std::span<const double> y,
           const JetConfig& config);
Jet eval_F2(const MetricSpec& spec, std::span<const double> x, std::span<const double> y,
            const JetConfig& config);

struct FundamentalTensor {
  JetTensor g;      // g_ij
  JetTensor g_inv;  // g^ij
};

/// g_ij = 1/2 d^2 F^2 / dy^i dy^j and its inverse over the jet ring.
FundamentalTensor fundamental_tensor(const Jet& F2);

enum class PointStatus { ok, outside_domain, not_finsler };

struct PointValidation {
  std::vector<double> x;
  std::vector<double> y;
  PointStatus status = PointStatus::ok;
  std::vector<std::string> failures;
};

struct ValidationReport {
  std::vector<PointValidation> points;
  bool all_ok() const;
  std::size_t ok_count() const;
};

struct SamplePoint {
  std::vector<double> x;
  std::vector<double> y;
};

ValidationReport validate(const MetricSpec& spec, std::span<const SamplePoint> points);
PointValidation validate_point(const MetricSpec& spec, std::span<const double> x,
                               std::span<const double> y);

struct PQPair {
  double P = 0.0;
  double Q = 0.0;
  double residual = 0.0;           // |G - (u P y + u^2 Q x)|
  double relative_residual = 0.0;  // residual / |G| (0 when G = 0)
};

/// Least-squares split G^i = u P y^i + u^2 Q x^i.
PQPair extract_PQ(std::span<const double> spray, std::span<const double> x,
                  std::span<const double> y);

namespace zoo {

MetricSpec euclidean(int dim = 3);
/// Constant positive-definite g (fixed numbers, dim 3).
MetricSpec constant_riemannian();
/// g = (1 + c x1)^2 delta, conformally flat.
MetricSpec conformal_riemannian(double c = 0.3, int dim = 3);
/// Euclidean alpha with a non-closed, x-dependent beta.
MetricSpec randers_generic();
MetricSpec funk_ball3();
/// Validated default instance (lambda = 2, a = 1, b = 1, constant f).
Family42Metric family42_default();
MetricSpec family42(double lambda = 2.0, double b = 1.0, double a = 1.0);
/// phi = 1 + 0.2 s^2: spherically symmetric, not W-quadratic.
MetricSpec spherical_generic();
/// phi = sqrt(1 + s^2) + 0.3 s: Randers with closed beta, W-quadratic.
MetricSpec spherical_quadratic();

}  // namespace zoo

struct Family42SearchResult {
  Family42Metric best;
  double validated_fraction = 0.0;
  std::size_t candidates = 0;
};

/// Grid search over (s0, h constant, f_const) with a, b, lambda fixed,
/// maximizing the fraction of sample points passing validate().
Family42SearchResult search_family42(double a, double b, double lambda,
                                     std::span<const double> s0_grid,
                                     std::span<const double> h_grid,
                                     std::span<const double> f_grid,
                                     std::span<const SamplePoint> points);

}  // namespace finsler
