#pragma once

// Projective changes G^i -> G^i + P y^i and the checks that go with them:
// the Riemann curvature relation, invariance of W, D and W~, and the
// transformation laws of the weakly-Weyl and generalized weakly-Weyl data.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/classify.hpp"
#include "finsler/curvature.hpp"
#include "finsler/expr.hpp"
#include "finsler/metric.hpp"

namespace finsler {

/// A positively 1-homogeneous function P(x, y).
class ProjectiveFactor {
 public:
  enum class Kind { zero, linear_form, scaled_F, expression, sum };

  static ProjectiveFactor zero();
  /// P = b_i(x) y^i.
  static ProjectiveFactor linear_form(std::vector<Expr> b);
  /// P = c F for the given metric.
  static ProjectiveFactor scaled_F(double c, MetricSpec spec);
  /// Any expression in (x, y); homogeneity is checked pointwise by validate().
  static ProjectiveFactor expression(Expr e);
  static ProjectiveFactor sum(ProjectiveFactor a, ProjectiveFactor b);

  Kind kind() const { return kind_; }
  std::string describe() const;

  double value(std::span<const double> x, std::span<const double> y) const;
  Jet jet(std::span<const double> x, std::span<const double> y, const JetConfig& config) const;

  /// Throws ValidationError unless P(x, t y) = t P(x, y) for t in {0.5, 2}
  /// (relative 1e-10).
  void validate(std::span<const double> x, std::span<const double> y) const;

 private:
  template <class T>
  T eval(std::span<const T> x, std::span<const T> y) const;

  friend nlohmann::json to_json(const ProjectiveFactor& p);

  Kind kind_ = Kind::zero;
  std::vector<Expr> b_;
  double c_ = 0.0;
  std::shared_ptr<const MetricSpec> spec_;
  Expr expr_;
  std::vector<ProjectiveFactor> terms_;
};

/// Structured-document form: {"kind": "zero"} | {"kind": "linear_form", "b": [...]}
/// | {"kind": "scaled_F", "c": 0.1} (uses `metric`) | {"kind": "expression", "expr": ...}
/// | {"kind": "sum", "terms": [...]}.
ProjectiveFactor parse_factor(const nlohmann::json& doc, const MetricSpec& metric);
nlohmann::json to_json(const ProjectiveFactor& p);

/// Explicit spray G + P y with the source's metric data carried along as a
/// companion. Validates P and the 2-homogeneity of the result.
SpraySource apply_projective_change(const SpraySource& source, const ProjectiveFactor& P);

enum class LemmaConnection { source, barred };

struct RiemannRelationReport {
  Residual source;  // P_|k taken with the unchanged spray's connection
  Residual barred;  // P_|k taken with the changed spray's connection
  LemmaConnection used = LemmaConnection::source;
  const Residual& result() const { return used == LemmaConnection::source ? source : barred; }
};

/// R~^i_k - R^i_k - Xi d^i_k - tau_k y^i with Xi = P^2 - P_|m y^m and
/// tau_k = 3 (P_|k - P P_.k) + Xi_.k. Both connections are evaluated.
RiemannRelationReport check_riemann_relation(const SpraySource& source, const ProjectiveFactor& P,
                                             LemmaConnection used = LemmaConnection::source);

struct InvarianceReport {
  Residual W;
  Residual D;
  Residual Wt;
};

InvarianceReport check_invariants_under_change(const SpraySource& source,
                                               const ProjectiveFactor& P);

enum class ClosureStatus { pass, fail, vacuous, hypothesis_not_met };
const char* closure_status_name(ClosureStatus s);

struct WeaklyWeylClosureReport {
  ClosureStatus status = ClosureStatus::vacuous;
  Residual relation;   // omega_||0 - (omega_|0 - P omega)
  Residual mu_law;     // (mu F)~ - (mu F + P)
  double muF = 0.0;
  double muF_bar = 0.0;
  double P = 0.0;
};

WeaklyWeylClosureReport check_weakly_weyl_closure(const SpraySource& source,
                                                  const ProjectiveFactor& P,
                                                  const Tolerances& tol);

struct GwwClosureReport {
  Residual expansion;  // W~_||0 - (W~_|0 + P_.r W~^r y^i - 2 P W~)
  ClosureStatus law_status = ClosureStatus::vacuous;
  Residual mu_law;      // (mu F)~ - (mu F + 2P)
  Residual lambda_law;  // lambda~_r - (lambda_r + P_.r)
};

GwwClosureReport check_gww_closure(const SpraySource& source, const ProjectiveFactor& P,
                                   const Tolerances& tol);

/// Random Randers-type sprays searched for a class witness. Nothing is
/// asserted about existence; the best candidate found is reported.
enum class WitnessKind { nonvacuous_weakly_weyl, gww_not_gdw };

struct WitnessResult {
  bool found = false;
  int trials = 0;
  double best_score = 0.0;  // smaller is closer to a witness
  std::optional<MetricSpec> best;
};

WitnessResult search_witness(WitnessKind kind, std::uint64_t seed, int trials,
                             const Tolerances& tol);

}  // namespace finsler
