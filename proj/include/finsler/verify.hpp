#pragma once

// Identity harness: the relations between the Weyl, Douglas and Berwald
// families, the spherically symmetric Weyl decomposition, and the Ricci
// identities, each as a residual against its participating tensor norms.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finsler/classify.hpp"
#include "finsler/curvature.hpp"
#include "finsler/metric.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

/// A check whose participating norms are all below this is inconclusive.
inline constexpr double kInconclusiveNorm = 1e-12;

enum class CheckStatus { pass, fail, inconclusive, hypothesis_not_met };
const char* check_status_name(CheckStatus s);

struct Measure {
  std::string name;
  Residual residual;
  double tolerance = 0.0;
  bool passed() const { return residual.rel <= tolerance; }
};

/// Pass/fail over the measures; inconclusive when every scale is below
/// kInconclusiveNorm.
CheckStatus measure_status(const std::vector<Measure>& measures);

// ---------------------------------------------------------------- pointwise

/// W~ - D|0 + theta (x) y / (n+1). Needs flow depth.
Residual thm13_residual(const CurvatureBundle& b);

/// D|0 - (omega + theta/(n+1)) (x) y with omega from the classification.
Residual gsakaguchi_residual(const CurvatureBundle& b, const PointClassification& pc);

/// D|0|0 + mu F D|0 - T (x) y with
/// T = lambda_r D^r|0 + (theta|0 + (mu F - lambda_r y^r) theta) / (n+1).
Residual prop53_residual(const CurvatureBundle& b, double mu, std::span<const double> lambda);

/// theta_jkl - theta_kjl.
Residual theta_symmetry_residual(const CurvatureBundle& b);

/// The two Douglas constructions (via E, and directly from the spray).
Residual douglas_forms_residual(const CurvatureBundle& b);

struct RicciIdentities {
  Residual rie_ber;     // B_j^i_ml|k - B_j^i_mk|l - R_j^i_kl.m
  Residual rie_e;       // R_j^i_ml.k y^m - B_j^i_kl|0
  Residual rie_e_trace; // R_s^s_ml.k - 2 (E_kl|m - E_km|l)
  Residual rie_h;       // R_s^s_ml.k y^m - 2 H_kl
  Residual rie_h_dot;   // R_s^s_ml.j.k y^m - 2 (E_jl.k|0 + E_jk|l)
};
/// Needs flow depth.
RicciIdentities ricci_identities(const CurvatureBundle& b);

struct SphericalDecomposition {
  double r = 0.0, s = 0.0, u = 0.0;
  double omega[5] = {0, 0, 0, 0, 0};
  double omega_s[5] = {0, 0, 0, 0, 0};  // d/ds at fixed r
  double X1 = 0.0, X2 = 0.0, X3 = 0.0;
  Residual fit;             // W^i_k minus its 5-term basis expansion
  Residual omega3_rel;      // omega_3 + s omega_2
  Residual omega5_rel;      // omega_5 + s omega_4 + omega_1
  Residual wjipl;           // 3 W_j^i_pl minus its A, B, D, E reconstruction
};

/// Fits W^i_k onto {u^2 d, u^2 x_k x^i, u y_k x^i, u x_k y^i, y_k y^i}; the
/// fit is carried out over the jet ring so the omegas come with their
/// y-derivatives. Throws DegenerateError when x and y are parallel.
SphericalDecomposition decompose_spherical_weyl(const CurvatureBundle& b);
SphericalDecomposition decompose_spherical_weyl(const MetricSpec& spec, std::span<const double> x,
                                                std::span<const double> y);

struct QuadraticFormulaFit {
  double omega2 = 0.0;
  Residual residual;  // W_j^i_kl - omega2 (closed-form tensor)
};

/// Least-squares scalar fit of W_j^i_kl onto
/// (x_j x_l - r^2 d_jl) d^i_k / (n-1) - (x_j x_k - r^2 d_jk) d^i_l / (n-1)
///   + (x_k d_jl - x_l d_jk) x^i.
QuadraticFormulaFit fit_quadratic_weyl(const CurvatureBundle& b);

/// Candidate readings of the closed-form Weyl formula for the constant-f
/// spherically symmetric family: which slot of the bracket is free and
/// which two are contracted with y y.
enum class Pairing { free_j, free_k, free_l };
inline constexpr Pairing kAllPairings[] = {Pairing::free_j, Pairing::free_k, Pairing::free_l};
const char* pairing_name(Pairing p);

/// Residual of W^i_k against c * bracket contracted per the pairing, with
/// c = 4 lambda (lambda - 1) b^2 / (a + b r^2)^2.
std::map<Pairing, Residual> example42_pairings(const Family42Metric& m, const CurvatureBundle& b);

// ---------------------------------------------------------------- harness

struct CheckPoint {
  int index = 0;
  std::vector<double> x;
  std::vector<double> y;
  CheckStatus status = CheckStatus::pass;
  std::vector<Measure> measures;
  std::map<std::string, double> values;
  std::string error;  // set when the point could not be evaluated
};

struct CheckReport {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::vector<CheckPoint> points;
  std::map<std::string, double> summary;
  std::vector<std::string> notes;
  double max_rel = 0.0;
};

/// Known check names, in canonical order.
const std::vector<std::string>& check_names();
bool is_check_name(const std::string& name);

/// Runs one named check on the given points (in parallel) and merges the
/// per-point records in index order.
CheckReport run_check(const std::string& name, const MetricSpec& spec,
                      const std::vector<SamplePoint>& points, const Tolerances& tol,
                      const std::optional<JetConfig>& f2 = std::nullopt);

}  // namespace finsler
