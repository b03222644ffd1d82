#pragma once

// Pointwise membership tests for the projective taxonomy. Every flag carries
// an absolute residual, the scale it is measured against, and the fitted
// scalars that define the class.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finsler/curvature.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

/// Residual scales are floored here so a flat quantity compared with a flat
/// reference does not produce 0/0. At the default tolerance this is an
/// absolute floor of 1e-12.
inline constexpr double kScaleFloor = 1e-5;

struct Residual {
  double abs = 0.0;
  double scale = 0.0;
  double rel = 0.0;  // abs / max(scale, kScaleFloor)
};

Residual make_residual(double abs, double scale);

struct Tolerances {
  double rel = 1e-7;
  double nonzero = 1e-4;  // "materially nonzero" threshold for negative claims
  std::map<std::string, double> overrides;

  double get(const std::string& name) const;
  /// Override for `name` if present, else `fallback`.
  double get(const std::string& name, double fallback) const;
};

enum class Flag {
  berwald,
  weakly_berwald,
  isotropic_mean_berwald,
  douglas,
  weyl,
  w_quadratic,
  weakly_weyl,
  gdw,
  generalized_weakly_weyl,
};
inline constexpr std::size_t kFlagCount = 9;
inline constexpr std::array<Flag, kFlagCount> kAllFlags = {
    Flag::berwald, Flag::weakly_berwald, Flag::isotropic_mean_berwald,
    Flag::douglas, Flag::weyl,           Flag::w_quadratic,
    Flag::weakly_weyl, Flag::gdw,        Flag::generalized_weakly_weyl};

const char* flag_name(Flag f);
bool parse_flag(const std::string& name, Flag& out);

struct FlagResult {
  bool applicable = true;  // false for the Weyl family at n = 2
  bool pass = false;
  bool vacuous = false;
  Residual primary;
  Residual secondary;  // second condition where the class has two
};

struct PointClassification {
  std::vector<double> x;
  std::vector<double> y;
  bool companion_metric = false;  // F, l, h taken from the Euclidean norm
  std::array<FlagResult, kFlagCount> flags;

  double c = 0.0;                  // isotropic mean Berwald scalar
  std::vector<double> omega;       // omega_jkl
  double mu = 0.0;                 // weakly-Weyl scalar (0 when vacuous)
  double mu_spread = 0.0;          // max - min of componentwise estimates
  std::vector<double> T;           // GDW coefficient T_jkl
  double gww_mu = 0.0;
  std::vector<double> gww_lambda;  // lambda_r
  int gww_rank = 0;
  std::vector<double> Omega;       // Omega_l^i_km
  double Omega_reconstruction = 0.0;  // |W + Omega y y|

  const FlagResult& operator[](Flag f) const { return flags[static_cast<std::size_t>(f)]; }
  FlagResult& operator[](Flag f) { return flags[static_cast<std::size_t>(f)]; }
};

/// Reference scale for the 0-homogeneous Weyl quantities:
/// max(|W_jikl|, |R_jikl|, kappa / F^2).
double weyl_scale(const CurvatureBundle& b);

/// omega_jkl = W~_j^i_kl l_i / F as jets.
JetTensor omega_tensor(const CurvatureBundle& b);

/// Needs a bundle of at least flow depth.
PointClassification classify_point(const CurvatureBundle& b, const Tolerances& tol);

struct FlagAggregate {
  bool applicable = true;
  bool verdict = false;      // passes at every point
  bool all_vacuous = false;
  bool clearly_violated = false;  // rel >= nonzero threshold at every point
  double tolerance = 0.0;
  double min_rel = 0.0;
  double max_rel = 0.0;
  double mean_rel = 0.0;
  int passed = 0;
};

struct Implication {
  std::string name;
  bool holds = true;
};

struct ClassificationReport {
  std::string family;
  std::vector<PointClassification> points;
  std::array<FlagAggregate, kFlagCount> aggregate;
  std::vector<Implication> implications;
  bool implications_ok = true;
  SampleSet samples;

  const FlagAggregate& operator[](Flag f) const { return aggregate[static_cast<std::size_t>(f)]; }
};

ClassificationReport aggregate_classification(std::vector<PointClassification> points,
                                              const Tolerances& tol);

/// Samples, builds bundles in parallel and aggregates. Deterministic in the seed.
ClassificationReport classify_metric(const MetricSpec& spec, const SamplerConfig& sampler,
                                     const Tolerances& tol,
                                     const std::optional<JetConfig>& f2 = std::nullopt);

}  // namespace finsler
