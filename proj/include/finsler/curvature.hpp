#pragma once

// Spray-level curvature tower with the Berwald connection: spray, Riemann,
// Berwald, mean Berwald, Douglas, Weyl and weakly-Weyl tensors as jet-valued
// tensors, plus the horizontal derivatives |0 and |m.
//
// Index storage follows the written order, e.g. R_j^i_kl -> [j][i][k][l],
// W^i_k -> [i][k], theta_jkl -> [j][k][l].

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/metric.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

/// A spray G^i at a base point, with optional metric data (F, g, g^-1) that
/// only the metric-dependent fits downstream need.
struct SpraySource {
  int dim = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<Jet> y_seed;  // seeded y^i, used for contractions
  std::vector<Jet> G;
  std::optional<Jet> F;
  std::optional<FundamentalTensor> metric;

  bool has_metric() const { return F.has_value(); }
};

/// Spray of a metric: G^i = 1/4 g^il (F^2_{;k.l} y^k - F^2_{;l}).
SpraySource metric_spray(const MetricSpec& spec, std::span<const double> x,
                         std::span<const double> y, const JetConfig& f2_config);

/// Spray given directly as jets (all sharing one config); F is optional.
SpraySource explicit_spray(std::vector<Jet> G, std::span<const double> x,
                           std::span<const double> y, std::optional<Jet> F = std::nullopt);

/// G^i from F^2, g^-1 and the seeded y^i.
std::vector<Jet> compute_spray(const Jet& F2, const JetTensor& g_inv, std::span<const Jet> y);

/// N^i_j = G^i_{.j}, Gamma^i_jk = N^i_{j.k}.
struct BerwaldConnection {
  std::vector<Jet> y;  // seeded y^i
  std::vector<Jet> G;
  JetTensor N;
  JetTensor Gamma;
};

BerwaldConnection berwald_connection(const SpraySource& source);

/// T|0 = T_{;m} y^m - 2 G^r T_{.r} + sum_up T^..r.. N^i_r - sum_down T_..r.. N^r_j.
JetTensor horizontal_0(const JetTensor& t, const BerwaldConnection& c);
/// T|m with the new lower index appended last; contracting it with y gives T|0.
JetTensor horizontal_full(const JetTensor& t, const BerwaldConnection& c);

struct RiemannFamily {
  JetTensor Rik;    // R^i_k
  JetTensor Rikl;   // R^i_kl
  JetTensor Rjikl;  // R_j^i_kl
};
RiemannFamily compute_riemann(const BerwaldConnection& c);

struct BerwaldFamily {
  JetTensor B;  // B_j^i_kl
  JetTensor E;  // E_jk
  JetTensor H;  // H_jk = E_jk|0 (empty when not requested)
};
BerwaldFamily compute_berwald_family(const BerwaldConnection& c, bool with_H = true);

/// D = B - 2/(n+1) {E_jk d^i_l + E_jl d^i_k + E_kl d^i_j + E_jk.l y^i}.
JetTensor compute_douglas(const BerwaldConnection& c, const BerwaldFamily& b);
/// D = B - 1/(n+1) (G^m_.m y^i)_.j.k.l, computed independently from the spray.
JetTensor compute_douglas_direct(const BerwaldConnection& c);

struct WeylFamily {
  JetTensor Rs;      // scalar R^m_m / (n-1)
  JetTensor A;       // A^i_k
  JetTensor W;       // W^i_k
  JetTensor Wjikl;   // W_j^i_kl
  JetTensor Wt;      // W~_j^i_kl = W_j^i_pl.k y^p
};
/// Throws DimensionError for n = 2.
WeylFamily compute_weyl_family(const BerwaldConnection& c, const RiemannFamily& r);

/// theta_jkl = 2 E_jk|l - 1/3 (R^s_l.s - (n+2) Rs_.l)_.j.k
JetTensor compute_theta(const BerwaldConnection& c, const BerwaldFamily& b, const RiemannFamily& r,
                        const JetTensor& Rs);

enum class Depth {
  curvature,  // R, B, E, D, Weyl family
  flow,       // + H, D|0, theta, W~|0
  deep,       // + D|0|0, theta|0
};

/// F^2 orders needed by the given depth; the spray sits one x and two y
/// orders below.
JetConfig required_config(int dim, Depth depth);
/// Orders used by the command-line tool and the acceptance suite.
JetConfig standard_config(int dim);

struct TensorBudget {
  std::string name;
  int x_order = 0;
  int y_order = 0;
  std::size_t components = 0;
  std::size_t coefficients_per_component = 0;
};

/// Orders every tensor ends up with when F^2 is evaluated at `f2`; entries
/// with a negative order cannot be formed.
std::vector<TensorBudget> order_budget(const JetConfig& f2);

/// Throws TruncationError naming the first tensor that cannot be formed.
void check_budget(const JetConfig& f2, Depth depth);

struct CurvatureBundle {
  int dim = 0;
  Depth depth = Depth::curvature;
  std::vector<double> x;
  std::vector<double> y;

  // Metric data. A spray without one gets the Euclidean norm |y| as a
  // companion metric (companion_metric = true) so F-dependent fits still run.
  bool companion_metric = false;
  Jet F;
  JetTensor g, g_inv, ell, h;

  BerwaldConnection conn;
  RiemannFamily riemann;
  BerwaldFamily berwald;
  JetTensor D;
  bool has_weyl = false;
  WeylFamily weyl;

  // flow depth
  JetTensor D_h0;
  JetTensor theta;
  JetTensor Wt_h0;
  // deep depth
  JetTensor D_h00;
  JetTensor theta_h0;
};

/// Largest magnitude among the individual summands of R^i_k (2-homogeneous).
/// Used as the reference scale when R itself vanishes by cancellation.
double curvature_scale(const CurvatureBundle& b);

CurvatureBundle build_bundle(const SpraySource& source, Depth depth);
CurvatureBundle build_bundle(const MetricSpec& spec, std::span<const double> x,
                             std::span<const double> y, Depth depth);
/// Same with an explicit F^2 jet config; throws TruncationError if it is too
/// shallow for `depth`.
CurvatureBundle build_bundle(const MetricSpec& spec, std::span<const double> x,
                             std::span<const double> y, Depth depth, const JetConfig& f2);

}  // namespace finsler
