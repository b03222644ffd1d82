#include "finsler/metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "finsler/errors.hpp"
#include "finsler/jet_linalg.hpp"

namespace finsler {

int metric_dim(const MetricSpec& spec) {
  return std::visit(
      [](const auto& m) -> int {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, FunkBall3Metric>) return 3;
        else return m.dim;
      },
      spec);
}

std::string family_name(const MetricSpec& spec) {
  static const char* names[] = {"euclidean",  "riemannian", "randers",
                                "funk_ball3", "spherically_symmetric", "sph_sym_family42"};
  return names[spec.index()];
}

bool is_spherically_symmetric(const MetricSpec& spec) {
  return std::holds_alternative<SphericallySymmetricMetric>(spec) ||
         std::holds_alternative<Family42Metric>(spec);
}

namespace {

void check_dim(int dim) {
  if (dim < kMinDim || dim > kMaxDim)
    throw ConfigError("metric dimension must be in [2, 4], got " + std::to_string(dim));
}

void require_x_only(const Expr& e, int dim, const std::string& what) {
  if (!e.depends_only_on_x())
    throw ConfigError(what + " must depend on x only");
  if (e.max_coordinate_index() >= dim) throw ConfigError(what + " references a coordinate >= dim");
}

void require_only(const Expr& e, std::initializer_list<SymbolKind> allowed,
                  const std::string& what) {
  for (auto k : {SymbolKind::x, SymbolKind::y, SymbolKind::u, SymbolKind::r, SymbolKind::s,
                 SymbolKind::v}) {
    if (std::find(allowed.begin(), allowed.end(), k) != allowed.end()) continue;
    if (e.uses(k)) throw ConfigError(what + " may only use the symbols it is a function of");
  }
}

std::vector<std::vector<Expr>> parse_matrix(const nlohmann::json& doc, int dim,
                                            const std::string& what) {
  if (!doc.is_array() || static_cast<int>(doc.size()) != dim)
    throw ConfigError(what + " must be a " + std::to_string(dim) + "x" + std::to_string(dim) +
                      " array");
  std::vector<std::vector<Expr>> out;
  for (const auto& row : doc) {
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw ConfigError(what + " has a malformed row");
    std::vector<Expr> r;
    for (const auto& e : row) {
      r.push_back(parse_expr(e));
      require_x_only(r.back(), dim, what);
    }
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json matrix_json(const std::vector<std::vector<Expr>>& m) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : m) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& e : row) r.push_back(to_json(e));
    out.push_back(r);
  }
  return out;
}

double number(const nlohmann::json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
  return doc.at(key).get<double>();
}

}  // namespace

MetricSpec parse_metric(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("family"))
    throw ConfigError("metric document needs a \"family\" field");
  const auto family = doc.at("family").get<std::string>();
  const int dim = doc.value("dim", 3);
  if (family == "euclidean") {
    check_dim(dim);
    return EuclideanMetric{dim};
  }
  if (family == "riemannian") {
    check_dim(dim);
    return RiemannianMetric{dim, parse_matrix(doc.at("g"), dim, "g")};
  }
  if (family == "randers") {
    check_dim(dim);
    RandersMetric m{dim, parse_matrix(doc.at("a"), dim, "a"), {}};
    const auto& b = doc.at("b");
    if (!b.is_array() || static_cast<int>(b.size()) != dim)
      throw ConfigError("b must be an array of length dim");
    for (const auto& e : b) {
      m.b.push_back(parse_expr(e));
      require_x_only(m.b.back(), dim, "b");
    }
    return m;
  }
  if (family == "funk_ball3") {
    if (doc.contains("dim") && dim != 3) throw ConfigError("funk_ball3 is defined for dim 3 only");
    return FunkBall3Metric{};
  }
  if (family == "spherically_symmetric") {
    check_dim(dim);
    SphericallySymmetricMetric m{dim, parse_expr(doc.at("phi")),
                                 number(doc, "domain_radius", 1.0)};
    require_only(m.phi, {SymbolKind::r, SymbolKind::s}, "phi");
    if (!(m.domain_radius > 0)) throw ConfigError("domain_radius must be positive");
    return m;
  }
  if (family == "sph_sym_family42") {
    check_dim(dim);
    Family42Metric m;
    m.dim = dim;
    m.a = number(doc, "a", m.a);
    m.b = number(doc, "b", m.b);
    m.lambda = number(doc, "lambda", m.lambda);
    m.s0 = number(doc, "s0", m.s0);
    m.f_const = number(doc, "f_const", m.f_const);
    if (doc.contains("h")) m.h = parse_expr(doc.at("h"));
    require_only(m.h, {SymbolKind::r}, "h");
    if (m.s0 == 0.0) throw ConfigError("s0 must be nonzero");
    return m;
  }
  throw ConfigError("unknown metric family '" + family + "'");
}

nlohmann::json to_json(const MetricSpec& spec) {
  nlohmann::json out;
  out["family"] = family_name(spec);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, EuclideanMetric>) {
          out["dim"] = m.dim;
        } else if constexpr (std::is_same_v<M, RiemannianMetric>) {
          out["dim"] = m.dim;
          out["g"] = matrix_json(m.g);
        } else if constexpr (std::is_same_v<M, RandersMetric>) {
          out["dim"] = m.dim;
          out["a"] = matrix_json(m.a);
          nlohmann::json b = nlohmann::json::array();
          for (const auto& e : m.b) b.push_back(to_json(e));
          out["b"] = b;
        } else if constexpr (std::is_same_v<M, FunkBall3Metric>) {
          out["dim"] = 3;
        } else if constexpr (std::is_same_v<M, SphericallySymmetricMetric>) {
          out["dim"] = m.dim;
          out["phi"] = to_json(m.phi);
          out["domain_radius"] = m.domain_radius;
        } else {
          out["dim"] = m.dim;
          out["a"] = m.a;
          out["b"] = m.b;
          out["lambda"] = m.lambda;
          out["s0"] = m.s0;
          out["h"] = to_json(m.h);
          out["f_const"] = m.f_const;
        }
      },
      spec);
  return out;
}

void check_domain(const MetricSpec& spec, std::span<const double> x) {
  const int dim = metric_dim(spec);
  if (static_cast<int>(x.size()) != dim)
    throw std::invalid_argument("point dimension does not match the metric");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double r = std::sqrt(r2);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, FunkBall3Metric>) {
          if (!(r < 1.0)) throw DomainError("funk_ball3 requires |x| < 1");
        } else if constexpr (std::is_same_v<M, SphericallySymmetricMetric>) {
          if (!(r < m.domain_radius)) throw DomainError("spherically symmetric metric requires |x| < domain_radius");
          if (m.phi.uses(SymbolKind::r) && r == 0.0)
            throw DomainError("phi depends on r = |x|, which is not smooth at x = 0");
        } else if constexpr (std::is_same_v<M, Family42Metric>) {
          if (!(m.a + m.b * r2 > 0.0)) throw DomainError("family42 requires a + b r^2 > 0");
          if (m.h.uses(SymbolKind::r) && r == 0.0)
            throw DomainError("h depends on r = |x|, which is not smooth at x = 0");
        }
      },
      spec);
}

namespace {

template <class T>
T lift(double c, const T& like) {
  return detail::lift_constant(c, like);
}

template <class T>
T quadratic_form(const std::vector<std::vector<Expr>>& m, ExprContext<T>& ctx,
                 std::span<const T> y) {
  const int n = ctx.dim();
  T acc = lift(0.0, y[0]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) acc = acc + evaluate(m[i][j], ctx) * y[i] * y[j];
  return acc;
}

template <class T>
T norm_impl(const MetricSpec& spec, std::span<const T> x, std::span<const T> y) {
  using std::pow;
  using std::sqrt;
  ExprContext<T> ctx(x, y);
  return std::visit(
      [&](const auto& m) -> T {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, EuclideanMetric> || std::is_same_v<M, RiemannianMetric>) {
          return sqrt(finsler_norm_squared<T>(spec, x, y));
        } else if constexpr (std::is_same_v<M, RandersMetric>) {
          T beta = evaluate(m.b[0], ctx) * y[0];
          for (int i = 1; i < m.dim; ++i) beta = beta + evaluate(m.b[i], ctx) * y[i];
          return sqrt(quadratic_form(m.a, ctx, y)) + beta;
        } else if constexpr (std::is_same_v<M, FunkBall3Metric>) {
          const T lam = 1.0 - x[0] * x[0] - x[1] * x[1];
          const T w = x[0] * y[1] - x[1] * y[0];
          const T inv = 1.0 / lam;
          const T alpha = sqrt(w * w + ctx.u2() * lam) * inv;
          return alpha + w * inv;
        } else if constexpr (std::is_same_v<M, SphericallySymmetricMetric>) {
          return ctx.u() * evaluate(m.phi, ctx);
        } else {
          // u phi = v h(r) + K (u - v / s0),  K = f / (a + b r^2)^lambda
          const T k = m.f_const * pow(m.a + m.b * ctx.r2(), -m.lambda);
          return ctx.v() * evaluate(m.h, ctx) + k * (ctx.u() - ctx.v() * (1.0 / m.s0));
        }
      },
      spec);
}

template <class T>
T norm_squared_impl(const MetricSpec& spec, std::span<const T> x, std::span<const T> y) {
  if (const auto* e = std::get_if<EuclideanMetric>(&spec)) {
    T acc = y[0] * y[0];
    for (int i = 1; i < e->dim; ++i) acc = acc + y[i] * y[i];
    return acc;
  }
  if (const auto* r = std::get_if<RiemannianMetric>(&spec)) {
    ExprContext<T> ctx(x, y);
    return quadratic_form(r->g, ctx, y);
  }
  const T f = norm_impl<T>(spec, x, y);
  return f * f;
}

}  // namespace

template <>
double finsler_norm<double>(const MetricSpec& spec, std::span<const double> x,
                            std::span<const double> y) {
  check_domain(spec, x);
  const double f = norm_impl<double>(spec, x, y);
  if (!std::isfinite(f)) throw DomainError("F is not finite at the evaluation point");
  return f;
}

template <>
Jet finsler_norm<Jet>(const MetricSpec& spec, std::span<const Jet> x, std::span<const Jet> y) {
  return norm_impl<Jet>(spec, x, y);
}

template <>
double finsler_norm_squared<double>(const MetricSpec& spec, std::span<const double> x,
                                    std::span<const double> y) {
  check_domain(spec, x);
  const double f = norm_squared_impl<double>(spec, x, y);
  if (!std::isfinite(f)) throw DomainError("F^2 is not finite at the evaluation point");
  return f;
}

template <>
Jet finsler_norm_squared<Jet>(const MetricSpec& spec, std::span<const Jet> x,
                              std::span<const Jet> y) {
  return norm_squared_impl<Jet>(spec, x, y);
}

Jet eval_F(const MetricSpec& spec, std::span<const double> x, std::span<const double> y,
           const JetConfig& config) {
  if (config.dim != metric_dim(spec)) throw std::invalid_argument("jet dim does not match metric");
  check_domain(spec, x);
  const Seeds s = seed_point(x, y, config);
  return finsler_norm<Jet>(spec, s.x, s.y);
}

Jet eval_F2(const MetricSpec& spec, std::span<const double> x, std::span<const double> y,
            const JetConfig& config) {
  if (config.dim != metric_dim(spec)) throw std::invalid_argument("jet dim does not match metric");
  check_domain(spec, x);
  const Seeds s = seed_point(x, y, config);
  return finsler_norm_squared<Jet>(spec, s.x, s.y);
}

FundamentalTensor fundamental_tensor(const Jet& F2) {
  if (F2.y_order() < 2)
    throw TruncationError("fundamental tensor needs F^2 with y_order >= 2");
  const int n = F2.dim();
  std::vector<Jet> first;
  for (int i = 0; i < n; ++i) first.push_back(F2.d_dy(i));
  FundamentalTensor out;
  out.g = make_tensor(n, {Variance::down, Variance::down}, [&](std::span<const int> idx) {
    return first[idx[0]].d_dy(idx[1]) * 0.5;
  });
  std::vector<Jet> a, id;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a.push_back(out.g(i, j));
      id.push_back(Jet::constant(out.g(i, j).config(), i == j ? 1.0 : 0.0));
    }
  std::vector<Jet> inv;
  try {
    inv = jet_solve(std::move(a), n, std::move(id), n);
  } catch (const DegenerateError& e) {
    throw ValidationError(std::string("fundamental tensor is not definite: ") + e.what());
  }
  out.g_inv = make_tensor(n, {Variance::up, Variance::up}, [&](std::span<const int> idx) {
    return inv[static_cast<std::size_t>(idx[0] * n + idx[1])];
  });
  return out;
}

bool ValidationReport::all_ok() const {
  return std::all_of(points.begin(), points.end(),
                     [](const PointValidation& p) { return p.status == PointStatus::ok; });
}

std::size_t ValidationReport::ok_count() const {
  return static_cast<std::size_t>(std::count_if(
      points.begin(), points.end(),
      [](const PointValidation& p) { return p.status == PointStatus::ok; }));
}

PointValidation validate_point(const MetricSpec& spec, std::span<const double> x,
                               std::span<const double> y) {
  PointValidation pv{{x.begin(), x.end()}, {y.begin(), y.end()}, PointStatus::ok, {}};
  const int n = metric_dim(spec);
  try {
    check_domain(spec, x);
  } catch (const DomainError& e) {
    pv.status = PointStatus::outside_domain;
    pv.failures.emplace_back(e.what());
    return pv;
  }
  try {
    const double f = finsler_norm<double>(spec, x, y);
    if (!(f > 0.0)) pv.failures.push_back("F is not positive");
    for (double lam : {0.5, 2.0, 3.0}) {
      std::vector<double> ly(y.begin(), y.end());
      for (double& v : ly) v *= lam;
      const double fl = finsler_norm<double>(spec, x, ly);
      if (std::abs(fl - lam * f) > 1e-10 * std::abs(lam * f))
        pv.failures.push_back("F is not positively 1-homogeneous (lambda = " +
                              std::to_string(lam) + ")");
    }
    const Jet f2 = eval_F2(spec, x, y, JetConfig{n, 0, 2});
    const auto ft = fundamental_tensor(f2);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = ft.g(i, j).value();
    for (int k = 1; k <= n; ++k) {
      if (!(g.topLeftCorner(k, k).determinant() > 0.0)) {
        pv.failures.push_back("fundamental tensor is not positive definite (minor " +
                              std::to_string(k) + ")");
        break;
      }
    }
  } catch (const ValidationError& e) {
    pv.failures.emplace_back(e.what());
  } catch (const SingularError& e) {
    pv.status = PointStatus::outside_domain;
    pv.failures.emplace_back(e.what());
    return pv;
  } catch (const DomainError& e) {
    pv.status = PointStatus::outside_domain;
    pv.failures.emplace_back(e.what());
    return pv;
  }
  if (!pv.failures.empty()) pv.status = PointStatus::not_finsler;
  return pv;
}

ValidationReport validate(const MetricSpec& spec, std::span<const SamplePoint> points) {
  if (points.empty()) throw std::invalid_argument("validate: empty sample set");
  ValidationReport report;
  for (const auto& p : points) report.points.push_back(validate_point(spec, p.x, p.y));
  return report;
}

PQPair extract_PQ(std::span<const double> spray, std::span<const double> x,
                  std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(spray.data(), n);
  const double u = yv.norm();
  const double r = xv.norm();
  if (r == 0.0 || u == 0.0 || std::abs(xv.dot(yv)) > (1.0 - 1e-10) * r * u)
    throw DegenerateError("extract_PQ: x and y must be linearly independent");
  Eigen::MatrixXd basis(n, 2);
  basis.col(0) = u * yv;
  basis.col(1) = u * u * xv;
  const Eigen::Vector2d pq = basis.colPivHouseholderQr().solve(g);
  PQPair out;
  out.P = pq(0);
  out.Q = pq(1);
  out.residual = (g - basis * pq).norm();
  const double gn = g.norm();
  out.relative_residual = gn > 0.0 ? out.residual / gn : out.residual;
  return out;
}

namespace zoo {

MetricSpec euclidean(int dim) { return EuclideanMetric{dim}; }

MetricSpec constant_riemannian() {
  const double g[3][3] = {{2.0, 0.3, 0.1}, {0.3, 1.5, 0.2}, {0.1, 0.2, 1.0}};
  RiemannianMetric m{3, {}};
  for (const auto& row : g) {
    std::vector<Expr> r;
    for (double v : row) r.push_back(Expr::constant(v));
    m.g.push_back(std::move(r));
  }
  return m;
}

MetricSpec conformal_riemannian(double c, int dim) {
  const Expr conf = Expr::pow(Expr::constant(1.0) + Expr::constant(c) * Expr::symbol("x1"), 2.0);
  RiemannianMetric m{dim, {}};
  for (int i = 0; i < dim; ++i) {
    std::vector<Expr> row;
    for (int j = 0; j < dim; ++j) row.push_back(i == j ? conf : Expr::constant(0.0));
    m.g.push_back(std::move(row));
  }
  return m;
}

MetricSpec randers_generic() {
  RandersMetric m{3, {}, {}};
  for (int i = 0; i < 3; ++i) {
    std::vector<Expr> row;
    for (int j = 0; j < 3; ++j) row.push_back(Expr::constant(i == j ? 1.0 : 0.0));
    m.a.push_back(std::move(row));
  }
  const Expr x1 = Expr::symbol("x1"), x2 = Expr::symbol("x2"), x3 = Expr::symbol("x3");
  m.b = {Expr::constant(0.1) + Expr::constant(0.2) * x2,
         Expr::constant(-0.15) * x1 + Expr::constant(0.05) * x3 * x3,
         Expr::constant(0.05) + Expr::constant(0.1) * x1 * x2};
  return m;
}

MetricSpec funk_ball3() { return FunkBall3Metric{}; }

Family42Metric family42_default() {
  Family42Metric m;
  m.dim = 3;
  m.a = 1.0;
  m.b = 1.0;
  m.lambda = 2.0;
  m.s0 = 1.0;
  m.h = Expr::constant(0.5);
  m.f_const = 1.0;
  return m;
}

MetricSpec family42(double lambda, double b, double a) {
  Family42Metric m = family42_default();
  m.lambda = lambda;
  m.b = b;
  m.a = a;
  return m;
}

MetricSpec spherical_generic() {
  const Expr s = Expr::symbol("s");
  return SphericallySymmetricMetric{3, Expr::constant(1.0) + Expr::constant(0.2) * s * s, 1.0};
}

MetricSpec spherical_quadratic() {
  const Expr s = Expr::symbol("s");
  return SphericallySymmetricMetric{
      3, Expr::sqrt(Expr::constant(1.0) + s * s) + Expr::constant(0.3) * s, 1.0};
}

}  // namespace zoo

Family42SearchResult search_family42(double a, double b, double lambda,
                                     std::span<const double> s0_grid,
                                     std::span<const double> h_grid,
                                     std::span<const double> f_grid,
                                     std::span<const SamplePoint> points) {
  if (points.empty()) throw std::invalid_argument("search_family42: no sample points");
  Family42SearchResult best;
  best.validated_fraction = -1.0;
  for (double s0 : s0_grid)
    for (double h : h_grid)
      for (double f : f_grid) {
        Family42Metric m;
        m.dim = static_cast<int>(points.front().x.size());
        m.a = a;
        m.b = b;
        m.lambda = lambda;
        m.s0 = s0;
        m.h = Expr::constant(h);
        m.f_const = f;
        const auto report = validate(MetricSpec{m}, points);
        const double frac = static_cast<double>(report.ok_count()) / points.size();
        ++best.candidates;
        if (frac > best.validated_fraction) {
          best.validated_fraction = frac;
          best.best = m;
        }
      }
  return best;
}

}  // namespace finsler
