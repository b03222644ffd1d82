#include "finsler/projective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "finsler/errors.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

namespace {

using V = Variance;
using Idx = std::span<const int>;

double norm(const JetTensor& t) { return t.empty() ? 0.0 : t.max_abs(); }

double diff_norm(const JetTensor& a, const JetTensor& b) {
  return a.empty() || b.empty() ? 0.0 : max_abs_diff(a, b);
}

}  // namespace

ProjectiveFactor ProjectiveFactor::zero() { return {}; }

ProjectiveFactor ProjectiveFactor::linear_form(std::vector<Expr> b) {
  for (const auto& e : b)
    if (!e.depends_only_on_x()) throw ConfigError("linear_form coefficients must depend on x only");
  ProjectiveFactor p;
  p.kind_ = Kind::linear_form;
  p.b_ = std::move(b);
  return p;
}

ProjectiveFactor ProjectiveFactor::scaled_F(double c, MetricSpec spec) {
  ProjectiveFactor p;
  p.kind_ = Kind::scaled_F;
  p.c_ = c;
  p.spec_ = std::make_shared<const MetricSpec>(std::move(spec));
  return p;
}

ProjectiveFactor ProjectiveFactor::expression(Expr e) {
  ProjectiveFactor p;
  p.kind_ = Kind::expression;
  p.expr_ = std::move(e);
  return p;
}

ProjectiveFactor ProjectiveFactor::sum(ProjectiveFactor a, ProjectiveFactor b) {
  ProjectiveFactor p;
  p.kind_ = Kind::sum;
  p.terms_ = {std::move(a), std::move(b)};
  return p;
}

std::string ProjectiveFactor::describe() const {
  switch (kind_) {
    case Kind::zero: return "P = 0";
    case Kind::linear_form: return "P = b_i(x) y^i";
    case Kind::scaled_F: return "P = " + std::to_string(c_) + " F";
    case Kind::expression: return "P = " + to_json(expr_).dump();
    case Kind::sum: return "(" + terms_[0].describe() + ") + (" + terms_[1].describe() + ")";
  }
  return "?";
}

template <class T>
T ProjectiveFactor::eval(std::span<const T> x, std::span<const T> y) const {
  switch (kind_) {
    case Kind::zero: return y[0] * 0.0;
    case Kind::linear_form: {
      if (b_.size() != y.size()) throw std::invalid_argument("linear_form has the wrong length");
      ExprContext<T> ctx(x, y);
      T acc = evaluate(b_[0], ctx) * y[0];
      for (std::size_t i = 1; i < b_.size(); ++i) acc = acc + evaluate(b_[i], ctx) * y[i];
      return acc;
    }
    case Kind::scaled_F: return finsler_norm<T>(*spec_, x, y) * c_;
    case Kind::expression: {
      ExprContext<T> ctx(x, y);
      return evaluate(expr_, ctx);
    }
    case Kind::sum: return terms_[0].eval<T>(x, y) + terms_[1].eval<T>(x, y);
  }
  throw std::logic_error("unknown projective factor kind");
}

double ProjectiveFactor::value(std::span<const double> x, std::span<const double> y) const {
  const double v = eval<double>(x, y);
  if (!std::isfinite(v)) throw DomainError("projective factor is not finite at the point");
  return v;
}

Jet ProjectiveFactor::jet(std::span<const double> x, std::span<const double> y,
                          const JetConfig& config) const {
  value(x, y);  // domain checks
  const Seeds s = seed_point(x, y, config);
  return eval<Jet>(s.x, s.y);
}

void ProjectiveFactor::validate(std::span<const double> x, std::span<const double> y) const {
  const double p = value(x, y);
  for (double t : {0.5, 2.0}) {
    std::vector<double> ty(y.begin(), y.end());
    for (double& v : ty) v *= t;
    const double pt = value(x, ty);
    if (std::abs(pt - t * p) > 1e-10 * std::max(std::abs(t * p), 1e-300) &&
        std::abs(pt - t * p) > 1e-14)
      throw ValidationError("projective factor is not positively 1-homogeneous in y");
  }
}

ProjectiveFactor parse_factor(const nlohmann::json& doc, const MetricSpec& metric) {
  if (!doc.is_object() || !doc.contains("kind"))
    throw ConfigError("projective factor needs a \"kind\" field");
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "zero") return ProjectiveFactor::zero();
  if (kind == "linear_form") {
    const auto& b = doc.at("b");
    if (!b.is_array() || static_cast<int>(b.size()) != metric_dim(metric))
      throw ConfigError("linear_form needs \"b\" with one entry per dimension");
    std::vector<Expr> coeffs;
    for (const auto& e : b) coeffs.push_back(parse_expr(e));
    return ProjectiveFactor::linear_form(std::move(coeffs));
  }
  if (kind == "scaled_F") {
    if (!doc.contains("c") || !doc.at("c").is_number())
      throw ConfigError("scaled_F needs a numeric \"c\"");
    return ProjectiveFactor::scaled_F(doc.at("c").get<double>(), metric);
  }
  if (kind == "expression") return ProjectiveFactor::expression(parse_expr(doc.at("expr")));
  if (kind == "sum") {
    const auto& t = doc.at("terms");
    if (!t.is_array() || t.empty()) throw ConfigError("sum needs a non-empty \"terms\" array");
    ProjectiveFactor acc = parse_factor(t.front(), metric);
    for (std::size_t k = 1; k < t.size(); ++k) acc = ProjectiveFactor::sum(acc, parse_factor(t[k], metric));
    return acc;
  }
  throw ConfigError("unknown projective factor kind '" + kind + "'");
}

nlohmann::json to_json(const ProjectiveFactor& p) {
  nlohmann::json out;
  switch (p.kind_) {
    case ProjectiveFactor::Kind::zero:
      out["kind"] = "zero";
      break;
    case ProjectiveFactor::Kind::linear_form:
      out["kind"] = "linear_form";
      out["b"] = nlohmann::json::array();
      for (const auto& e : p.b_) out["b"].push_back(to_json(e));
      break;
    case ProjectiveFactor::Kind::scaled_F:
      out["kind"] = "scaled_F";
      out["c"] = p.c_;
      break;
    case ProjectiveFactor::Kind::expression:
      out["kind"] = "expression";
      out["expr"] = to_json(p.expr_);
      break;
    case ProjectiveFactor::Kind::sum:
      out["kind"] = "sum";
      out["terms"] = nlohmann::json::array();
      for (const auto& t : p.terms_) out["terms"].push_back(to_json(t));
      break;
  }
  return out;
}

SpraySource apply_projective_change(const SpraySource& source, const ProjectiveFactor& P) {
  P.validate(source.x, source.y);
  const JetConfig cfg = source.G.front().config();
  const Jet p = P.jet(source.x, source.y, cfg);
  std::vector<Jet> G;
  for (int i = 0; i < source.dim; ++i) G.push_back(source.G[i] + p * source.y_seed[i]);

  double scale = 0.0, err = 0.0;
  for (int i = 0; i < source.dim; ++i) {
    double euler = 0.0;
    for (int m = 0; m < source.dim; ++m) euler += G[i].d_dy(m).value() * source.y[m];
    err = std::max(err, std::abs(euler - 2.0 * G[i].value()));
    scale = std::max(scale, std::abs(G[i].value()));
  }
  if (err > 1e-10 * std::max(scale, 1e-14) && err > 1e-14)
    throw ValidationError("changed spray is not 2-homogeneous");

  SpraySource out = explicit_spray(std::move(G), source.x, source.y, source.F);
  out.metric = source.metric;
  return out;
}

RiemannRelationReport check_riemann_relation(const SpraySource& source, const ProjectiveFactor& P,
                                             LemmaConnection used) {
  const int n = source.dim;
  const SpraySource changed = apply_projective_change(source, P);
  const BerwaldConnection c = berwald_connection(source);
  const BerwaldConnection cb = berwald_connection(changed);
  const JetTensor R = compute_riemann(c).Rik;
  const JetTensor Rb = compute_riemann(cb).Rik;
  const Jet p = P.jet(source.x, source.y, source.G.front().config());
  const JetTensor pt = JetTensor::scalar(p);

  auto evaluate_with = [&](const BerwaldConnection& conn) {
    const JetTensor p_k = horizontal_full(pt, conn);
    const Jet p_0 = horizontal_0(pt, conn).flat(0);
    const Jet xi = p * p - p_0;
    const JetTensor tau = make_tensor(n, {V::down}, [&](Idx idx) {
      const int k = idx[0];
      return 3.0 * (p_k(k) - p * p.d_dy(k)) + xi.d_dy(k);
    });
    double res = 0.0, scale = std::max({norm(R), norm(Rb), std::abs((p * p).value()),
                                        std::abs(p_0.value())});
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double ty = tau(k).value() * source.y[i];
        scale = std::max(scale, std::abs(ty));
        const double pred = R(i, k).value() + (i == k ? xi.value() : 0.0) + ty;
        res = std::max(res, std::abs(Rb(i, k).value() - pred));
      }
    return make_residual(res, scale);
  };

  RiemannRelationReport rep;
  rep.used = used;
  rep.source = evaluate_with(c);
  rep.barred = evaluate_with(cb);
  return rep;
}

InvarianceReport check_invariants_under_change(const SpraySource& source,
                                               const ProjectiveFactor& P) {
  const CurvatureBundle a = build_bundle(source, Depth::curvature);
  const CurvatureBundle b = build_bundle(apply_projective_change(source, P), Depth::curvature);
  InvarianceReport rep;
  rep.D = make_residual(diff_norm(a.D, b.D),
                        std::max({norm(a.D), norm(a.berwald.B), norm(b.berwald.B)}));
  if (a.has_weyl) {
    const double kappa = std::max(curvature_scale(a), curvature_scale(b));
    rep.W = make_residual(diff_norm(a.weyl.W, b.weyl.W),
                          std::max({norm(a.weyl.W), norm(b.weyl.W), kappa}));
    rep.Wt = make_residual(diff_norm(a.weyl.Wt, b.weyl.Wt),
                           std::max({norm(a.weyl.Wt), weyl_scale(a), weyl_scale(b)}));
  }
  return rep;
}

const char* closure_status_name(ClosureStatus s) {
  switch (s) {
    case ClosureStatus::pass: return "pass";
    case ClosureStatus::fail: return "fail";
    case ClosureStatus::vacuous: return "vacuous";
    case ClosureStatus::hypothesis_not_met: return "hypothesis_not_met";
  }
  return "?";
}

WeaklyWeylClosureReport check_weakly_weyl_closure(const SpraySource& source,
                                                  const ProjectiveFactor& P,
                                                  const Tolerances& tol) {
  const CurvatureBundle a = build_bundle(source, Depth::flow);
  if (!a.has_weyl) throw DimensionError("weakly-Weyl closure needs n >= 3");
  const PointClassification pc = classify_point(a, tol);
  WeaklyWeylClosureReport rep;
  rep.P = P.value(source.x, source.y);
  const auto& flag = pc[Flag::weakly_weyl];
  if (!flag.pass) {
    rep.status = ClosureStatus::hypothesis_not_met;
    return rep;
  }
  if (flag.vacuous) {
    rep.status = ClosureStatus::vacuous;
    return rep;
  }
  const CurvatureBundle b = build_bundle(apply_projective_change(source, P), Depth::curvature);
  const JetTensor omega = omega_tensor(a);
  const auto w = omega.values();
  const auto h0 = horizontal_0(omega, a.conn).values();
  const auto hb = horizontal_0(omega, b.conn).values();
  double res = 0.0, scale = 0.0, num = 0.0, den = 0.0, om = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    res = std::max(res, std::abs(hb[k] - (h0[k] - rep.P * w[k])));
    scale = std::max({scale, std::abs(hb[k]), std::abs(h0[k])});
    om = std::max(om, std::abs(w[k]));
    num += hb[k] * w[k];
    den += w[k] * w[k];
  }
  rep.relation = make_residual(res, std::max(scale, std::abs(rep.P) * om));
  rep.muF = pc.mu * a.F.value();
  rep.muF_bar = -num / den;
  rep.mu_law = make_residual(std::abs(rep.muF_bar - (rep.muF + rep.P)),
                             std::max(std::abs(rep.muF), std::abs(rep.P)));
  const double t = tol.get("weakly_weyl_closure");
  rep.status = rep.relation.rel <= t && rep.mu_law.rel <= t ? ClosureStatus::pass
                                                            : ClosureStatus::fail;
  return rep;
}

GwwClosureReport check_gww_closure(const SpraySource& source, const ProjectiveFactor& P,
                                   const Tolerances& tol) {
  const int n = source.dim;
  const SpraySource changed = apply_projective_change(source, P);
  const CurvatureBundle a = build_bundle(source, Depth::flow);
  const CurvatureBundle b = build_bundle(changed, Depth::flow);
  if (!a.has_weyl) throw DimensionError("generalized weakly-Weyl closure needs n >= 3");
  const double p = P.value(source.x, source.y);
  const Jet pj = P.jet(source.x, source.y, source.G.front().config());
  std::vector<double> p_r(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) p_r[r] = pj.d_dy(r).value();

  GwwClosureReport rep;
  const JetTensor& Wt = a.weyl.Wt;
  double res = 0.0;
  // W~|0 is assembled from terms of size F SW, so that enters the scale
  double scale = std::max({norm(b.Wt_h0), norm(a.Wt_h0), std::abs(p) * norm(Wt),
                           a.F.value() * std::max(weyl_scale(a), weyl_scale(b))});
  for_each_index(n, 4, [&](Idx idx) {
    const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
    double pr = 0.0;
    for (int r = 0; r < n; ++r) pr += p_r[r] * Wt(j, r, k, l).value();
    scale = std::max(scale, std::abs(pr * source.y[i]));
    const double rhs = a.Wt_h0(j, i, k, l).value() + pr * source.y[i] - 2.0 * p * Wt(j, i, k, l).value();
    res = std::max(res, std::abs(b.Wt_h0(j, i, k, l).value() - rhs));
  });
  rep.expansion = make_residual(res, scale);

  const PointClassification pa = classify_point(a, tol);
  const PointClassification pb = classify_point(b, tol);
  const auto& fa = pa[Flag::generalized_weakly_weyl];
  const auto& fb = pb[Flag::generalized_weakly_weyl];
  if (fa.vacuous) {
    rep.law_status = ClosureStatus::vacuous;
  } else if (!fa.pass || !fb.pass || pa.gww_rank < n + 1 || pb.gww_rank < n + 1) {
    // the fitted (mu, lambda) are only unique at full rank
    rep.law_status = ClosureStatus::hypothesis_not_met;
  } else {
    const double F = a.F.value();
    rep.mu_law = make_residual(std::abs(pb.gww_mu * F - (pa.gww_mu * F + 2.0 * p)),
                               std::max(std::abs(pa.gww_mu * F), std::abs(p)));
    double lres = 0.0, lscale = 0.0;
    for (int r = 0; r < n; ++r) {
      lres = std::max(lres, std::abs(pb.gww_lambda[r] - (pa.gww_lambda[r] + p_r[r])));
      lscale = std::max({lscale, std::abs(pa.gww_lambda[r]), std::abs(p_r[r])});
    }
    rep.lambda_law = make_residual(lres, lscale);
    const double t = tol.get("gww_closure");
    rep.law_status = rep.mu_law.rel <= t && rep.lambda_law.rel <= t ? ClosureStatus::pass
                                                                     : ClosureStatus::fail;
  }
  return rep;
}

WitnessResult search_witness(WitnessKind kind, std::uint64_t seed, int trials,
                             const Tolerances& tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-0.2, 0.2);
  WitnessResult out;
  out.best_score = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    RandersMetric m{3, {}, {}};
    for (int i = 0; i < 3; ++i) {
      std::vector<Expr> row;
      for (int j = 0; j < 3; ++j) row.push_back(Expr::constant(i == j ? 1.0 : 0.0));
      m.a.push_back(std::move(row));
    }
    for (int i = 0; i < 3; ++i) {
      Expr bi = Expr::constant(coef(rng));
      for (int j = 0; j < 3; ++j)
        bi = bi + Expr::constant(coef(rng)) * Expr::symbol(Symbol{SymbolKind::x, j});
      bi = bi + Expr::constant(coef(rng)) * Expr::symbol(Symbol{SymbolKind::x, i}) *
                    Expr::symbol(Symbol{SymbolKind::x, (i + 1) % 3});
      m.b.push_back(bi);
    }
    const MetricSpec spec = m;
    ++out.trials;
    SamplerConfig sc;
    sc.seed = rng();
    sc.count = 3;
    sc.min_points = 3;
    double score = 0.0;
    bool witness = true;
    try {
      const auto samples = sample_points(spec, sc);
      for (const auto& p : samples.points) {
        const auto pc = classify_point(build_bundle(spec, p.x, p.y, Depth::flow), tol);
        if (kind == WitnessKind::nonvacuous_weakly_weyl) {
          const auto& f = pc[Flag::weakly_weyl];
          score = std::max(score, f.vacuous ? std::numeric_limits<double>::infinity()
                                            : std::max(f.primary.rel, f.secondary.rel));
          witness = witness && f.pass && !f.vacuous;
        } else {
          const auto& g = pc[Flag::generalized_weakly_weyl];
          const auto& d = pc[Flag::gdw];
          score = std::max(score, g.vacuous ? std::numeric_limits<double>::infinity()
                                            : g.primary.rel);
          witness = witness && g.pass && !g.vacuous && !d.pass;
        }
      }
    } catch (const Error&) {
      continue;
    }
    if (score < out.best_score) {
      out.best_score = score;
      out.best = spec;
    }
    if (witness) {
      out.found = true;
      out.best = spec;
      out.best_score = score;
      break;
    }
  }
  return out;
}

}  // namespace finsler
