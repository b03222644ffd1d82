#include "finsler/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

using V = Variance;
using Idx = std::span<const int>;

const char* kFlagNames[kFlagCount] = {
    "berwald", "weakly_berwald", "isotropic_mean_berwald", "douglas",           "weyl",
    "w_quadratic", "weakly_weyl", "gdw", "generalized_weakly_weyl",
};

double norm(const JetTensor& t) { return t.empty() ? 0.0 : t.max_abs(); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void decide(FlagResult& f, double tol) {
  f.pass = f.primary.rel <= tol && f.secondary.rel <= tol;
}

}  // namespace

Residual make_residual(double abs, double scale) {
  return {abs, scale, abs / std::max(scale, kScaleFloor)};
}

double Tolerances::get(const std::string& name) const {
  const auto it = overrides.find(name);
  return it == overrides.end() ? rel : it->second;
}

double Tolerances::get(const std::string& name, double fallback) const {
  const auto it = overrides.find(name);
  return it == overrides.end() ? fallback : it->second;
}

const char* flag_name(Flag f) { return kFlagNames[static_cast<std::size_t>(f)]; }

bool parse_flag(const std::string& name, Flag& out) {
  for (Flag f : kAllFlags)
    if (name == flag_name(f)) {
      out = f;
      return true;
    }
  return false;
}

double weyl_scale(const CurvatureBundle& b) {
  const double F = b.F.value();
  return std::max({norm(b.weyl.Wjikl), norm(b.riemann.Rjikl), curvature_scale(b) / (F * F)});
}

JetTensor omega_tensor(const CurvatureBundle& b) {
  if (!b.has_weyl) throw DimensionError("omega needs the Weyl family (n >= 3)");
  const int n = b.dim;
  const Jet invF = reciprocal(b.F);
  return make_tensor(n, {V::down, V::down, V::down}, [&](Idx idx) {
    Jet acc = b.weyl.Wt(idx[0], 0, idx[1], idx[2]) * b.ell(0);
    for (int i = 1; i < n; ++i) acc += b.weyl.Wt(idx[0], i, idx[1], idx[2]) * b.ell(i);
    return acc * invF;
  });
}

PointClassification classify_point(const CurvatureBundle& b, const Tolerances& tol) {
  if (b.depth == Depth::curvature)
    throw TruncationError("classification needs a bundle of flow depth (D|0, W~|0)");
  const int n = b.dim;
  PointClassification pc;
  pc.x = b.x;
  pc.y = b.y;
  pc.companion_metric = b.companion_metric;
  const double F = b.F.value();
  const double gamma = norm(b.conn.Gamma);
  const double kappa = curvature_scale(b);  // 2-homogeneous

  // Berwald family
  {
    auto& f = pc[Flag::berwald];
    f.primary = make_residual(F * norm(b.berwald.B), gamma);
    decide(f, tol.get("berwald"));
  }
  {
    auto& f = pc[Flag::weakly_berwald];
    f.primary = make_residual(F * norm(b.berwald.E), gamma);
    decide(f, tol.get("weakly_berwald"));
  }
  {
    // E_ij = (n+1)/2 c F^-1 h_ij, c from projecting E onto h
    const auto E = b.berwald.E.values();
    const auto h = b.h.values();
    double eh = 0.0, hh = 0.0;
    for (std::size_t k = 0; k < E.size(); ++k) {
      eh += E[k] * h[k];
      hh += h[k] * h[k];
    }
    pc.c = hh > 0.0 ? 2.0 * F / (n + 1) * eh / hh : 0.0;
    double off = 0.0;
    for (std::size_t k = 0; k < E.size(); ++k)
      off = std::max(off, std::abs(E[k] - 0.5 * (n + 1) * pc.c * h[k] / F));
    auto& f = pc[Flag::isotropic_mean_berwald];
    f.primary = make_residual(F * off, gamma);
    decide(f, tol.get("isotropic_mean_berwald"));
  }
  {
    auto& f = pc[Flag::douglas];
    f.primary = make_residual(norm(b.D), norm(b.berwald.B));
    decide(f, tol.get("douglas"));
  }
  {
    // T_jkl = D_j^m_kl|0 l_m / F
    const auto l = b.ell.values();
    pc.T.assign(static_cast<std::size_t>(n * n * n), 0.0);
    double res = 0.0;
    for_each_index(n, 3, [&](Idx idx) {
      const int j = idx[0], k = idx[1], ll = idx[2];
      double t = 0.0;
      for (int m = 0; m < n; ++m) t += b.D_h0(j, m, k, ll).value() * l[m];
      pc.T[static_cast<std::size_t>((j * n + k) * n + ll)] = t / F;
    });
    for_each_index(n, 4, [&](Idx idx) {
      const int j = idx[0], i = idx[1], k = idx[2], ll = idx[3];
      res = std::max(res, std::abs(b.D_h0(j, i, k, ll).value() -
                                   pc.T[static_cast<std::size_t>((j * n + k) * n + ll)] * b.y[i]));
    });
    auto& f = pc[Flag::gdw];
    f.primary = make_residual(
        res, std::max({norm(b.D_h0), F * norm(b.D) * gamma, F * norm(b.berwald.B) * gamma}));
    decide(f, tol.get("gdw"));
  }

  if (!b.has_weyl) {
    for (Flag fl : {Flag::weyl, Flag::w_quadratic, Flag::weakly_weyl,
                    Flag::generalized_weakly_weyl}) {
      pc[fl].applicable = false;
      pc[fl].pass = false;
    }
    return pc;
  }

  const auto& w = b.weyl;
  const double SW = weyl_scale(b);
  {
    auto& f = pc[Flag::weyl];
    f.primary = make_residual(norm(w.W), std::max(norm(b.riemann.Rik), kappa));
    decide(f, tol.get("weyl"));
  }
  {
    const JetTensor d3 = vertical(vertical(vertical(w.W)));
    const JetTensor dW = vertical(w.W);  // [i][k][m]
    // Omega_l^i_km = 1/3 (W^i_m.k - W^i_k.m)_.l, stored [l][i][k][m]
    const JetTensor skew = make_tensor(n, {V::up, V::down, V::down}, [&](Idx idx) {
      return (dW(idx[0], idx[2], idx[1]) - dW(idx[0], idx[1], idx[2])) * (1.0 / 3.0);
    });
    const JetTensor dskew = vertical(skew);  // [i][k][m][l]
    pc.Omega.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
    for_each_index(n, 4, [&](Idx idx) {
      const int l = idx[0], i = idx[1], k = idx[2], m = idx[3];
      pc.Omega[static_cast<std::size_t>(((l * n + i) * n + k) * n + m)] =
          dskew(i, k, m, l).value();
    });
    double rec = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double s = w.W(i, k).value();
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m)
            s += pc.Omega[static_cast<std::size_t>(((l * n + i) * n + k) * n + m)] * b.y[l] *
                 b.y[m];
        rec = std::max(rec, std::abs(s));
      }
    pc.Omega_reconstruction = rec;
    auto& f = pc[Flag::w_quadratic];
    f.primary = make_residual(F * norm(d3), SW);
    f.secondary = make_residual(norm(w.Wt), SW);
    decide(f, tol.get("w_quadratic"));
  }
  {
    const JetTensor omega = omega_tensor(b);
    pc.omega = omega.values();
    double ext = 0.0;
    for_each_index(n, 4, [&](Idx idx) {
      const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
      ext = std::max(ext, std::abs(w.Wt(j, i, k, l).value() -
                                   pc.omega[static_cast<std::size_t>((j * n + k) * n + l)] * b.y[i]));
    });
    auto& f = pc[Flag::weakly_weyl];
    f.primary = make_residual(ext, std::max(norm(w.Wt), SW));
    const double om = max_abs(pc.omega);
    if (F * om <= tol.get("weakly_weyl") * std::max(SW, kScaleFloor)) {
      f.vacuous = true;
      pc.mu = 0.0;
    } else {
      const auto oh = horizontal_0(omega, b.conn).values();
      double num = 0.0, den = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t k = 0; k < oh.size(); ++k) {
        num += oh[k] * pc.omega[k];
        den += pc.omega[k] * pc.omega[k];
        if (std::abs(pc.omega[k]) >= 1e-9 * om) {
          const double est = -oh[k] / (F * pc.omega[k]);
          lo = std::min(lo, est);
          hi = std::max(hi, est);
        }
      }
      pc.mu = -num / (F * den);
      pc.mu_spread = hi - lo;
      double fit = 0.0;
      for (std::size_t k = 0; k < oh.size(); ++k)
        fit = std::max(fit, std::abs(oh[k] + pc.mu * F * pc.omega[k]));
      f.secondary = make_residual(fit, std::max(max_abs(oh), std::abs(pc.mu) * F * om));
    }
    decide(f, tol.get("weakly_weyl"));
  }
  {
    // W~|0 + mu F W~ - lambda_r W~_j^r_kl y^i = 0, least squares in (mu, lambda)
    auto& f = pc[Flag::generalized_weakly_weyl];
    pc.gww_lambda.assign(static_cast<std::size_t>(n), 0.0);
    const double wt = norm(w.Wt);
    if (wt <= tol.get("generalized_weakly_weyl") * std::max(SW, kScaleFloor)) {
      f.vacuous = true;
      f.primary = make_residual(norm(b.Wt_h0), std::max(SW, norm(b.Wt_h0)));
    } else {
      const int rows = n * n * n * n;
      Eigen::MatrixXd A(rows, n + 1);
      Eigen::VectorXd rhs(rows);
      int r = 0;
      for_each_index(n, 4, [&](Idx idx) {
        const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
        A(r, 0) = F * w.Wt(j, i, k, l).value();
        for (int s = 0; s < n; ++s) A(r, 1 + s) = -w.Wt(j, s, k, l).value() * b.y[i];
        rhs(r) = -b.Wt_h0(j, i, k, l).value();
        ++r;
      });
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
      cod.setThreshold(1e-10);
      const Eigen::VectorXd sol = cod.solve(rhs);
      pc.gww_rank = static_cast<int>(cod.rank());
      pc.gww_mu = sol(0);
      for (int s = 0; s < n; ++s) pc.gww_lambda[static_cast<std::size_t>(s)] = sol(1 + s);
      const double res = (A * sol - rhs).cwiseAbs().maxCoeff();
      f.primary = make_residual(res, std::max(norm(b.Wt_h0), F * wt));
    }
    decide(f, tol.get("generalized_weakly_weyl"));
  }
  return pc;
}

ClassificationReport aggregate_classification(std::vector<PointClassification> points,
                                              const Tolerances& tol) {
  ClassificationReport rep;
  rep.points = std::move(points);
  for (Flag fl : kAllFlags) {
    auto& a = rep.aggregate[static_cast<std::size_t>(fl)];
    a.tolerance = tol.get(flag_name(fl));
    if (rep.points.empty()) continue;
    a.applicable = rep.points.front()[fl].applicable;
    a.verdict = a.applicable;
    a.all_vacuous = a.applicable;
    a.clearly_violated = a.applicable;
    a.min_rel = std::numeric_limits<double>::infinity();
    a.max_rel = 0.0;
    double sum = 0.0;
    for (const auto& p : rep.points) {
      const auto& f = p[fl];
      const double rel = std::max(f.primary.rel, f.secondary.rel);
      a.min_rel = std::min(a.min_rel, rel);
      a.max_rel = std::max(a.max_rel, rel);
      sum += rel;
      a.verdict = a.verdict && f.pass;
      a.all_vacuous = a.all_vacuous && f.vacuous;
      a.clearly_violated = a.clearly_violated && rel >= tol.nonzero;
      if (f.pass) ++a.passed;
    }
    a.mean_rel = sum / rep.points.size();
  }
  auto v = [&](Flag f) { return rep[f].applicable && rep[f].verdict; };
  auto imp = [&](const char* name, bool lhs, bool rhs) {
    rep.implications.push_back({name, !lhs || rhs});
    rep.implications_ok = rep.implications_ok && (!lhs || rhs);
  };
  imp("berwald => douglas and weakly_berwald", v(Flag::berwald),
      v(Flag::douglas) && v(Flag::weakly_berwald));
  if (rep[Flag::weyl].applicable) {
    imp("weyl => weakly_weyl", v(Flag::weyl), v(Flag::weakly_weyl));
    imp("w_quadratic => weakly_weyl", v(Flag::w_quadratic), v(Flag::weakly_weyl));
    imp("weakly_weyl => generalized_weakly_weyl and gdw", v(Flag::weakly_weyl),
        v(Flag::generalized_weakly_weyl) && v(Flag::gdw));
  }
  return rep;
}

ClassificationReport classify_metric(const MetricSpec& spec, const SamplerConfig& sampler,
                                     const Tolerances& tol,
                                     const std::optional<JetConfig>& f2) {
  SampleSet samples = sample_points(spec, sampler);
  std::vector<PointClassification> pts(samples.points.size());
  parallel_for(static_cast<int>(pts.size()), [&](int k) {
    const auto& p = samples.points[static_cast<std::size_t>(k)];
    pts[static_cast<std::size_t>(k)] = classify_point(
        f2 ? build_bundle(spec, p.x, p.y, Depth::flow, *f2) : build_bundle(spec, p.x, p.y, Depth::flow),
        tol);
  });
  ClassificationReport rep = aggregate_classification(std::move(pts), tol);
  rep.family = family_name(spec);
  rep.samples = std::move(samples);
  return rep;
}

}  // namespace finsler
