#include "finsler/verify.hpp"

#include <algorithm>
#include <cmath>

#include "finsler/errors.hpp"
#include "finsler/jet_linalg.hpp"

namespace finsler {

namespace {

using V = Variance;
using Idx = std::span<const int>;

double norm(const JetTensor& t) { return t.empty() ? 0.0 : t.max_abs(); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void require_weyl(const CurvatureBundle& b) {
  if (!b.has_weyl) throw DimensionError("this check needs the Weyl family (n >= 3)");
}

void require_depth(const CurvatureBundle& b, Depth d) {
  if (static_cast<int>(b.depth) < static_cast<int>(d))
    throw TruncationError("bundle is not deep enough for this check");
}

/// Tracks max |lhs - rhs| and the largest participating magnitude.
struct Acc {
  double res = 0.0;
  double scale = 0.0;
  void diff(double d) { res = std::max(res, std::abs(d)); }
  void part(double v) { scale = std::max(scale, std::abs(v)); }
  Residual result() const { return make_residual(res, scale); }
};

}  // namespace

const char* check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
    case CheckStatus::hypothesis_not_met: return "hypothesis_not_met";
  }
  return "?";
}

CheckStatus measure_status(const std::vector<Measure>& measures) {
  bool all_small = !measures.empty();
  bool ok = true;
  for (const auto& m : measures) {
    if (m.residual.scale >= kInconclusiveNorm) all_small = false;
    if (!m.passed()) ok = false;
  }
  if (all_small && ok) return CheckStatus::inconclusive;
  return ok ? CheckStatus::pass : CheckStatus::fail;
}

Residual thm13_residual(const CurvatureBundle& b) {
  require_weyl(b);
  require_depth(b, Depth::flow);
  const int n = b.dim;
  Acc a;
  a.part(weyl_scale(b));
  for_each_index(n, 4, [&](Idx idx) {
    const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
    const double wt = b.weyl.Wt(j, i, k, l).value();
    const double d0 = b.D_h0(j, i, k, l).value();
    const double ty = b.theta(j, k, l).value() * b.y[i] / (n + 1);
    a.part(wt);
    a.part(d0);
    a.part(ty);
    a.diff(wt - d0 + ty);
  });
  return a.result();
}

Residual gsakaguchi_residual(const CurvatureBundle& b, const PointClassification& pc) {
  require_weyl(b);
  require_depth(b, Depth::flow);
  const int n = b.dim;
  Acc a;
  a.part(weyl_scale(b));
  for_each_index(n, 4, [&](Idx idx) {
    const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
    const double om = pc.omega[static_cast<std::size_t>((j * n + k) * n + l)];
    const double th = b.theta(j, k, l).value() / (n + 1);
    const double d0 = b.D_h0(j, i, k, l).value();
    a.part(d0);
    a.part(om * b.y[i]);
    a.part(th * b.y[i]);
    a.diff(d0 - (om + th) * b.y[i]);
  });
  return a.result();
}

Residual prop53_residual(const CurvatureBundle& b, double mu, std::span<const double> lambda) {
  require_weyl(b);
  require_depth(b, Depth::deep);
  const int n = b.dim;
  const double F = b.F.value();
  double lambda0 = 0.0;
  for (int r = 0; r < n; ++r) lambda0 += lambda[r] * b.y[r];
  Acc a;
  a.part(F * weyl_scale(b));
  for_each_index(n, 3, [&](Idx idx) {
    const int j = idx[0], k = idx[1], l = idx[2];
    double T = 0.0;
    for (int r = 0; r < n; ++r) T += lambda[r] * b.D_h0(j, r, k, l).value();
    T += (b.theta_h0(j, k, l).value() + (mu * F - lambda0) * b.theta(j, k, l).value()) / (n + 1);
    for (int i = 0; i < n; ++i) {
      const double d00 = b.D_h00(j, i, k, l).value();
      const double d0 = mu * F * b.D_h0(j, i, k, l).value();
      a.part(d00);
      a.part(d0);
      a.part(T * b.y[i]);
      a.diff(d00 + d0 - T * b.y[i]);
    }
  });
  return a.result();
}

Residual theta_symmetry_residual(const CurvatureBundle& b) {
  require_depth(b, Depth::flow);
  const double F = b.F.value();
  Acc a;
  a.part(2.0 * norm(horizontal_full(b.berwald.E, b.conn)));
  a.part(curvature_scale(b) / (F * F * F));
  for_each_index(b.dim, 3, [&](Idx idx) {
    const double t = b.theta(idx[0], idx[1], idx[2]).value();
    a.part(t);
    a.diff(t - b.theta(idx[1], idx[0], idx[2]).value());
  });
  return a.result();
}

Residual douglas_forms_residual(const CurvatureBundle& b) {
  const JetTensor direct = compute_douglas_direct(b.conn);
  return make_residual(max_abs_diff(b.D, direct),
                       std::max({norm(b.D), norm(direct), norm(b.berwald.B)}));
}

RicciIdentities ricci_identities(const CurvatureBundle& b) {
  require_depth(b, Depth::flow);
  const int n = b.dim;
  const auto& B = b.berwald.B;
  const auto& E = b.berwald.E;
  const auto& H = b.berwald.H;
  const JetTensor Bk = horizontal_full(B, b.conn);      // [j][i][m][l][k]
  const JetTensor B0 = horizontal_0(B, b.conn);         // [j][i][k][l]
  const JetTensor Rv = vertical(b.riemann.Rjikl);       // [j][i][k][l][m]
  const JetTensor Ek = horizontal_full(E, b.conn);      // [k][l][m]
  const JetTensor Ev0 = horizontal_0(vertical(E), b.conn);  // [j][l][k]

  // Rtr_ml = R_s^s_ml
  const JetTensor Rtr = make_tensor(n, {V::down, V::down}, [&](Idx idx) {
    Jet acc = b.riemann.Rjikl(0, 0, idx[0], idx[1]);
    for (int s = 1; s < n; ++s) acc += b.riemann.Rjikl(s, s, idx[0], idx[1]);
    return acc;
  });
  const JetTensor Rtr1 = vertical(Rtr);    // [m][l][k]
  const JetTensor Rtr2 = vertical(Rtr1);   // [m][l][j][k]

  // The R side is assembled from summands of size kappa, rescaled to each
  // identity's degree of homogeneity.
  const double F = b.F.value();
  const double k0 = curvature_scale(b) / (F * F);
  const double k1 = k0 / F;

  RicciIdentities out;
  {
    Acc a;
    a.part(k1);
    for_each_index(n, 5, [&](Idx idx) {
      const int j = idx[0], i = idx[1], m = idx[2], k = idx[3], l = idx[4];
      const double lhs = Bk(j, i, m, l, k).value() - Bk(j, i, m, k, l).value();
      const double rhs = Rv(j, i, k, l, m).value();
      a.part(Bk(j, i, m, l, k).value());
      a.part(rhs);
      a.diff(lhs - rhs);
    });
    out.rie_ber = a.result();
  }
  {
    Acc a;
    a.part(k0);
    for_each_index(n, 4, [&](Idx idx) {
      const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
      double lhs = 0.0;
      for (int m = 0; m < n; ++m) lhs += Rv(j, i, m, l, k).value() * b.y[m];
      a.part(lhs);
      a.part(B0(j, i, k, l).value());
      a.diff(lhs - B0(j, i, k, l).value());
    });
    out.rie_e = a.result();
  }
  {
    Acc a;
    a.part(k1);
    for_each_index(n, 3, [&](Idx idx) {
      const int m = idx[0], l = idx[1], k = idx[2];
      const double lhs = Rtr1(m, l, k).value();
      const double rhs = 2.0 * (Ek(k, l, m).value() - Ek(k, m, l).value());
      a.part(lhs);
      a.part(2.0 * Ek(k, l, m).value());
      a.diff(lhs - rhs);
    });
    out.rie_e_trace = a.result();
  }
  {
    Acc a;
    a.part(k0);
    for_each_index(n, 2, [&](Idx idx) {
      const int k = idx[0], l = idx[1];
      double lhs = 0.0;
      for (int m = 0; m < n; ++m) lhs += Rtr1(m, l, k).value() * b.y[m];
      a.part(lhs);
      a.part(2.0 * H(k, l).value());
      a.diff(lhs - 2.0 * H(k, l).value());
    });
    out.rie_h = a.result();
  }
  {
    Acc a;
    a.part(k1);
    for_each_index(n, 3, [&](Idx idx) {
      const int j = idx[0], l = idx[1], k = idx[2];
      double lhs = 0.0;
      for (int m = 0; m < n; ++m) lhs += Rtr2(m, l, j, k).value() * b.y[m];
      const double rhs = 2.0 * (Ev0(j, l, k).value() + Ek(j, k, l).value());
      a.part(lhs);
      a.part(2.0 * Ev0(j, l, k).value());
      a.part(2.0 * Ek(j, k, l).value());
      a.diff(lhs - rhs);
    });
    out.rie_h_dot = a.result();
  }
  return out;
}

SphericalDecomposition decompose_spherical_weyl(const CurvatureBundle& b) {
  require_weyl(b);
  const int n = b.dim;
  const JetTensor& W = b.weyl.W;
  const JetConfig cfg = W(0, 0).config();
  const Seeds sd = seed_point(b.x, b.y, cfg);
  const auto& x = sd.x;
  const auto& y = sd.y;

  Jet u2 = y[0] * y[0], r2 = x[0] * x[0], xy = x[0] * y[0];
  for (int i = 1; i < n; ++i) {
    u2 += y[i] * y[i];
    r2 += x[i] * x[i];
    xy += x[i] * y[i];
  }
  const Jet u = sqrt(u2);
  const Jet s = xy / u;

  SphericalDecomposition out;
  out.u = u.value();
  out.r = std::sqrt(r2.value());
  out.s = s.value();
  const double gap = r2.value() - s.value() * s.value();
  if (gap <= 1e-12 * r2.value()) throw DegenerateError("x and y are parallel");

  // basis[a][i][k]
  std::vector<std::vector<Jet>> basis(5, std::vector<Jet>(static_cast<std::size_t>(n * n)));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const std::size_t ik = static_cast<std::size_t>(i * n + k);
      basis[0][ik] = i == k ? u2 : u2 * 0.0;
      basis[1][ik] = u2 * x[k] * x[i];
      basis[2][ik] = u * y[k] * x[i];
      basis[3][ik] = u * x[k] * y[i];
      basis[4][ik] = y[k] * y[i];
    }
  std::vector<Jet> normal(25), rhs(5);
  for (int p = 0; p < 5; ++p) {
    for (int q = 0; q < 5; ++q) {
      Jet acc = basis[p][0] * basis[q][0];
      for (std::size_t ik = 1; ik < basis[p].size(); ++ik) acc += basis[p][ik] * basis[q][ik];
      normal[static_cast<std::size_t>(p * 5 + q)] = acc;
    }
    Jet acc = basis[p][0] * W.flat(0);
    for (std::size_t ik = 1; ik < basis[p].size(); ++ik) acc += basis[p][ik] * W.flat(ik);
    rhs[static_cast<std::size_t>(p)] = acc;
  }
  const std::vector<Jet> omega = jet_solve(normal, 5, rhs, 1);

  // f_s at fixed r: f_.k x^k = f_s (r^2 - s^2) / u
  auto d_s = [&](const Jet& f) {
    Jet acc = f.d_dy(0) * x[0];
    for (int k = 1; k < n; ++k) acc += f.d_dy(k) * x[k];
    return acc * u / (r2 - s * s);
  };
  std::vector<Jet> omega_s;
  for (int p = 0; p < 5; ++p) {
    omega_s.push_back(d_s(omega[p]));
    out.omega[p] = omega[p].value();
    out.omega_s[p] = omega_s[p].value();
  }

  {
    Acc a;
    a.part(curvature_scale(b));
    for (int ik = 0; ik < n * n; ++ik) {
      double fit = 0.0;
      for (int p = 0; p < 5; ++p) fit += out.omega[p] * basis[p][ik].value();
      a.part(W.flat(ik).value());
      a.diff(W.flat(ik).value() - fit);
    }
    out.fit = a.result();
  }
  const double om_scale = std::max({std::abs(out.omega[0]), std::abs(out.omega[1]) * std::abs(out.s),
                                    std::abs(out.omega[2]), std::abs(out.omega[3]) * std::abs(out.s),
                                    std::abs(out.omega[4])});
  out.omega3_rel = make_residual(std::abs(out.omega[2] + out.s * out.omega[1]), om_scale);
  out.omega5_rel =
      make_residual(std::abs(out.omega[4] + out.s * out.omega[3] + out.omega[0]), om_scale);

  const Jet X1 = omega_s[0] - omega[3];
  const Jet X2 = 2.0 * omega[0] - s * omega_s[0] - omega[4];
  const Jet X3 = omega[3] - s * omega_s[3] - omega_s[4];
  const Jet X3s = d_s(X3);
  const Jet om2s = omega_s[1];
  out.X1 = X1.value();
  out.X2 = X2.value();
  out.X3 = X3.value();

  std::vector<Jet> s_dot;  // s_.j
  for (int j = 0; j < n; ++j) s_dot.push_back(x[j] / u - s * y[j] / u2);
  std::vector<Jet> Al;  // u X1 x_l + X2 y_l
  for (int l = 0; l < n; ++l) Al.push_back(u * X1 * x[l] + X2 * y[l]);

  const double u1 = out.u, u3 = out.u * out.u * out.u;
  auto wedge = [&](int p, int l) {  // x_p y_l - x_l y_p
    return b.x[p] * b.y[l] - b.x[l] * b.y[p];
  };
  auto delta = [](int a, int c) { return a == c ? 1.0 : 0.0; };
  Acc a;
  a.part(3.0 * weyl_scale(b));
  for_each_index(n, 4, [&](Idx idx) {
    const int j = idx[0], i = idx[1], p = idx[2], l = idx[3];
    const double A_lj = Al[l].d_dy(j).value();
    const double A_pj = Al[p].d_dy(j).value();
    const double E_pl = out.X3 / u1 * wedge(p, l);
    const double B_plj = out.omega[1] * (b.x[p] * delta(j, l) - b.x[l] * delta(j, p)) +
                         om2s.value() * wedge(p, l) * s_dot[j].value();
    const double D_plj = out.X3 / u1 * (b.x[p] * delta(j, l) - b.x[l] * delta(j, p)) +
                         (X3s.value() / u1 * s_dot[j].value() - out.X3 / u3 * b.y[j]) * wedge(p, l);
    const double rec = A_lj * delta(i, p) - A_pj * delta(i, l) + E_pl * delta(i, j) +
                       3.0 * B_plj * b.x[i] + D_plj * b.y[i];
    const double lhs = 3.0 * b.weyl.Wjikl(j, i, p, l).value();
    a.part(lhs);
    a.diff(lhs - rec);
  });
  out.wjipl = a.result();
  return out;
}

SphericalDecomposition decompose_spherical_weyl(const MetricSpec& spec, std::span<const double> x,
                                                std::span<const double> y) {
  if (!is_spherically_symmetric(spec))
    throw ConfigError("spherical decomposition needs a spherically symmetric metric");
  return decompose_spherical_weyl(build_bundle(spec, x, y, Depth::curvature));
}

QuadraticFormulaFit fit_quadratic_weyl(const CurvatureBundle& b) {
  require_weyl(b);
  const int n = b.dim;
  double r2 = 0.0;
  for (double v : b.x) r2 += v * v;
  auto delta = [](int a, int c) { return a == c ? 1.0 : 0.0; };
  const auto& x = b.x;
  std::vector<double> T, Wv;
  for_each_index(n, 4, [&](Idx idx) {
    const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
    T.push_back((x[j] * x[l] - r2 * delta(j, l)) * delta(i, k) / (n - 1) -
                (x[j] * x[k] - r2 * delta(j, k)) * delta(i, l) / (n - 1) +
                (x[k] * delta(j, l) - x[l] * delta(j, k)) * x[i]);
    Wv.push_back(b.weyl.Wjikl(j, i, k, l).value());
  });
  double num = 0.0, den = 0.0;
  for (std::size_t q = 0; q < T.size(); ++q) {
    num += T[q] * Wv[q];
    den += T[q] * T[q];
  }
  QuadraticFormulaFit out;
  out.omega2 = den > 0.0 ? num / den : 0.0;
  double res = 0.0;
  for (std::size_t q = 0; q < T.size(); ++q) res = std::max(res, std::abs(Wv[q] - out.omega2 * T[q]));
  out.residual = make_residual(res, std::max(max_abs(Wv), weyl_scale(b)));
  return out;
}

const char* pairing_name(Pairing p) {
  switch (p) {
    case Pairing::free_j: return "free_j";
    case Pairing::free_k: return "free_k";
    case Pairing::free_l: return "free_l";
  }
  return "?";
}

std::map<Pairing, Residual> example42_pairings(const Family42Metric& m, const CurvatureBundle& b) {
  require_weyl(b);
  const int n = b.dim;
  const auto& x = b.x;
  const auto& y = b.y;
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double c =
      4.0 * m.lambda * (m.lambda - 1.0) * m.b * m.b / std::pow(m.a + m.b * r2, 2.0);
  auto delta = [](int a, int e) { return a == e ? 1.0 : 0.0; };
  // closed-form bracket with slots (i; j, k, l)
  auto bracket = [&](int i, int j, int k, int l) {
    return x[j] * x[i] * delta(k, l) + x[k] * x[l] * delta(i, j) / (n - 1) +
           r2 * delta(i, k) * delta(j, l) / (n - 1) - delta(j, l) * x[k] * x[i] -
           r2 * delta(i, j) * delta(k, l) / (n - 1) - x[j] * x[k] * delta(i, l) / (n - 1);
  };
  const double scale = std::max(norm(b.weyl.W), curvature_scale(b));
  std::map<Pairing, Residual> out;
  for (Pairing p : kAllPairings) {
    double res = 0.0;
    for (int i = 0; i < n; ++i)
      for (int f = 0; f < n; ++f) {
        double pred = 0.0;
        for (int a = 0; a < n; ++a)
          for (int e = 0; e < n; ++e) {
            double t = 0.0;
            switch (p) {
              case Pairing::free_j: t = bracket(i, f, a, e); break;
              case Pairing::free_k: t = bracket(i, a, f, e); break;
              case Pairing::free_l: t = bracket(i, a, e, f); break;
            }
            pred += t * y[a] * y[e];
          }
        res = std::max(res, std::abs(b.weyl.W(i, f).value() - c * pred));
      }
    out[p] = make_residual(res, scale);
  }
  return out;
}

// ---------------------------------------------------------------- harness

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "thm13",   "gsakaguchi", "sph-decomp",    "thm15",         "prop53",
      "example42", "ricci",    "douglas-forms", "theta-symmetry"};
  return names;
}

bool is_check_name(const std::string& name) {
  const auto& v = check_names();
  return std::find(v.begin(), v.end(), name) != v.end();
}

namespace {

Measure measure(const std::string& name, const Residual& r, const Tolerances& tol, double def) {
  return Measure{name, r, tol.get(name, def)};
}

Depth depth_for(const std::string& name) {
  if (name == "prop53") return Depth::deep;
  if (name == "sph-decomp" || name == "example42" || name == "douglas-forms")
    return Depth::curvature;
  return Depth::flow;
}

void require_spherical(const MetricSpec& spec, const std::string& name) {
  if (!is_spherically_symmetric(spec))
    throw ConfigError("check '" + name + "' needs a spherically symmetric metric");
}

CheckPoint evaluate_point(const std::string& name, const MetricSpec& spec, const SamplePoint& pt,
                          const Tolerances& tol, const std::optional<JetConfig>& f2) {
  CheckPoint cp;
  cp.x = pt.x;
  cp.y = pt.y;
  const CurvatureBundle b = f2 ? build_bundle(spec, pt.x, pt.y, depth_for(name), *f2)
                               : build_bundle(spec, pt.x, pt.y, depth_for(name));
  auto& ms = cp.measures;

  if (name == "thm13") {
    ms.push_back(measure("thm13", thm13_residual(b), tol, 1e-7));
  } else if (name == "gsakaguchi") {
    const PointClassification pc = classify_point(b, tol);
    const auto& ww = pc[Flag::weakly_weyl];
    cp.values["weakly_weyl_rel"] = std::max(ww.primary.rel, ww.secondary.rel);
    if (!ww.pass) {
      cp.status = CheckStatus::hypothesis_not_met;
      return cp;
    }
    ms.push_back(measure("gsakaguchi", gsakaguchi_residual(b, pc), tol, 1e-7));
  } else if (name == "sph-decomp") {
    const SphericalDecomposition d = decompose_spherical_weyl(b);
    for (int p = 0; p < 5; ++p) cp.values["omega" + std::to_string(p + 1)] = d.omega[p];
    cp.values["X1"] = d.X1;
    cp.values["X2"] = d.X2;
    cp.values["X3"] = d.X3;
    cp.values["r"] = d.r;
    cp.values["s"] = d.s;
    ms.push_back(measure("sph-fit", d.fit, tol, 1e-9));
    ms.push_back(measure("omega3-relation", d.omega3_rel, tol, 1e-8));
    ms.push_back(measure("omega5-relation", d.omega5_rel, tol, 1e-8));
    ms.push_back(measure("wjipl", d.wjipl, tol, 1e-8));
  } else if (name == "thm15") {
    const PointClassification pc = classify_point(b, tol);
    const auto& ww = pc[Flag::weakly_weyl];
    const auto& wq = pc[Flag::w_quadratic];
    cp.values["weakly_weyl"] = ww.pass;
    cp.values["w_quadratic"] = wq.pass;
    cp.values["w_quadratic_rel"] = std::max(wq.primary.rel, wq.secondary.rel);
    if (wq.pass && !ww.pass) {
      // converse direction: W-quadratic must be weakly-Weyl
      ms.push_back(Measure{"converse", ww.primary.rel > ww.secondary.rel ? ww.primary : ww.secondary,
                           tol.get("weakly_weyl")});
    }
    if (!ww.pass) {
      if (ms.empty()) cp.status = CheckStatus::hypothesis_not_met;
      return cp;
    }
    const QuadraticFormulaFit q = fit_quadratic_weyl(b);
    cp.values["omega2"] = q.omega2;
    ms.push_back(Measure{"forward", wq.primary.rel > wq.secondary.rel ? wq.primary : wq.secondary,
                         tol.get("w_quadratic")});
    ms.push_back(measure("thm15-formula", q.residual, tol, 1e-6));
  } else if (name == "prop53") {
    const PointClassification pc = classify_point(b, tol);
    const auto& g = pc[Flag::generalized_weakly_weyl];
    double mu = 0.0;
    std::vector<double> lambda(static_cast<std::size_t>(b.dim), 0.0);
    if (!g.pass) {
      cp.status = CheckStatus::hypothesis_not_met;
      return cp;
    }
    if (!g.vacuous) {
      mu = pc.gww_mu;
      lambda = pc.gww_lambda;
    }
    cp.values["mu"] = mu;
    ms.push_back(measure("prop53", prop53_residual(b, mu, lambda), tol, 1e-6));
  } else if (name == "example42") {
    const auto* m = std::get_if<Family42Metric>(&spec);
    if (!m) throw ConfigError("check 'example42' needs the sph_sym_family42 metric");
    const auto res = example42_pairings(*m, b);
    const double t = tol.get("example42", 1e-6);
    for (const auto& [p, r] : res) {
      cp.values[std::string("pairing_") + pairing_name(p)] = r.rel;
      cp.values[std::string("match_") + pairing_name(p)] = r.rel <= t;
    }
    Family42Metric other = *m;
    other.h = m->h + Expr::constant(0.1) * Expr::symbol("r") * Expr::symbol("r");
    const CurvatureBundle b2 = build_bundle(MetricSpec(other), pt.x, pt.y, Depth::curvature);
    ms.push_back(measure("h-independence",
                         make_residual(max_abs_diff(b.weyl.W, b2.weyl.W),
                                       std::max(norm(b.weyl.W), curvature_scale(b))),
                         tol, 1e-8));
  } else if (name == "ricci") {
    const RicciIdentities r = ricci_identities(b);
    ms.push_back(measure("rie-ber", r.rie_ber, tol, 1e-8));
    ms.push_back(measure("rie-e", r.rie_e, tol, 1e-8));
    ms.push_back(measure("rie-e-trace", r.rie_e_trace, tol, 1e-8));
    ms.push_back(measure("rie-h", r.rie_h, tol, 1e-8));
    ms.push_back(measure("rie-h-dot", r.rie_h_dot, tol, 1e-8));
  } else if (name == "douglas-forms") {
    ms.push_back(measure("douglas-forms", douglas_forms_residual(b), tol, 1e-10));
  } else if (name == "theta-symmetry") {
    ms.push_back(measure("theta-symmetry", theta_symmetry_residual(b), tol, 1e-10));
  } else {
    throw ConfigError("unknown check '" + name + "'");
  }
  cp.status = measure_status(ms);
  return cp;
}

}  // namespace

CheckReport run_check(const std::string& name, const MetricSpec& spec,
                      const std::vector<SamplePoint>& points, const Tolerances& tol,
                      const std::optional<JetConfig>& f2) {
  if (!is_check_name(name)) throw ConfigError("unknown check '" + name + "'");
  if (name == "sph-decomp" || name == "thm15") require_spherical(spec, name);
  if (name == "example42" && !std::holds_alternative<Family42Metric>(spec))
    throw ConfigError("check 'example42' needs the sph_sym_family42 metric");

  CheckReport rep;
  rep.name = name;
  rep.points.resize(points.size());
  parallel_for(static_cast<int>(points.size()), [&](int k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      rep.points[idx] = evaluate_point(name, spec, points[idx], tol, f2);
    } catch (const DomainError& e) {
      rep.points[idx].x = points[idx].x;
      rep.points[idx].y = points[idx].y;
      rep.points[idx].status = CheckStatus::fail;
      rep.points[idx].error = e.what();
    }
    rep.points[idx].index = k;
  });

  int n_pass = 0, n_fail = 0, n_inc = 0, n_hyp = 0;
  for (const auto& p : rep.points) {
    for (const auto& m : p.measures) rep.max_rel = std::max(rep.max_rel, m.residual.rel);
    switch (p.status) {
      case CheckStatus::pass: ++n_pass; break;
      case CheckStatus::fail: ++n_fail; break;
      case CheckStatus::inconclusive: ++n_inc; break;
      case CheckStatus::hypothesis_not_met: ++n_hyp; break;
    }
  }
  rep.summary["points"] = static_cast<double>(rep.points.size());
  rep.summary["passed"] = n_pass;
  rep.summary["failed"] = n_fail;
  rep.summary["inconclusive"] = n_inc;
  rep.summary["hypothesis_not_met"] = n_hyp;
  rep.summary["max_rel"] = rep.max_rel;

  if (n_fail > 0)
    rep.status = CheckStatus::fail;
  else if (n_pass > 0)
    rep.status = CheckStatus::pass;
  else if (n_hyp > 0)
    rep.status = CheckStatus::hypothesis_not_met;
  else
    rep.status = CheckStatus::inconclusive;

  if (name == "example42" && !rep.points.empty()) {
    // exactly one reading must match everywhere, unless the prefactor vanishes
    const auto& m = std::get<Family42Metric>(spec);
    const bool trivial = m.b == 0.0 || m.lambda == 0.0 || m.lambda == 1.0;
    int matching = 0;
    for (Pairing p : kAllPairings) {
      const std::string key = std::string("match_") + pairing_name(p);
      bool all = true;
      for (const auto& pt : rep.points)
        if (pt.error.empty() && pt.values.at(key) == 0.0) all = false;
      rep.summary[std::string("matches_") + pairing_name(p)] = all;
      if (all) {
        ++matching;
        rep.notes.push_back(std::string("pairing ") + pairing_name(p) + " matches at every point");
      }
    }
    rep.summary["matching_pairings"] = matching;
    const bool ok = trivial ? matching == 3 : matching == 1;
    if (!ok) rep.status = CheckStatus::fail;
  }
  if (name == "gsakaguchi" && rep.status == CheckStatus::hypothesis_not_met)
    rep.notes.push_back("metric is not weakly-Weyl at the samples");
  if (name == "thm15" && rep.status == CheckStatus::hypothesis_not_met)
    rep.notes.push_back("metric is not weakly-Weyl at the samples; forward direction not applicable");
  return rep;
}

}  // namespace finsler
