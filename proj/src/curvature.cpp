#include "finsler/curvature.hpp"

#include <algorithm>
#include <stdexcept>

namespace finsler {

namespace {

using V = Variance;
using Idx = std::span<const int>;

double delta(int i, int j) { return i == j ? 1.0 : 0.0; }

Jet sum_over(int n, const std::function<Jet(int)>& term) {
  Jet acc = term(0);
  for (int r = 1; r < n; ++r) acc += term(r);
  return acc;
}

std::vector<Jet> seeded_y(std::span<const double> x, std::span<const double> y,
                          const JetConfig& config) {
  return seed_point(x, y, config).y;
}

}  // namespace

std::vector<Jet> compute_spray(const Jet& F2, const JetTensor& g_inv, std::span<const Jet> y) {
  if (F2.x_order() < 1 || F2.y_order() < 2)
    throw TruncationError("spray needs F^2 with x_order >= 1 and y_order >= 2");
  const int n = F2.dim();
  std::vector<Jet> bracket;
  for (int l = 0; l < n; ++l) {
    const Jet dl = F2.d_dy(l);
    Jet acc = -F2.d_dx(l);
    for (int k = 0; k < n; ++k) acc += dl.d_dx(k) * y[static_cast<std::size_t>(k)];
    bracket.push_back(std::move(acc));
  }
  std::vector<Jet> G;
  for (int i = 0; i < n; ++i)
    G.push_back(0.25 * sum_over(n, [&](int l) { return g_inv(i, l) * bracket[l]; }));
  return G;
}

SpraySource metric_spray(const MetricSpec& spec, std::span<const double> x,
                         std::span<const double> y, const JetConfig& f2_config) {
  f2_config.validate();
  SpraySource s;
  s.dim = metric_dim(spec);
  if (f2_config.dim != s.dim) throw std::invalid_argument("jet dim does not match the metric");
  s.x.assign(x.begin(), x.end());
  s.y.assign(y.begin(), y.end());
  s.y_seed = seeded_y(x, y, f2_config);
  const Jet F2 = eval_F2(spec, x, y, f2_config);
  s.metric = fundamental_tensor(F2);
  s.F = eval_F(spec, x, y, f2_config);
  s.G = compute_spray(F2, s.metric->g_inv, s.y_seed);
  return s;
}

SpraySource explicit_spray(std::vector<Jet> G, std::span<const double> x,
                           std::span<const double> y, std::optional<Jet> F) {
  if (G.empty()) throw std::invalid_argument("explicit spray needs at least one component");
  SpraySource s;
  s.dim = G.front().dim();
  if (static_cast<int>(G.size()) != s.dim || static_cast<int>(x.size()) != s.dim ||
      static_cast<int>(y.size()) != s.dim)
    throw std::invalid_argument("explicit spray: inconsistent dimensions");
  s.x.assign(x.begin(), x.end());
  s.y.assign(y.begin(), y.end());
  JetConfig cfg = G.front().config();
  if (F) {
    cfg.x_order = std::max(cfg.x_order, F->x_order());
    cfg.y_order = std::max(cfg.y_order, F->y_order());
  }
  s.y_seed = seeded_y(x, y, cfg);
  s.G = std::move(G);
  s.F = std::move(F);
  return s;
}

BerwaldConnection berwald_connection(const SpraySource& source) {
  BerwaldConnection c;
  c.y = source.y_seed;
  c.G = source.G;
  const int n = source.dim;
  const JetTensor G = make_tensor(n, {V::up}, [&](Idx idx) { return source.G[idx[0]]; });
  c.N = vertical(G);
  c.Gamma = vertical(c.N);
  return c;
}

JetTensor horizontal_0(const JetTensor& t, const BerwaldConnection& c) {
  const int n = t.dim();
  const int rank = t.rank();
  const auto& var = t.variance();
  // rank-0 tensors are handled by lifting to the same code path
  const JetTensor dx = contract_y(coordinate(t), rank, c.y);
  const JetTensor dv = contract_y(vertical(t), rank, c.G);
  std::vector<int> j(static_cast<std::size_t>(rank));
  return make_tensor(n, var, [&](Idx idx) {
    Jet acc = dx.at(idx) - 2.0 * dv.at(idx);
    std::copy(idx.begin(), idx.end(), j.begin());
    for (int a = 0; a < rank; ++a) {
      const int orig = idx[a];
      for (int r = 0; r < n; ++r) {
        j[a] = r;
        if (var[a] == V::up) acc += t.at(j) * c.N(orig, r);
        else acc -= t.at(j) * c.N(r, orig);
      }
      j[a] = orig;
    }
    return acc;
  });
}

JetTensor horizontal_full(const JetTensor& t, const BerwaldConnection& c) {
  const int n = t.dim();
  const int rank = t.rank();
  const auto& var = t.variance();
  const JetTensor dx = coordinate(t);
  const JetTensor dv = vertical(t);
  auto out_var = var;
  out_var.push_back(V::down);
  std::vector<int> j(static_cast<std::size_t>(rank));
  std::vector<int> jr(static_cast<std::size_t>(rank) + 1);
  return make_tensor(n, out_var, [&](Idx idx) {
    const int m = idx[rank];
    const Idx base = idx.first(static_cast<std::size_t>(rank));
    Jet acc = dx.at(idx);
    std::copy(base.begin(), base.end(), jr.begin());
    for (int r = 0; r < n; ++r) {
      jr[rank] = r;
      acc -= c.N(r, m) * dv.at(jr);
    }
    std::copy(base.begin(), base.end(), j.begin());
    for (int a = 0; a < rank; ++a) {
      const int orig = base[a];
      for (int r = 0; r < n; ++r) {
        j[a] = r;
        if (var[a] == V::up) acc += t.at(j) * c.Gamma(orig, r, m);
        else acc -= t.at(j) * c.Gamma(r, orig, m);
      }
      j[a] = orig;
    }
    return acc;
  });
}

RiemannFamily compute_riemann(const BerwaldConnection& c) {
  const int n = c.N.dim();
  RiemannFamily r;
  // R^i_k = 2 G_;k - N^i_k;m y^m + 2 G^m Gamma^i_mk - N^i_m N^m_k
  r.Rik = make_tensor(n, {V::up, V::down}, [&](Idx idx) {
    const int i = idx[0], k = idx[1];
    Jet acc = 2.0 * c.G[i].d_dx(k);
    for (int m = 0; m < n; ++m) {
      acc -= c.N(i, k).d_dx(m) * c.y[m];
      acc += 2.0 * c.G[m] * c.Gamma(i, m, k);
      acc -= c.N(i, m) * c.N(m, k);
    }
    return acc;
  });
  const JetTensor dR = vertical(r.Rik);
  r.Rikl = make_tensor(n, {V::up, V::down, V::down}, [&](Idx idx) {
    const int i = idx[0], k = idx[1], l = idx[2];
    return (dR(i, k, l) - dR(i, l, k)) * (1.0 / 3.0);
  });
  const JetTensor dR3 = vertical(r.Rikl);
  r.Rjikl = make_tensor(n, {V::down, V::up, V::down, V::down}, [&](Idx idx) {
    return dR3(idx[1], idx[2], idx[3], idx[0]);
  });
  return r;
}

BerwaldFamily compute_berwald_family(const BerwaldConnection& c, bool with_H) {
  const int n = c.N.dim();
  BerwaldFamily b;
  const JetTensor dGamma = vertical(c.Gamma);  // [i][j][k][l]
  b.B = make_tensor(n, {V::down, V::up, V::down, V::down}, [&](Idx idx) {
    return dGamma(idx[1], idx[0], idx[2], idx[3]);
  });
  b.E = make_tensor(n, {V::down, V::down}, [&](Idx idx) {
    return 0.5 * sum_over(n, [&](int m) { return b.B(idx[0], m, idx[1], m); });
  });
  if (with_H) b.H = horizontal_0(b.E, c);
  return b;
}

JetTensor compute_douglas(const BerwaldConnection& c, const BerwaldFamily& b) {
  const int n = c.N.dim();
  const double f = 2.0 / (n + 1);
  const JetTensor dE = vertical(b.E);
  return make_tensor(n, {V::down, V::up, V::down, V::down}, [&](Idx idx) {
    const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
    Jet bracket = dE(j, k, l) * c.y[i];
    bracket += b.E(j, k) * delta(i, l) + b.E(j, l) * delta(i, k) + b.E(k, l) * delta(i, j);
    return b.B(j, i, k, l) - f * bracket;
  });
}

JetTensor compute_douglas_direct(const BerwaldConnection& c) {
  const int n = c.N.dim();
  const Jet trace = sum_over(n, [&](int m) { return c.N(m, m); });
  const JetTensor q = make_tensor(n, {V::up}, [&](Idx idx) { return trace * c.y[idx[0]]; });
  const JetTensor d3 = vertical(vertical(vertical(q)));  // [i][j][k][l]
  const JetTensor dGamma = vertical(c.Gamma);
  const double f = 1.0 / (n + 1);
  return make_tensor(n, {V::down, V::up, V::down, V::down}, [&](Idx idx) {
    const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
    return dGamma(i, j, k, l) - f * d3(i, j, k, l);
  });
}

WeylFamily compute_weyl_family(const BerwaldConnection& c, const RiemannFamily& r) {
  const int n = c.N.dim();
  if (n < 3) throw DimensionError("the Weyl family is only defined here for n >= 3");
  WeylFamily w;
  w.Rs = JetTensor::scalar(sum_over(n, [&](int m) { return r.Rik(m, m); }) * (1.0 / (n - 1)));
  const Jet& Rs = w.Rs.flat(0);
  w.A = make_tensor(n, {V::up, V::down}, [&](Idx idx) {
    Jet a = r.Rik(idx[0], idx[1]);
    if (idx[0] == idx[1]) a -= Rs;
    return a;
  });
  const JetTensor dA = vertical(w.A);  // [i][k][m]
  w.W = make_tensor(n, {V::up, V::down}, [&](Idx idx) {
    const int i = idx[0], k = idx[1];
    const Jet tr = sum_over(n, [&](int m) { return dA(m, k, m); });
    return w.A(i, k) - tr * c.y[i] * (1.0 / (n + 1));
  });
  const JetTensor dW = vertical(w.W);  // [i][k][l]
  const JetTensor W3 = make_tensor(n, {V::up, V::down, V::down}, [&](Idx idx) {
    const int i = idx[0], k = idx[1], l = idx[2];
    return (dW(i, k, l) - dW(i, l, k)) * (1.0 / 3.0);
  });
  const JetTensor dW3 = vertical(W3);  // [i][k][l][j]
  w.Wjikl = make_tensor(n, {V::down, V::up, V::down, V::down}, [&](Idx idx) {
    return dW3(idx[1], idx[2], idx[3], idx[0]);
  });
  const JetTensor dW4 = vertical(w.Wjikl);  // [j][i][p][l][k]
  w.Wt = make_tensor(n, {V::down, V::up, V::down, V::down}, [&](Idx idx) {
    const int j = idx[0], i = idx[1], k = idx[2], l = idx[3];
    return sum_over(n, [&](int p) { return dW4(j, i, p, l, k) * c.y[p]; });
  });
  return w;
}

JetTensor compute_theta(const BerwaldConnection& c, const BerwaldFamily& b, const RiemannFamily& r,
                        const JetTensor& Rs) {
  const int n = c.N.dim();
  const JetTensor Eh = horizontal_full(b.E, c);  // [j][k][l]
  const JetTensor dR = vertical(r.Rik);          // [s][l][m]
  const JetTensor dRs = vertical(Rs);            // [l]
  const JetTensor inner = make_tensor(n, {V::down}, [&](Idx idx) {
    const int l = idx[0];
    return sum_over(n, [&](int s) { return dR(s, l, s); }) - static_cast<double>(n + 2) * dRs(l);
  });
  const JetTensor d2 = vertical(vertical(inner));  // [l][j][k]
  return make_tensor(n, {V::down, V::down, V::down}, [&](Idx idx) {
    const int j = idx[0], k = idx[1], l = idx[2];
    return 2.0 * Eh(j, k, l) - d2(l, j, k) * (1.0 / 3.0);
  });
}

JetConfig required_config(int dim, Depth depth) {
  if (depth == Depth::curvature) return JetConfig{dim, 2, 8};
  return JetConfig{dim, 3, 9};
}

JetConfig standard_config(int dim) { return JetConfig{dim, 3, 10}; }

std::vector<TensorBudget> order_budget(const JetConfig& f2) {
  struct Row {
    const char* name;
    int dx, dy, rank;
  };
  static const Row rows[] = {
      {"F2", 0, 0, 0},           {"G", 1, 2, 1},          {"N", 1, 3, 2},
      {"Gamma", 1, 4, 3},        {"R^i_k", 2, 4, 2},      {"R^i_kl", 2, 5, 3},
      {"R_j^i_kl", 2, 6, 4},     {"B", 1, 5, 4},          {"E", 1, 5, 2},
      {"H", 2, 6, 2},            {"D", 1, 6, 4},          {"W^i_k", 2, 5, 2},
      {"W_j^i_kl", 2, 7, 4},     {"W~", 2, 8, 4},         {"D|0", 2, 7, 4},
      {"theta", 2, 7, 3},        {"W~|0", 3, 9, 4},       {"D|0|0", 3, 8, 4},
      {"theta|0", 3, 8, 3},
  };
  std::vector<TensorBudget> out;
  for (const auto& r : rows) {
    TensorBudget b;
    b.name = r.name;
    b.x_order = f2.x_order - r.dx;
    b.y_order = f2.y_order - r.dy;
    b.components = 1;
    for (int k = 0; k < r.rank; ++k) b.components *= static_cast<std::size_t>(f2.dim);
    if (b.x_order >= 0 && b.y_order >= 0)
      b.coefficients_per_component = JetConfig{f2.dim, b.x_order, b.y_order}.size();
    out.push_back(b);
  }
  return out;
}

void check_budget(const JetConfig& f2, Depth depth) {
  const auto budget = order_budget(f2);
  for (const auto& b : budget) {
    const bool flow = b.name == "H" || b.name == "D|0" || b.name == "theta" || b.name == "W~|0";
    const bool deep = b.name == "D|0|0" || b.name == "theta|0";
    if (flow && depth == Depth::curvature) continue;
    if (deep && depth != Depth::deep) continue;
    if (b.x_order < 0 || b.y_order < 0)
      throw TruncationError("F^2 orders (" + std::to_string(f2.x_order) + ", " +
                            std::to_string(f2.y_order) + ") cannot form " + b.name + ": missing " +
                            (b.x_order < 0 ? std::to_string(-b.x_order) + " x-order" : "") +
                            (b.x_order < 0 && b.y_order < 0 ? " and " : "") +
                            (b.y_order < 0 ? std::to_string(-b.y_order) + " y-order" : ""));
  }
}

double curvature_scale(const CurvatureBundle& b) {
  const int n = b.dim;
  const auto& c = b.conn;
  double m = 0.0;
  auto upd = [&](double v) { m = std::max(m, std::abs(v)); };
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      upd(2.0 * c.G[i].d_dx(k).value());
      double t2 = 0.0, t3 = 0.0, t4 = 0.0;
      for (int q = 0; q < n; ++q) {
        t2 += c.N(i, k).d_dx(q).value() * b.y[q];
        t3 += 2.0 * c.G[q].value() * c.Gamma(i, q, k).value();
        t4 += c.N(i, q).value() * c.N(q, k).value();
      }
      upd(t2);
      upd(t3);
      upd(t4);
    }
  return m;
}

CurvatureBundle build_bundle(const SpraySource& source, Depth depth) {
  const int n = source.dim;
  const JetConfig gcfg = source.G.front().config();
  check_budget(JetConfig{n, gcfg.x_order + 1, gcfg.y_order + 2}, depth);

  CurvatureBundle b;
  b.dim = n;
  b.depth = depth;
  b.x = source.x;
  b.y = source.y;
  if (source.F) {
    b.F = *source.F;
  } else {
    b.companion_metric = true;
    b.F = sqrt(sum_over(n, [&](int i) { return source.y_seed[i] * source.y_seed[i]; }));
  }
  b.ell = make_tensor(n, {V::down}, [&](Idx idx) { return b.F.d_dy(idx[0]); });
  if (source.metric) {
    b.g = source.metric->g;
    b.g_inv = source.metric->g_inv;
  } else {
    const JetConfig cfg = b.F.config();
    b.g = make_tensor(n, {V::down, V::down},
                      [&](Idx idx) { return Jet::constant(cfg, delta(idx[0], idx[1])); });
    b.g_inv = make_tensor(n, {V::up, V::up},
                          [&](Idx idx) { return Jet::constant(cfg, delta(idx[0], idx[1])); });
  }
  b.h = make_tensor(n, {V::down, V::down}, [&](Idx idx) {
    return b.g(idx[0], idx[1]) - b.ell(idx[0]) * b.ell(idx[1]);
  });

  b.conn = berwald_connection(source);
  b.riemann = compute_riemann(b.conn);
  const bool flow = depth != Depth::curvature;
  b.berwald = compute_berwald_family(b.conn, flow);
  b.D = compute_douglas(b.conn, b.berwald);
  b.has_weyl = n >= 3;
  if (b.has_weyl) b.weyl = compute_weyl_family(b.conn, b.riemann);

  if (flow) {
    b.D_h0 = horizontal_0(b.D, b.conn);
    const JetTensor Rs =
        b.has_weyl ? b.weyl.Rs
                   : JetTensor::scalar(sum_over(n, [&](int m) { return b.riemann.Rik(m, m); }) *
                                       (1.0 / (n - 1)));
    b.theta = compute_theta(b.conn, b.berwald, b.riemann, Rs);
    if (b.has_weyl) b.Wt_h0 = horizontal_0(b.weyl.Wt, b.conn);
  }
  if (depth == Depth::deep) {
    b.D_h00 = horizontal_0(b.D_h0, b.conn);
    b.theta_h0 = horizontal_0(b.theta, b.conn);
  }
  return b;
}

CurvatureBundle build_bundle(const MetricSpec& spec, std::span<const double> x,
                             std::span<const double> y, Depth depth) {
  const int n = metric_dim(spec);
  const JetConfig cfg = depth == Depth::curvature ? JetConfig{n, 2, 9} : standard_config(n);
  return build_bundle(metric_spray(spec, x, y, cfg), depth);
}

CurvatureBundle build_bundle(const MetricSpec& spec, std::span<const double> x,
                             std::span<const double> y, Depth depth, const JetConfig& f2) {
  if (f2.dim != metric_dim(spec)) throw ConfigError("jet dimension does not match the metric");
  check_budget(f2, depth);
  return build_bundle(metric_spray(spec, x, y, f2), depth);
}

}  // namespace finsler
