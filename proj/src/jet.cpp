#include "finsler/jet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace finsler {
namespace {

// Monomials of degree <= kMaxYOrder in n variables, graded: all degree-0
// monomials first, then degree 1, and so on. Because the ordering is graded,
// the monomials of degree <= d are always a prefix, so one table serves every
// truncation order and both the x- and y-groups.
struct MonomialTable {
  int n = 0;
  std::vector<std::array<std::uint8_t, kMaxDim>> exps;
  std::vector<std::uint8_t> degree;
  std::vector<std::size_t> upto;  // upto[d] = #monomials of degree <= d
  std::vector<std::array<std::int32_t, kMaxDim>> raise;
  std::vector<double> factorials;  // prod_k e_k!
  // For monomial a, pair_target[pair_offset[a] + b] is the index of a*b, for
  // every b of degree <= kMaxYOrder - deg(a) (a prefix of the ordering).
  std::vector<std::size_t> pair_offset;
  std::vector<std::int32_t> pair_target;
  std::unordered_map<std::uint32_t, std::int32_t> lookup;

  static std::uint32_t pack(const std::array<std::uint8_t, kMaxDim>& e) {
    return std::uint32_t(e[0]) | std::uint32_t(e[1]) << 4 | std::uint32_t(e[2]) << 8 |
           std::uint32_t(e[3]) << 12;
  }

  std::int32_t find(const std::array<std::uint8_t, kMaxDim>& e) const {
    auto it = lookup.find(pack(e));
    return it == lookup.end() ? -1 : it->second;
  }
};

void emit_degree(int n, int var, int remaining, std::array<std::uint8_t, kMaxDim>& cur,
                 std::vector<std::array<std::uint8_t, kMaxDim>>& out) {
  if (var == n - 1) {
    cur[var] = static_cast<std::uint8_t>(remaining);
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[var] = static_cast<std::uint8_t>(e);
    emit_degree(n, var + 1, remaining - e, cur, out);
  }
  cur[var] = 0;
}

MonomialTable build_table(int n) {
  MonomialTable t;
  t.n = n;
  for (int d = 0; d <= kMaxYOrder; ++d) {
    std::array<std::uint8_t, kMaxDim> cur{};
    emit_degree(n, 0, d, cur, t.exps);
    t.upto.push_back(t.exps.size());
  }
  const std::size_t count = t.exps.size();
  t.degree.resize(count);
  t.factorials.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    int deg = 0;
    double fact = 1.0;
    for (int k = 0; k < n; ++k) {
      deg += t.exps[i][k];
      for (int f = 2; f <= t.exps[i][k]; ++f) fact *= f;
    }
    t.degree[i] = static_cast<std::uint8_t>(deg);
    t.factorials[i] = fact;
    t.lookup.emplace(MonomialTable::pack(t.exps[i]), static_cast<std::int32_t>(i));
  }
  t.raise.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (int k = 0; k < kMaxDim; ++k) {
      t.raise[i][k] = -1;
      if (k >= n || t.degree[i] == kMaxYOrder) continue;
      auto e = t.exps[i];
      ++e[k];
      t.raise[i][k] = t.find(e);
    }
  }
  t.pair_offset.resize(count);
  for (std::size_t a = 0; a < count; ++a) {
    t.pair_offset[a] = t.pair_target.size();
    const std::size_t nb = t.upto[kMaxYOrder - t.degree[a]];
    for (std::size_t b = 0; b < nb; ++b) {
      std::array<std::uint8_t, kMaxDim> e{};
      for (int k = 0; k < n; ++k) e[k] = static_cast<std::uint8_t>(t.exps[a][k] + t.exps[b][k]);
      t.pair_target.push_back(t.find(e));
    }
  }
  return t;
}

const MonomialTable& table(int n) {
  static const std::array<MonomialTable, 3> tables = {build_table(2), build_table(3),
                                                      build_table(4)};
  return tables.at(static_cast<std::size_t>(n - kMinDim));
}

void require_same_dim(const Jet& a, const Jet& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("jet arithmetic on an empty jet");
  if (a.dim() != b.dim())
    throw std::invalid_argument("jet dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
}

std::array<std::uint8_t, kMaxDim> to_exps(std::span<const int> part, int n, int cap,
                                          const char* group) {
  if (static_cast<int>(part.size()) != n)
    throw std::invalid_argument(std::string("multi-index ") + group + "-part has wrong length");
  std::array<std::uint8_t, kMaxDim> e{};
  int deg = 0;
  for (int k = 0; k < n; ++k) {
    if (part[k] < 0) throw std::invalid_argument("negative multi-index entry");
    e[k] = static_cast<std::uint8_t>(part[k]);
    deg += part[k];
  }
  if (deg > cap)
    throw TruncationError(std::string("derivative of order ") + std::to_string(deg) + " in " +
                          group + " is not tracked (cap " + std::to_string(cap) + ")");
  return e;
}

}  // namespace

// Private accessor shared by the free functions below.
class JetAccess {
 public:
  static std::vector<double>& coeffs(Jet& j) { return j.coeffs_; }
  static std::size_t ny(const Jet& j) { return j.ny_; }
  static std::size_t index(const Jet& j, const MultiIndex& m) {
    const auto& t = table(j.dim());
    auto ex = to_exps(m.x_part, j.dim(), j.x_order(), "x");
    auto ey = to_exps(m.y_part, j.dim(), j.y_order(), "y");
    return static_cast<std::size_t>(t.find(ex)) * j.ny_ + static_cast<std::size_t>(t.find(ey));
  }
};

void JetConfig::validate() const {
  if (dim < kMinDim || dim > kMaxDim)
    throw DimensionError("jet dimension must be in [2, 4], got " + std::to_string(dim));
  if (x_order < 0 || x_order > kMaxXOrder)
    throw ConfigError("x_order must be in [0, 4], got " + std::to_string(x_order));
  if (y_order < 0 || y_order > kMaxYOrder)
    throw ConfigError("y_order must be in [0, 12], got " + std::to_string(y_order));
}

std::size_t JetConfig::size() const {
  const auto& t = table(dim);
  return t.upto[x_order] * t.upto[y_order];
}

int MultiIndex::x_degree() const {
  int d = 0;
  for (int v : x_part) d += v;
  return d;
}

int MultiIndex::y_degree() const {
  int d = 0;
  for (int v : y_part) d += v;
  return d;
}

MultiIndex MultiIndex::zero(int dim) {
  return MultiIndex{std::vector<int>(dim, 0), std::vector<int>(dim, 0)};
}

MultiIndex MultiIndex::dx(int dim, int k) {
  auto m = zero(dim);
  m.x_part.at(k) = 1;
  return m;
}

MultiIndex MultiIndex::dy(int dim, int k) {
  auto m = zero(dim);
  m.y_part.at(k) = 1;
  return m;
}

Jet::Jet(const JetConfig& config) : config_(config) {
  config_.validate();
  const auto& t = table(config_.dim);
  ny_ = t.upto[config_.y_order];
  coeffs_.assign(t.upto[config_.x_order] * ny_, 0.0);
}

Jet Jet::constant(const JetConfig& config, double value) {
  Jet j(config);
  j.coeffs_[0] = value;
  return j;
}

double Jet::coeff(const MultiIndex& m) const {
  if (empty()) throw std::invalid_argument("coeff() on an empty jet");
  return coeffs_[JetAccess::index(*this, m)];
}

void Jet::set_coeff(const MultiIndex& m, double c) {
  if (empty()) throw std::invalid_argument("set_coeff() on an empty jet");
  coeffs_[JetAccess::index(*this, m)] = c;
}

std::size_t Jet::nonzeros() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(coeffs_.begin(), coeffs_.end(), [](double c) { return c != 0.0; }));
}

Jet Jet::truncated(int x_order, int y_order) const {
  if (empty()) throw std::invalid_argument("truncated() on an empty jet");
  if (x_order > config_.x_order || y_order > config_.y_order)
    throw TruncationError("cannot raise jet order by truncation");
  Jet out(JetConfig{config_.dim, x_order, y_order});
  const auto& t = table(config_.dim);
  const std::size_t nx = t.upto[x_order];
  for (std::size_t xi = 0; xi < nx; ++xi)
    std::copy_n(coeffs_.begin() + static_cast<std::ptrdiff_t>(xi * ny_), out.ny_,
                out.coeffs_.begin() + static_cast<std::ptrdiff_t>(xi * out.ny_));
  return out;
}

Jet Jet::d_dx(int k) const {
  if (empty()) throw std::invalid_argument("d_dx() on an empty jet");
  if (k < 0 || k >= config_.dim) throw std::invalid_argument("d_dx index out of range");
  if (config_.x_order == 0)
    throw TruncationError("x-derivative requested from a jet with x_order 0");
  Jet out(JetConfig{config_.dim, config_.x_order - 1, config_.y_order});
  const auto& t = table(config_.dim);
  const std::size_t nx = t.upto[out.config_.x_order];
  for (std::size_t xi = 0; xi < nx; ++xi) {
    const auto src = static_cast<std::size_t>(t.raise[xi][k]);
    const double f = t.exps[src][k];
    const double* in = coeffs_.data() + src * ny_;
    double* o = out.coeffs_.data() + xi * out.ny_;
    for (std::size_t yi = 0; yi < out.ny_; ++yi) o[yi] = f * in[yi];
  }
  return out;
}

Jet Jet::d_dy(int k) const {
  if (empty()) throw std::invalid_argument("d_dy() on an empty jet");
  if (k < 0 || k >= config_.dim) throw std::invalid_argument("d_dy index out of range");
  if (config_.y_order == 0)
    throw TruncationError("y-derivative requested from a jet with y_order 0");
  Jet out(JetConfig{config_.dim, config_.x_order, config_.y_order - 1});
  const auto& t = table(config_.dim);
  const std::size_t nx = t.upto[config_.x_order];
  for (std::size_t xi = 0; xi < nx; ++xi) {
    const double* in = coeffs_.data() + xi * ny_;
    double* o = out.coeffs_.data() + xi * out.ny_;
    for (std::size_t yi = 0; yi < out.ny_; ++yi) {
      const auto src = static_cast<std::size_t>(t.raise[yi][k]);
      o[yi] = t.exps[src][k] * in[src];
    }
  }
  return out;
}

namespace {

// In-place a += sign * b with a truncated to the common order first.
void accumulate(Jet& a, const Jet& b, double sign) {
  require_same_dim(a, b);
  const int xo = std::min(a.x_order(), b.x_order());
  const int yo = std::min(a.y_order(), b.y_order());
  if (xo != a.x_order() || yo != a.y_order()) a = a.truncated(xo, yo);
  auto& ac = JetAccess::coeffs(a);
  const auto& t = table(a.dim());
  const std::size_t nx = t.upto[xo];
  const std::size_t nya = JetAccess::ny(a);
  const std::size_t nyb = JetAccess::ny(b);
  const auto bc = b.coeffs();
  for (std::size_t xi = 0; xi < nx; ++xi)
    for (std::size_t yi = 0; yi < nya; ++yi) ac[xi * nya + yi] += sign * bc[xi * nyb + yi];
}

}  // namespace

Jet& Jet::operator+=(const Jet& other) {
  accumulate(*this, other, 1.0);
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  accumulate(*this, other, -1.0);
  return *this;
}

Jet& Jet::operator+=(double c) {
  if (empty()) throw std::invalid_argument("arithmetic on an empty jet");
  coeffs_[0] += c;
  return *this;
}

Jet& Jet::operator-=(double c) { return *this += -c; }

Jet& Jet::operator*=(double c) {
  if (empty()) throw std::invalid_argument("arithmetic on an empty jet");
  for (double& v : coeffs_) v *= c;
  return *this;
}

Jet& Jet::operator*=(const Jet& other) {
  *this = mul(*this, other);
  return *this;
}

// Cauchy product restricted to retained indices. The sparser operand drives
// the outer loops so products with seeded variables and x-only jets stay cheap.
Jet mul(const Jet& a, const Jet& b) {
  require_same_dim(a, b);
  const int xo = std::min(a.x_order(), b.x_order());
  const int yo = std::min(a.y_order(), b.y_order());
  Jet out(JetConfig{a.dim(), xo, yo});
  const bool a_sparser = a.nonzeros() <= b.nonzeros();
  const Jet& s = a_sparser ? a : b;
  const Jet& d = a_sparser ? b : a;
  const auto& t = table(a.dim());
  const std::size_t nx = t.upto[xo];
  const std::size_t ny = t.upto[yo];
  const std::size_t nys = s.ny_;
  const std::size_t nyd = d.ny_;
  const std::size_t nyo = out.ny_;
  const double* sc = s.coeffs_.data();
  const double* dc = d.coeffs_.data();
  double* oc = out.coeffs_.data();

  for (std::size_t xa = 0; xa < nx; ++xa) {
    const double* srow = sc + xa * nys;
    bool any = false;
    for (std::size_t ya = 0; ya < ny && !any; ++ya) any = srow[ya] != 0.0;
    if (!any) continue;
    const std::size_t nxb = t.upto[xo - t.degree[xa]];
    const std::int32_t* xt = t.pair_target.data() + t.pair_offset[xa];
    for (std::size_t xb = 0; xb < nxb; ++xb) {
      const double* drow = dc + xb * nyd;
      double* orow = oc + static_cast<std::size_t>(xt[xb]) * nyo;
      for (std::size_t ya = 0; ya < ny; ++ya) {
        const double av = srow[ya];
        if (av == 0.0) continue;
        const std::size_t nyb = t.upto[yo - t.degree[ya]];
        const std::int32_t* yt = t.pair_target.data() + t.pair_offset[ya];
        for (std::size_t yb = 0; yb < nyb; ++yb) orow[yt[yb]] += av * drow[yb];
      }
    }
  }
  return out;
}

namespace {

// f(a) = sum_k c_k (a - a0)^k, Horner form; (a - a0) is nilpotent of index
// x_order + y_order + 1.
Jet compose(const Jet& a, const std::vector<double>& series) {
  Jet h = a;
  JetAccess::coeffs(h)[0] = 0.0;
  const int top = static_cast<int>(series.size()) - 1;
  Jet r = Jet::constant(a.config(), series[top]);
  for (int k = top - 1; k >= 0; --k) {
    r = mul(r, h);
    JetAccess::coeffs(r)[0] += series[k];
  }
  return r;
}

// c_k = binom(p, k) a0^(p - k)
std::vector<double> power_series(double a0, double p, int terms) {
  std::vector<double> c(terms + 1);
  c[0] = std::pow(a0, p);
  for (int k = 1; k <= terms; ++k) c[k] = c[k - 1] * (p - k + 1) / (k * a0);
  return c;
}

}  // namespace

Jet reciprocal(const Jet& a) {
  if (a.empty()) throw std::invalid_argument("reciprocal of an empty jet");
  const double a0 = a.value();
  if (a0 == 0.0 || !std::isfinite(a0)) throw SingularError("reciprocal of a jet", a0);
  return compose(a, power_series(a0, -1.0, a.x_order() + a.y_order()));
}

Jet sqrt(const Jet& a) {
  if (a.empty()) throw std::invalid_argument("sqrt of an empty jet");
  const double a0 = a.value();
  if (!(a0 > 0.0) || !std::isfinite(a0)) throw SingularError("sqrt of a jet", a0);
  return compose(a, power_series(a0, 0.5, a.x_order() + a.y_order()));
}

Jet pow(const Jet& a, double p) {
  if (a.empty()) throw std::invalid_argument("pow of an empty jet");
  const double a0 = a.value();
  const bool integral = std::floor(p) == p && std::abs(p) < 64;
  if (integral && p >= 0) {
    Jet result = Jet::constant(a.config(), 1.0);
    Jet base = a;
    for (auto e = static_cast<long>(p); e > 0; e >>= 1) {
      if (e & 1) result = mul(result, base);
      if (e > 1) base = mul(base, base);
    }
    return result;
  }
  if (integral ? a0 == 0.0 : !(a0 > 0.0)) throw SingularError("pow of a jet", a0);
  if (!std::isfinite(a0)) throw SingularError("pow of a jet", a0);
  return compose(a, power_series(a0, p, a.x_order() + a.y_order()));
}

Jet add(const Jet& a, const Jet& b) { return a + b; }
Jet sub(const Jet& a, const Jet& b) { return a - b; }
Jet scale(const Jet& a, double c) { return a * c; }

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator*(const Jet& a, const Jet& b) { return mul(a, b); }
Jet operator/(const Jet& a, const Jet& b) { return mul(a, reciprocal(b)); }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator+(Jet a, double c) { return a += c; }
Jet operator+(double c, Jet a) { return a += c; }
Jet operator-(Jet a, double c) { return a -= c; }
Jet operator-(double c, const Jet& a) { return (-a) += c; }
Jet operator*(Jet a, double c) { return a *= c; }
Jet operator*(double c, Jet a) { return a *= c; }
Jet operator/(Jet a, double c) { return a *= 1.0 / c; }
Jet operator/(double c, const Jet& a) { return reciprocal(a) *= c; }

double partial(const Jet& a, const MultiIndex& m) {
  if (a.empty()) throw std::invalid_argument("partial of an empty jet");
  const auto& t = table(a.dim());
  const auto ex = to_exps(m.x_part, a.dim(), a.x_order(), "x");
  const auto ey = to_exps(m.y_part, a.dim(), a.y_order(), "y");
  const auto xi = static_cast<std::size_t>(t.find(ex));
  const auto yi = static_cast<std::size_t>(t.find(ey));
  return t.factorials[xi] * t.factorials[yi] * a.coeffs()[xi * JetAccess::ny(a) + yi];
}

Seeds seed_point(std::span<const double> x, std::span<const double> y, const JetConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.dim);
  if (x.size() != n || y.size() != n)
    throw std::invalid_argument("seed_point: coordinate vectors must have length dim");
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; }))
    throw DomainError("seed_point: y = 0 is outside the slit tangent bundle");
  Seeds seeds;
  for (std::size_t k = 0; k < n; ++k) {
    Jet xj = Jet::constant(config, x[k]);
    if (config.x_order > 0) xj.set_coeff(MultiIndex::dx(config.dim, static_cast<int>(k)), 1.0);
    seeds.x.push_back(std::move(xj));
    Jet yj = Jet::constant(config, y[k]);
    if (config.y_order > 0) yj.set_coeff(MultiIndex::dy(config.dim, static_cast<int>(k)), 1.0);
    seeds.y.push_back(std::move(yj));
  }
  return seeds;
}

std::vector<MultiIndex> retained_indices(const JetConfig& config) {
  config.validate();
  const auto& t = table(config.dim);
  std::vector<MultiIndex> out;
  out.reserve(config.size());
  for (std::size_t xi = 0; xi < t.upto[config.x_order]; ++xi)
    for (std::size_t yi = 0; yi < t.upto[config.y_order]; ++yi) {
      MultiIndex m = MultiIndex::zero(config.dim);
      for (int k = 0; k < config.dim; ++k) {
        m.x_part[k] = t.exps[xi][k];
        m.y_part[k] = t.exps[yi][k];
      }
      out.push_back(std::move(m));
    }
  return out;
}

namespace {

// Stencil weights for a centered derivative of order 0..3 at offsets k*h.
struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;  // divided by h^order later
};

Stencil stencil(int order) {
  switch (order) {
    case 0: return {{0}, {1.0}};
    case 1: return {{-1, 1}, {-0.5, 0.5}};
    case 2: return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
    case 3: return {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}};
    default: throw std::invalid_argument("fd_oracle supports per-variable order <= 3");
  }
}

double fd_once(const ScalarField& f, std::span<const double> x, std::span<const double> y,
               const MultiIndex& m, double step) {
  const std::size_t n = x.size();
  std::vector<int> orders;
  std::vector<double> base;
  for (std::size_t k = 0; k < n; ++k) {
    orders.push_back(m.x_part[k]);
    base.push_back(x[k]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    orders.push_back(m.y_part[k]);
    base.push_back(y[k]);
  }
  std::vector<Stencil> st;
  std::vector<double> h(2 * n);
  double denom = 1.0;
  for (std::size_t v = 0; v < 2 * n; ++v) {
    st.push_back(stencil(orders[v]));
    h[v] = step * (std::abs(base[v]) + 1.0);
    denom *= std::pow(h[v], orders[v]);
  }
  // Tensor-product sum over the per-variable stencils.
  std::vector<std::size_t> pos(2 * n, 0);
  std::vector<double> px(n), py(n);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t v = 0; v < 2 * n; ++v) {
      w *= st[v].weights[pos[v]];
      const double c = base[v] + st[v].offsets[pos[v]] * h[v];
      if (v < n) px[v] = c;
      else py[v - n] = c;
    }
    total += w * f(px, py);
    std::size_t v = 0;
    while (v < 2 * n && ++pos[v] == st[v].offsets.size()) pos[v++] = 0;
    if (v == 2 * n) break;
  }
  return total / denom;
}

}  // namespace

double fd_oracle(const ScalarField& f, std::span<const double> x, std::span<const double> y,
                 const MultiIndex& m, double step) {
  if (x.size() != y.size() || m.x_part.size() != x.size() || m.y_part.size() != y.size())
    throw std::invalid_argument("fd_oracle: inconsistent dimensions");
  if (m.x_degree() + m.y_degree() > 3)
    throw std::invalid_argument("fd_oracle: total order above 3 is not supported");
  // third differences at h = 1e-3 lose about eps / h^3 to cancellation; at 1e-2 the
  // h^4 truncation term takes over
  if (step == 0.0) step = m.x_degree() + m.y_degree() >= 3 ? 5e-3 : 1e-3;
  if (!std::isfinite(step) || step < 1e-7 || step > 0.1)
    throw std::invalid_argument("fd_oracle: step must lie in [1e-7, 0.1]");
  const double coarse = fd_once(f, x, y, m, step);
  const double fine = fd_once(f, x, y, m, 0.5 * step);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace finsler
