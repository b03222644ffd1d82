#include "finsler/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace finsler {

JetTensor::JetTensor(int dim, std::vector<Variance> variance, const JetConfig& config)
    : dim_(dim), variance_(std::move(variance)) {
  std::size_t count = 1;
  for (std::size_t r = 0; r < variance_.size(); ++r) count *= static_cast<std::size_t>(dim_);
  data_.assign(count, Jet(config));
}

JetTensor JetTensor::scalar(Jet value) {
  JetTensor t;
  t.dim_ = value.dim();
  t.data_.push_back(std::move(value));
  return t;
}

std::size_t JetTensor::offset(std::span<const int> idx) const {
  if (idx.size() != variance_.size())
    throw std::invalid_argument("tensor index has wrong rank");
  std::size_t off = 0;
  for (int i : idx) {
    if (i < 0 || i >= dim_) throw std::out_of_range("tensor index out of range");
    off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return off;
}

std::vector<double> JetTensor::values() const {
  std::vector<double> v;
  v.reserve(data_.size());
  for (const auto& j : data_) v.push_back(j.value());
  return v;
}

double JetTensor::max_abs() const {
  double m = 0.0;
  for (const auto& j : data_) m = std::max(m, std::abs(j.value()));
  return m;
}

JetTensor& JetTensor::operator+=(const JetTensor& other) {
  if (other.variance_ != variance_ || other.dim_ != dim_)
    throw std::invalid_argument("tensor shape mismatch in +=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

JetTensor& JetTensor::operator-=(const JetTensor& other) {
  if (other.variance_ != variance_ || other.dim_ != dim_)
    throw std::invalid_argument("tensor shape mismatch in -=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

JetTensor& JetTensor::operator*=(double c) {
  for (auto& j : data_) j *= c;
  return *this;
}

JetTensor operator+(JetTensor a, const JetTensor& b) { return a += b; }
JetTensor operator-(JetTensor a, const JetTensor& b) { return a -= b; }
JetTensor operator*(JetTensor a, double c) { return a *= c; }
JetTensor operator*(double c, JetTensor a) { return a *= c; }

void for_each_index(int dim, int rank, const std::function<void(std::span<const int>)>& fn) {
  std::vector<int> idx(static_cast<std::size_t>(rank), 0);
  while (true) {
    fn(idx);
    int r = rank - 1;
    while (r >= 0 && ++idx[r] == dim) idx[r--] = 0;
    if (r < 0) return;
  }
}

JetTensor make_tensor(int dim, std::vector<Variance> variance,
                      const std::function<Jet(std::span<const int>)>& fn) {
  const int rank = static_cast<int>(variance.size());
  JetTensor t;
  bool first = true;
  std::size_t k = 0;
  for_each_index(dim, rank, [&](std::span<const int> idx) {
    Jet v = fn(idx);
    if (first) {
      t = JetTensor(dim, variance, v.config());
      first = false;
    }
    t.flat(k++) = std::move(v);
  });
  return t;
}

namespace {

std::vector<Variance> with_lower(const std::vector<Variance>& v) {
  auto out = v;
  out.push_back(Variance::down);
  return out;
}

}  // namespace

JetTensor vertical(const JetTensor& t) {
  const int n = t.dim();
  return make_tensor(n, with_lower(t.variance()), [&](std::span<const int> idx) {
    return t.at(idx.first(idx.size() - 1)).d_dy(idx.back());
  });
}

JetTensor coordinate(const JetTensor& t) {
  const int n = t.dim();
  return make_tensor(n, with_lower(t.variance()), [&](std::span<const int> idx) {
    return t.at(idx.first(idx.size() - 1)).d_dx(idx.back());
  });
}

JetTensor contract_y(const JetTensor& t, int slot, std::span<const Jet> y) {
  const int n = t.dim();
  if (slot < 0 || slot >= t.rank()) throw std::invalid_argument("contract_y: bad slot");
  auto var = t.variance();
  var.erase(var.begin() + slot);
  std::vector<int> full(static_cast<std::size_t>(t.rank()));
  return make_tensor(n, var, [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.begin() + slot, full.begin());
    std::copy(idx.begin() + slot, idx.end(), full.begin() + slot + 1);
    Jet acc;
    for (int p = 0; p < n; ++p) {
      full[static_cast<std::size_t>(slot)] = p;
      Jet term = t.at(full) * y[static_cast<std::size_t>(p)];
      if (acc.empty()) acc = std::move(term);
      else acc += term;
    }
    return acc;
  });
}

JetTensor outer_y(const JetTensor& t, int slot, std::span<const Jet> y) {
  const int n = t.dim();
  auto var = t.variance();
  if (slot < 0 || slot > t.rank()) throw std::invalid_argument("outer_y: bad slot");
  var.insert(var.begin() + slot, Variance::up);
  std::vector<int> sub(static_cast<std::size_t>(t.rank()));
  return make_tensor(n, var, [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.begin() + slot, sub.begin());
    std::copy(idx.begin() + slot + 1, idx.end(), sub.begin() + slot);
    return t.at(sub) * y[static_cast<std::size_t>(idx[static_cast<std::size_t>(slot)])];
  });
}

double max_abs_diff(const JetTensor& a, const JetTensor& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    m = std::max(m, std::abs(a.flat(k).value() - b.flat(k).value()));
  return m;
}

}  // namespace finsler
