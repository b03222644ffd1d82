#pragma once

// Dense row-major tensors of jets with declared variance. Index order is the
// order in which indices are written, e.g. B_j^i_kl is stored as [j][i][k][l].

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

enum class Variance : unsigned char { up, down };

class JetTensor {
 public:
  JetTensor() = default;
  /// Zero-filled tensor of the given variance; rank 0 is a scalar.
  JetTensor(int dim, std::vector<Variance> variance, const JetConfig& config);

  static JetTensor scalar(Jet value);

  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return static_cast<int>(variance_.size()); }
  const std::vector<Variance>& variance() const noexcept { return variance_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  Jet& at(std::span<const int> idx) { return data_[offset(idx)]; }
  const Jet& at(std::span<const int> idx) const { return data_[offset(idx)]; }

  template <class... I>
  Jet& operator()(I... idx) {
    const int ix[] = {static_cast<int>(idx)..., 0};
    return data_[offset(std::span<const int>(ix, sizeof...(I)))];
  }
  template <class... I>
  const Jet& operator()(I... idx) const {
    const int ix[] = {static_cast<int>(idx)..., 0};
    return data_[offset(std::span<const int>(ix, sizeof...(I)))];
  }

  Jet& flat(std::size_t k) { return data_[k]; }
  const Jet& flat(std::size_t k) const { return data_[k]; }

  /// Component values at the base point, row-major.
  std::vector<double> values() const;
  /// Largest |value| over all components (0 for an empty tensor).
  double max_abs() const;

  JetTensor& operator+=(const JetTensor& other);
  JetTensor& operator-=(const JetTensor& other);
  JetTensor& operator*=(double c);

 private:
  std::size_t offset(std::span<const int> idx) const;

  int dim_ = 0;
  std::vector<Variance> variance_;
  std::vector<Jet> data_;
};

JetTensor operator+(JetTensor a, const JetTensor& b);
JetTensor operator-(JetTensor a, const JetTensor& b);
JetTensor operator*(JetTensor a, double c);
JetTensor operator*(double c, JetTensor a);

/// Calls fn(idx) for every index tuple of the given rank, row-major.
void for_each_index(int dim, int rank, const std::function<void(std::span<const int>)>& fn);

/// Builds a tensor by evaluating fn at every index tuple.
JetTensor make_tensor(int dim, std::vector<Variance> variance,
                      const std::function<Jet(std::span<const int>)>& fn);

/// T_{.m}: appends one lower index (vertical derivative).
JetTensor vertical(const JetTensor& t);
/// T_{;m}: appends one lower index (coordinate derivative in x).
JetTensor coordinate(const JetTensor& t);
/// Contracts slot `slot` with the seeded y-variables, removing it.
JetTensor contract_y(const JetTensor& t, int slot, std::span<const Jet> y);
/// Product T ⊗ y with the new upper index inserted at position `slot`.
JetTensor outer_y(const JetTensor& t, int slot, std::span<const Jet> y);

/// max |a - b| over component values.
double max_abs_diff(const JetTensor& a, const JetTensor& b);

}  // namespace finsler
