#pragma once

// Truncated multivariate Taylor polynomials ("jets") in the 2n variables
// (x^1..x^n, y^1..y^n). A monomial x^a y^b is retained iff |a| <= x_order
// and |b| <= y_order. Coefficients are Taylor coefficients, i.e. the mixed
// partial divided by a! b!.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 4;
inline constexpr int kMaxXOrder = 4;
inline constexpr int kMaxYOrder = 12;

struct JetConfig {
  int dim = 3;
  int x_order = 0;
  int y_order = 0;

  /// Throws std::invalid_argument outside 2 <= dim <= 4, x_order <= 4, y_order <= 12.
  void validate() const;
  /// Number of stored coefficients.
  std::size_t size() const;

  friend bool operator==(const JetConfig&, const JetConfig&) = default;
};

struct MultiIndex {
  std::vector<int> x_part;
  std::vector<int> y_part;

  int x_degree() const;
  int y_degree() const;

  static MultiIndex zero(int dim);
  static MultiIndex dx(int dim, int k);
  static MultiIndex dy(int dim, int k);

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

class Jet {
 public:
  /// Empty placeholder; any arithmetic on it is a usage error.
  Jet() = default;
  explicit Jet(const JetConfig& config);

  static Jet constant(const JetConfig& config, double value);

  const JetConfig& config() const noexcept { return config_; }
  int dim() const noexcept { return config_.dim; }
  int x_order() const noexcept { return config_.x_order; }
  int y_order() const noexcept { return config_.y_order; }
  bool empty() const noexcept { return coeffs_.empty(); }

  double value() const { return coeffs_.at(0); }
  double coeff(const MultiIndex& m) const;
  void set_coeff(const MultiIndex& m, double c);
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::size_t nonzeros() const noexcept;

  /// Drops every monomial outside the (smaller) caps.
  Jet truncated(int x_order, int y_order) const;

  Jet d_dx(int k) const;
  Jet d_dy(int k) const;

  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator+=(double c);
  Jet& operator-=(double c);
  Jet& operator*=(double c);
  Jet& operator*=(const Jet& other);

  friend Jet mul(const Jet& a, const Jet& b);

 private:
  friend class JetAccess;
  JetConfig config_{0, 0, 0};
  std::size_t ny_ = 0;  // coefficients per x-row
  std::vector<double> coeffs_;
};

// Binary arithmetic. Operands must share `dim`; when orders differ the result
// is truncated to the componentwise minimum, which is the only order at which
// it is exact.
Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator-(Jet a);
Jet operator+(Jet a, double c);
Jet operator+(double c, Jet a);
Jet operator-(Jet a, double c);
Jet operator-(double c, const Jet& a);
Jet operator*(Jet a, double c);
Jet operator*(double c, Jet a);
Jet operator/(Jet a, double c);
Jet operator/(double c, const Jet& a);

Jet add(const Jet& a, const Jet& b);
Jet sub(const Jet& a, const Jet& b);
Jet scale(const Jet& a, double c);
Jet mul(const Jet& a, const Jet& b);

Jet reciprocal(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double p);

/// True mixed partial derivative a! b! * coeff at the base point.
double partial(const Jet& a, const MultiIndex& m);

/// Coordinate-variable jets at (x, y).
struct Seeds {
  std::vector<Jet> x;
  std::vector<Jet> y;
};

/// Lifts (x, y) to seeded variables. Rejects y = 0.
Seeds seed_point(std::span<const double> x, std::span<const double> y, const JetConfig& config);

/// Every retained multi-index, in storage order.
std::vector<MultiIndex> retained_indices(const JetConfig& config);

using ScalarField = std::function<double(std::span<const double> x, std::span<const double> y)>;

/// Central-difference estimate of the mixed partial `m` of `f` at (x, y),
/// nested per variable, step `step * (|coordinate| + 1)`, one Richardson level.
/// A zero step picks 1e-3 up to second order and 5e-3 for third order.
double fd_oracle(const ScalarField& f, std::span<const double> x, std::span<const double> y,
                 const MultiIndex& m, double step = 0.0);

}  // namespace finsler
