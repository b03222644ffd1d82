#include "finsler/jet_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace finsler {

std::vector<Jet> jet_solve(std::vector<Jet> a, int n, std::vector<Jet> b, int m) {
  const auto N = static_cast<std::size_t>(n);
  const auto M = static_cast<std::size_t>(m);
  if (a.size() != N * N || b.size() != N * M)
    throw std::invalid_argument("jet_solve: inconsistent matrix sizes");
  double scale = 0.0;
  for (const auto& j : a) scale = std::max(scale, std::abs(j.value()));
  if (scale == 0.0) throw DegenerateError("jet_solve: zero matrix");

  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r * N + col].value()) > std::abs(a[piv * N + col].value())) piv = r;
    if (std::abs(a[piv * N + col].value()) <= 1e-13 * scale)
      throw DegenerateError("jet_solve: singular constant part");
    if (piv != col) {
      for (std::size_t c = 0; c < N; ++c) std::swap(a[piv * N + c], a[col * N + c]);
      for (std::size_t c = 0; c < M; ++c) std::swap(b[piv * M + c], b[col * M + c]);
    }
    const Jet inv = reciprocal(a[col * N + col]);
    for (std::size_t c = col; c < N; ++c) a[col * N + c] = a[col * N + c] * inv;
    for (std::size_t c = 0; c < M; ++c) b[col * M + c] = b[col * M + c] * inv;
    for (std::size_t r = 0; r < N; ++r) {
      if (r == col) continue;
      const Jet f = a[r * N + col];
      if (f.nonzeros() == 0) continue;
      for (std::size_t c = col; c < N; ++c) a[r * N + c] -= f * a[col * N + c];
      for (std::size_t c = 0; c < M; ++c) b[r * M + c] -= f * b[col * M + c];
    }
  }
  return b;
}

}  // namespace finsler
