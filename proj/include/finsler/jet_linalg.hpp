#pragma once

#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

/// Solves A X = B over the jet ring by Gauss-Jordan elimination, pivoting on
/// the constant terms. A is n x n, B is n x m, both row-major. Throws
/// DegenerateError when a pivot's constant term vanishes relative to A.
std::vector<Jet> jet_solve(std::vector<Jet> a, int n, std::vector<Jet> b, int m);

}  // namespace finsler
