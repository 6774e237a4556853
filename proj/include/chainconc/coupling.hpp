#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chainconc/chain.hpp"
#include "chainconc/gamma.hpp"

namespace chainconc {

/// Joint law of (U, V) with U in rows and V in columns, row-major.
struct CouplingTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> joint;

  double operator()(std::size_t u, std::size_t v) const {
    return joint[u * cols + v];
  }
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  /// P[U != V]; requires a square table.
  double off_diagonal_mass() const;
};

/// Maximal coupling: the diagonal carries min(p, q) and the residual masses
/// are coupled by their normalized outer product, so P[U != V] = TV(p, q).
CouplingTable goldstein_coupling(std::span<const double> p,
                                 std::span<const double> q);

/// p ⊗ q.
CouplingTable independent_coupling(std::span<const double> p,
                                   std::span<const double> q);

/// Γ_ij = sup over admissible (x_i, y_i) of the TV distance between the
/// conditional laws of (X_j..X_{N-1}) given X_i = x_i and given X_i = y_i.
/// States with zero marginal probability at coordinate i are skipped. Block
/// laws are enumerated exhaustively, so the joint space must fit under `cap`.
GammaMatrix wasserstein_matrix_tv(const ChainSpec& spec,
                                  std::size_t cap = kDefaultEnumerationCap);

}  // namespace chainconc
