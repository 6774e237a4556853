#include "chainconc/coupling.hpp"

#include <algorithm>
#include <string>

#include "chainconc/error.hpp"

namespace chainconc {

std::vector<double> CouplingTable::row_sums() const {
  std::vector<double> sums(rows, 0.0);
  for (std::size_t u = 0; u < rows; ++u) {
    for (std::size_t v = 0; v < cols; ++v) sums[u] += joint[u * cols + v];
  }
  return sums;
}

std::vector<double> CouplingTable::col_sums() const {
  std::vector<double> sums(cols, 0.0);
  for (std::size_t u = 0; u < rows; ++u) {
    for (std::size_t v = 0; v < cols; ++v) sums[v] += joint[u * cols + v];
  }
  return sums;
}

double CouplingTable::off_diagonal_mass() const {
  if (rows != cols) throw InvalidInput("coupling table is not square");
  double mass = 0.0;
  for (std::size_t u = 0; u < rows; ++u) {
    for (std::size_t v = 0; v < cols; ++v) {
      if (u != v) mass += joint[u * cols + v];
    }
  }
  return mass;
}

CouplingTable goldstein_coupling(std::span<const double> p,
                                 std::span<const double> q) {
  if (p.size() != q.size()) {
    throw InvalidInput("goldstein_coupling: length mismatch (" +
                       std::to_string(p.size()) + " vs " +
                       std::to_string(q.size()) + ")");
  }
  const std::size_t n = p.size();
  CouplingTable table{n, n, std::vector<double>(n * n, 0.0)};
  std::vector<double> excess_p(n), excess_q(n);
  double residual = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    const double common = std::min(p[u], q[u]);
    table.joint[u * n + u] = common;
    excess_p[u] = p[u] - common;
    excess_q[u] = q[u] - common;
    residual += excess_p[u];
  }
  if (residual > 0.0) {
    // The excesses have disjoint supports, so this only fills off-diagonal
    // cells.
    for (std::size_t u = 0; u < n; ++u) {
      if (excess_p[u] == 0.0) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (excess_q[v] == 0.0) continue;
        table.joint[u * n + v] = excess_p[u] * excess_q[v] / residual;
      }
    }
  }
  return table;
}

CouplingTable independent_coupling(std::span<const double> p,
                                   std::span<const double> q) {
  CouplingTable table{p.size(), q.size(),
                      std::vector<double>(p.size() * q.size())};
  for (std::size_t u = 0; u < p.size(); ++u) {
    for (std::size_t v = 0; v < q.size(); ++v) {
      table.joint[u * q.size() + v] = p[u] * q[v];
    }
  }
  return table;
}

GammaMatrix wasserstein_matrix_tv(const ChainSpec& spec, std::size_t cap) {
  const std::size_t n = spec.length();
  checked_joint_size(spec.coord_sizes(), cap);
  const auto margins = marginals(spec);
  GammaMatrix gamma(n, GammaProvenance::brute_force_tv);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<std::size_t> admissible;
    for (std::size_t x = 0; x < spec.coord_size(i); ++x) {
      if (margins[i][x] > 0.0) admissible.push_back(x);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<BlockLaw> blocks;
      blocks.reserve(admissible.size());
      for (std::size_t x : admissible) {
        blocks.push_back(
            expand_block(spec, j, t_step_law(spec, i, x, j - i), cap));
      }
      double worst = 0.0;
      for (std::size_t a = 0; a < blocks.size(); ++a) {
        for (std::size_t b = a + 1; b < blocks.size(); ++b) {
          worst = std::max(worst,
                           tv_distance(blocks[a].probs, blocks[b].probs));
        }
      }
      gamma.set(i, j, worst);
    }
  }
  return gamma;
}

}  // namespace chainconc
