#include "chainconc/gamma.hpp"

#include <cmath>
#include <string>

#include "chainconc/error.hpp"

namespace chainconc {

const char* to_string(GammaProvenance provenance) {
  switch (provenance) {
    case GammaProvenance::contractive:
      return "contractive";
    case GammaProvenance::ergodic:
      return "ergodic";
    case GammaProvenance::brute_force_tv:
      return "brute_force_tv";
  }
  return "unknown";
}

GammaMatrix::GammaMatrix(std::size_t n, GammaProvenance provenance)
    : n_(n), entries_(n * n, 0.0), provenance_(provenance) {
  if (n == 0) throw InvalidInput("gamma matrix: size must be positive");
  for (std::size_t i = 0; i < n; ++i) entries_[i * n + i] = 1.0;
}

GammaMatrix::GammaMatrix(std::size_t n, std::vector<double> entries,
                         GammaProvenance provenance)
    : n_(n), entries_(std::move(entries)), provenance_(provenance) {
  if (n == 0) throw InvalidInput("gamma matrix: size must be positive");
  if (entries_.size() != n * n) {
    throw InvalidInput("gamma matrix: expected " + std::to_string(n * n) +
                       " entries, got " + std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = entries_[i * n + j];
      const std::string where =
          "gamma matrix entry (" + std::to_string(i) + ", " +
          std::to_string(j) + ")";
      if (i == j && v != 1.0) throw InvalidInput(where + ": diagonal must be 1");
      if (i > j && v != 0.0) {
        throw InvalidInput(where + ": must be 0 below the diagonal");
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidInput(where + ": must lie in [0, 1]");
      }
    }
  }
}

void GammaMatrix::set(std::size_t i, std::size_t j, double value) {
  if (i >= j || j >= n_) {
    throw InvalidInput("gamma matrix: only strictly upper entries are free");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidInput("gamma matrix: entry must lie in [0, 1]");
  }
  entries_[i * n_ + j] = value;
}

}  // namespace chainconc
