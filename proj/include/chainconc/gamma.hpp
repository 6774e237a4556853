#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chainconc {

enum class GammaProvenance { contractive, ergodic, brute_force_tv };

const char* to_string(GammaProvenance provenance);

/// Upper-triangular, unit-diagonal, non-negative N x N matrix.
class GammaMatrix {
 public:
  GammaMatrix(std::size_t n, GammaProvenance provenance);
  GammaMatrix(std::size_t n, std::vector<double> entries,
              GammaProvenance provenance);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * n_ + j];
  }
  void set(std::size_t i, std::size_t j, double value);
  std::span<const double> entries() const { return entries_; }
  GammaProvenance provenance() const { return provenance_; }

 private:
  std::size_t n_;
  std::vector<double> entries_;
  GammaProvenance provenance_;
};

}  // namespace chainconc
