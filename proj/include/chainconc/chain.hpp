#pragma once

// Finite-state, possibly time-inhomogeneous Markov chains: laws, kernels,
// total variation, contraction coefficients, conditional block laws and
// deterministic sampling.
//
// Coordinates are 0-based throughout. A chain over N coordinates has N-1
// kernels; kernel k maps coordinate k to coordinate k+1. Trajectories are
// flattened in mixed radix with coordinate 0 most significant, so prefixes of
// a trajectory index the same way the full table does.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace chainconc {

inline constexpr double kProbTolerance = 1e-12;
inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

using Trajectory = std::vector<std::size_t>;

/// Probability vector. Construction validates non-negativity and the unit
/// sum to kProbTolerance, renormalizing inside the tolerance.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  static Distribution point_mass(std::size_t size, std::size_t at);
  static Distribution uniform(std::size_t size);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const { return probs_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

/// Row-stochastic matrix, stored row-major.
class Kernel {
 public:
  Kernel() = default;
  explicit Kernel(const std::vector<std::vector<double>>& rows);

  static Kernel identity(std::size_t size);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t from, std::size_t to) const {
    return data_[from * cols_ + to];
  }
  std::span<const double> row(std::size_t from) const {
    return {data_.data() + from * cols_, cols_};
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Joint law of (X_0, ..., X_{N-1}) given by an initial law and step kernels.
class ChainSpec {
 public:
  ChainSpec(Distribution initial, std::vector<Kernel> kernels);

  static ChainSpec homogeneous(Distribution initial, const Kernel& kernel,
                               std::size_t length);

  std::size_t length() const { return sizes_.size(); }
  const std::vector<std::size_t>& coord_sizes() const { return sizes_; }
  std::size_t coord_size(std::size_t i) const { return sizes_[i]; }
  const Distribution& initial() const { return initial_; }
  const std::vector<Kernel>& kernels() const { return kernels_; }
  const Kernel& kernel(std::size_t k) const { return kernels_[k]; }

 private:
  Distribution initial_;
  std::vector<Kernel> kernels_;
  std::vector<std::size_t> sizes_;
};

/// Unvalidated chain description, as read from a file.
struct ChainData {
  std::vector<std::size_t> coord_sizes;  // optional; checked when non-empty
  std::vector<double> initial;
  std::vector<std::vector<std::vector<double>>> kernels;
};

/// Validates every invariant and returns the chain. Errors name the first
/// violated invariant together with the kernel and row index.
ChainSpec validate_chain(const ChainData& data);

/// Product of coordinate sizes. Throws CapExceeded when it exceeds `cap`.
std::size_t checked_joint_size(std::span<const std::size_t> sizes,
                               std::size_t cap);

/// Mixed-radix flat index of a trajectory (or prefix) over `sizes`.
std::size_t flat_index(std::span<const std::size_t> states,
                       std::span<const std::size_t> sizes);

/// Inverse of flat_index.
Trajectory unflatten(std::size_t index, std::span<const std::size_t> sizes);

/// Half the L1 distance between two probability vectors.
double tv_distance(std::span<const double> p, std::span<const double> q);
inline double tv_distance(const Distribution& p, const Distribution& q) {
  return tv_distance(p.probs(), q.probs());
}

/// max over row pairs of the TV distance between rows.
double dobrushin_coefficient(const Kernel& k);

/// Row vector times kernel.
std::vector<double> propagate(std::span<const double> law, const Kernel& k);

/// Marginal law of every coordinate.
std::vector<std::vector<double>> marginals(const ChainSpec& spec);

/// Probability of a prefix (X_0..X_{L-1}) = prefix; the empty prefix has
/// probability 1.
double prefix_probability(const ChainSpec& spec,
                          std::span<const std::size_t> prefix);

/// Law of the block (X_j, ..., X_{N-1}), flattened in mixed radix.
struct BlockLaw {
  std::size_t first = 0;
  std::vector<std::size_t> sizes;
  std::vector<double> probs;
};

/// Law of (X_j..X_{N-1}) started from `start`, a law of X_j.
BlockLaw expand_block(const ChainSpec& spec, std::size_t j,
                      std::vector<double> start, std::size_t cap);

/// Law of (X_j..X_{N-1}) given X_0..X_{L-1} = prefix, with j >= L.
BlockLaw conditional_law(const ChainSpec& spec,
                         std::span<const std::size_t> prefix, std::size_t j,
                         std::size_t cap = kDefaultEnumerationCap);

/// Law of X_{i+t} given X_i = state.
std::vector<double> t_step_law(const ChainSpec& spec, std::size_t i,
                               std::size_t state, std::size_t t);

/// max_{x,y} TV(P(X_{i+t} | X_i = x), P(X_{i+t} | X_i = y)).
double t_step_pair_tv(const ChainSpec& spec, std::size_t i, std::size_t t);

/// X_0 ~ initial, X_{k+1} ~ kernel k row X_k, one uniform per coordinate keyed
/// by (seed, replicate, coordinate).
Trajectory sample_trajectory(const ChainSpec& spec, std::uint64_t seed,
                             std::uint64_t replicate = 0);

/// Allocation-free variant writing into `out` (resized to the chain length).
void sample_trajectory_into(const ChainSpec& spec, std::uint64_t seed,
                            std::uint64_t replicate, Trajectory& out);

}  // namespace chainconc
