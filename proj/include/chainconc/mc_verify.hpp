#pragma once

// Monte Carlo checks of concentration certificates. Every estimate is a pure
// function of (inputs, seed, replicates): replicates draw from the
// counter-based generator, may run on any number of threads, and are reduced
// in a fixed pairwise order.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainconc/chain.hpp"
#include "chainconc/concentration.hpp"
#include "chainconc/rl_bounds.hpp"

namespace chainconc {

inline constexpr std::size_t kMinReplicates = 1000;
inline constexpr std::size_t kPilotReplicates = 1'000'000;

/// Sum in a fixed binary-tree order, independent of how the values were
/// produced.
double pairwise_sum(std::span<const double> values);

/// Runs body(begin, end) over [0, count) split into `threads` contiguous
/// chunks. threads == 0 means one per hardware thread.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Function of a trajectory with an optional exact mean. Without one, the
/// verifier centres with a pilot run.
struct TrajectoryFunction {
  std::function<double(std::span<const std::size_t>)> eval;
  std::optional<double> exact_mean;
  std::string centering = "enumeration";
};

/// f(x) = sum_i terms[i][x_i]; its mean follows from the marginals.
struct AdditiveFunction {
  std::vector<std::vector<double>> terms;

  double operator()(std::span<const std::size_t> traj) const;
  double mean(const ChainSpec& spec) const;
  /// max_i terms[i] - min_i terms[i]: the weighted-Hamming constants.
  LipschitzWeights weights() const;
};

TrajectoryFunction as_trajectory_function(const TabularFunction& f,
                                          const ChainSpec& spec);
TrajectoryFunction as_trajectory_function(const AdditiveFunction& f,
                                          const ChainSpec& spec);

struct TailEstimate {
  std::vector<double> t_grid;
  std::vector<double> empirical;
  std::vector<double> standard_errors;
  std::vector<double> bound;  // 2 exp(-t² / 2σ²)
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double sigma2 = 0.0;
  double mean = 0.0;
  std::string centering;

  /// Grid indices where empirical > bound + z·SE.
  std::vector<std::size_t> violations(double z = 2.0) const;
};

/// Frequency of |f(X) - E f| >= t over `replicates` sampled trajectories.
TailEstimate empirical_tail(const ChainSpec& spec, const TrajectoryFunction& f,
                            double sigma2, std::span<const double> t_grid,
                            std::size_t replicates, std::uint64_t seed,
                            std::size_t threads = 1);

TailEstimate empirical_tail(const ChainSpec& spec, const TabularFunction& f,
                            double sigma2, std::span<const double> t_grid,
                            std::size_t replicates, std::uint64_t seed,
                            std::size_t threads = 1);

struct MgfRow {
  double lambda = 0.0;
  double empirical = 0.0;
  double standard_error = 0.0;  // jackknife
  double bound = 0.0;           // exp(λ² σ² / 2)
};

struct MgfEstimate {
  std::vector<MgfRow> rows;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double sigma2 = 0.0;
  double mean = 0.0;
  std::string centering;
};

/// λ in {±0.05, ±0.1, ±0.2, ±0.5} / sqrt(σ²).
std::vector<double> default_lambda_grid(double sigma2);

/// Empirical E exp(λ(f - E f)). `max_deviation` bounds |f - E f| and is used
/// to reject grids that could overflow; pass the table range when known.
MgfEstimate empirical_mgf(const ChainSpec& spec, const TrajectoryFunction& f,
                          double sigma2, std::span<const double> lambda_grid,
                          double max_deviation, std::size_t replicates,
                          std::uint64_t seed, std::size_t threads = 1);

MgfEstimate empirical_mgf(const ChainSpec& spec, const TabularFunction& f,
                          double sigma2, std::span<const double> lambda_grid,
                          std::size_t replicates, std::uint64_t seed,
                          std::size_t threads = 1);

struct SupEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<double> exact_values;  // E V_π, aligned with the class
};

/// E sup_π (V_π - E V_π) with common random numbers: in each replicate every
/// policy's trajectory is driven by the same uniforms (one per stage).
SupEstimate empirical_sup_value(const MdpSpec& mdp, const PolicyClass& pc,
                                std::size_t replicates, std::uint64_t seed,
                                std::size_t threads = 1,
                                std::size_t cap = kDefaultPolicyCap);

}  // namespace chainconc
