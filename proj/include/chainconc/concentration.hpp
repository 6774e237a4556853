#pragma once

// Martingale method for functions of a finite Markov chain: local
// oscillations, Doob martingale differences and their brackets, Γ matrices
// for contractive and uniformly ergodic chains, and the resulting subgaussian
// variance proxies and tail bounds.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chainconc/chain.hpp"
#include "chainconc/gamma.hpp"

namespace chainconc {

/// Weights c_i with |f(x) - f(y)| <= sum_i c_i 1{x_i != y_i}.
class LipschitzWeights {
 public:
  explicit LipschitzWeights(std::vector<double> c);
  static LipschitzWeights unit(std::size_t n) {
    return LipschitzWeights(std::vector<double>(n, 1.0));
  }

  std::size_t size() const { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  std::span<const double> values() const { return c_; }

 private:
  std::vector<double> c_;
};

/// Real function on the product space, tabulated in mixed radix.
class TabularFunction {
 public:
  TabularFunction(std::vector<std::size_t> sizes, std::vector<double> values);

  /// Tabulates `fn` over every trajectory; the table must fit under `cap`.
  static TabularFunction from(
      std::vector<std::size_t> sizes,
      const std::function<double(std::span<const std::size_t>)>& fn,
      std::size_t cap = kDefaultEnumerationCap);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::span<const double> values() const { return values_; }
  double operator()(std::span<const std::size_t> traj) const {
    return values_[flat_index(traj, sizes_)];
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> values_;
};

/// Oscillation of a mixed-radix table along one coordinate: the largest
/// |g(x) - g(y)| over x, y differing only in that coordinate.
double local_oscillation(std::span<const double> table,
                         std::span<const std::size_t> sizes,
                         std::size_t coordinate);

/// Δ(f) under the discrete metric, one entry per coordinate.
std::vector<double> local_oscillation_vector(const TabularFunction& f,
                                             const ChainSpec& spec);

/// tables[k] holds E[f | X_0..X_{k-1} = prefix] for every prefix of length k
/// (tables[0] = {E f}, tables[N] = f). Prefixes of probability zero get the
/// value implied by the kernel rows.
std::vector<std::vector<double>> conditional_expectation_tables(
    const TabularFunction& f, const ChainSpec& spec);

/// E[f | X_0..X_{L-1} = prefix]. Throws ZeroProbability on a null prefix.
double conditional_expectation(const TabularFunction& f, const ChainSpec& spec,
                               std::span<const std::size_t> prefix);

/// M_i = E[f | X^{[i]}] - E[f | X^{[i-1]}] along `traj`, i = 0..N-1.
std::vector<double> martingale_differences(const TabularFunction& f,
                                           const ChainSpec& spec,
                                           std::span<const std::size_t> traj);

/// A_i <= M_i <= B_i as functions of the prefix X_0..X_{i-1}.
struct MartingaleBracket {
  std::size_t coordinate = 0;
  // Indexed by prefixes of length `coordinate`; NaN where the prefix has
  // probability zero.
  std::vector<double> lower;
  std::vector<double> upper;
  double width = 0.0;             // ||B_i - A_i||_inf
  double oscillation_bound = 0.0; // Δ_i(K_{i+1} f)
  bool within_bound = false;      // width <= oscillation_bound + 1e-12
};

MartingaleBracket martingale_brackets(const TabularFunction& f,
                                      const ChainSpec& spec,
                                      std::size_t coordinate);

/// Γ_ij = prod_{s=i}^{j-1} thetas[s]; N = thetas.size() + 1.
GammaMatrix gamma_contractive(std::span<const double> thetas);

/// Γ_ii = Γ_{i,i+1} = 1, Γ_ij = eps^{j-i-1} beyond the first superdiagonal.
GammaMatrix gamma_ergodic(std::size_t n_blocks, double eps);

/// Smallest t >= 1 with t_step_pair_tv(spec, i, t) <= eps at every position i
/// with i + t < N; std::nullopt ("no-mix") when no t within the horizon works.
std::optional<std::size_t> mixing_time(const ChainSpec& spec, double eps);

struct OperatorNorm {
  double value = 0.0;  // certified upper estimate of the largest singular value
  double lower = 0.0;  // Rayleigh-quotient lower estimate
  std::size_t iterations = 0;
};

/// Spectral norm by power iteration on ΓᵀΓ from the all-ones vector. Since
/// ΓᵀΓ is entrywise non-negative, max_i (ΓᵀΓv)_i / v_i bounds its spectral
/// radius from above and the Rayleigh quotient bounds it from below; the
/// iteration stops once the two agree to `rel_tol`.
OperatorNorm operator_norm_detail(const GammaMatrix& g, double rel_tol = 1e-10,
                                  std::size_t max_iterations = 100'000);

inline double operator_norm(const GammaMatrix& g) {
  return operator_norm_detail(g).value;
}

enum class Convention { exact, opnorm, paper };

const char* to_string(Convention convention);
Convention parse_convention(const std::string& name);

/// exact: ¼||Γc||²; opnorm: ¼||Γ||²||c||²; paper: ||Γ||²||c||².
double variance_proxy(const GammaMatrix& g, const LipschitzWeights& c,
                      Convention convention);

/// exp(-t² / (2 sigma2)).
double tail_bound(double sigma2, double t);

enum class MethodKind { contractive, ergodic, brute_force };

struct Method {
  MethodKind kind = MethodKind::contractive;
  double eps = 0.25;  // ergodic only

  static Method contractive() { return {MethodKind::contractive, 0.0}; }
  static Method ergodic(double eps) { return {MethodKind::ergodic, eps}; }
  static Method brute_force() { return {MethodKind::brute_force, 0.0}; }
};

const char* to_string(MethodKind kind);
MethodKind parse_method(const std::string& name);

struct ConcentrationReport {
  Method method;
  GammaMatrix gamma{1, GammaProvenance::contractive};
  // Weights the variance proxy was computed with; block sums on the ergodic
  // path.
  std::vector<double> weights;
  std::vector<double> thetas;                 // contractive path
  std::optional<std::size_t> mixing_time;     // ergodic path
  std::vector<std::size_t> block_boundaries;  // ergodic path, block starts
  double gamma_norm = 0.0;
  double sigma2_exact = 0.0;
  double sigma2_opnorm = 0.0;
  double sigma2_paper = 0.0;
  Convention convention = Convention::opnorm;
  std::vector<std::pair<double, double>> tail_curve;  // (t, bound)

  double sigma2(Convention c) const;
};

/// t in {0.5, 1, ..., 5} · sqrt(sigma2).
std::vector<double> default_t_grid(double sigma2);

/// Builds Γ by `method`, evaluates every variance-proxy convention, and
/// tabulates the tail bound for `convention` on the default grid.
ConcentrationReport certify(const ChainSpec& spec, const LipschitzWeights& c,
                            const Method& method,
                            Convention convention = Convention::opnorm,
                            std::size_t cap = kDefaultEnumerationCap);

}  // namespace chainconc
