#pragma once

// Reference computations used as oracles by the tests. Nothing here calls the
// library's enumeration code: laws are rebuilt from the raw kernel entries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "chainconc/chain.hpp"
#include "chainconc/concentration.hpp"
#include "chainconc/rl_bounds.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using chainconc::ChainSpec;
using chainconc::Trajectory;

// All trajectories over `sizes`, coordinate 0 most significant.
inline std::vector<Trajectory> all_trajectories(
    const std::vector<std::size_t>& sizes) {
  std::vector<Trajectory> out{{}};
  for (std::size_t n : sizes) {
    std::vector<Trajectory> next;
    for (const auto& t : out) {
      for (std::size_t x = 0; x < n; ++x) {
        auto u = t;
        u.push_back(x);
        next.push_back(u);
      }
    }
    out = std::move(next);
  }
  return out;
}

// mu_0(x_0) prod_k K_k(x_k, x_{k+1}).
inline double path_probability(const ChainSpec& spec, const Trajectory& x) {
  double p = spec.initial()[x[0]];
  for (std::size_t k = 0; k + 1 < x.size(); ++k) p *= spec.kernel(k)(x[k], x[k + 1]);
  return p;
}

// prod_{k >= from} K_k(x_k, x_{k+1}): the law of x_{from+1..} given x_from.
inline double suffix_weight(const ChainSpec& spec, const Trajectory& x,
                            std::size_t from) {
  double p = 1.0;
  for (std::size_t k = from; k + 1 < x.size(); ++k) p *= spec.kernel(k)(x[k], x[k + 1]);
  return p;
}

struct Joint {
  std::vector<Trajectory> paths;
  std::vector<double> probs;
};

inline Joint joint_law(const ChainSpec& spec) {
  Joint j;
  j.paths = all_trajectories(spec.coord_sizes());
  for (const auto& x : j.paths) j.probs.push_back(path_probability(spec, x));
  return j;
}

inline double mean(const Joint& j, const std::function<double(const Trajectory&)>& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < j.paths.size(); ++k) acc += j.probs[k] * f(j.paths[k]);
  return acc;
}

inline bool has_prefix(const Trajectory& x, const Trajectory& prefix) {
  return std::equal(prefix.begin(), prefix.end(), x.begin());
}

// E[f | prefix] by summing the joint law; NaN if the prefix is null.
inline double conditional_mean(const Joint& j,
                               const std::function<double(const Trajectory&)>& f,
                               const Trajectory& prefix) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < j.paths.size(); ++k) {
    if (!has_prefix(j.paths[k], prefix)) continue;
    num += j.probs[k] * f(j.paths[k]);
    den += j.probs[k];
  }
  return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

// Markov version of E[f | prefix], defined for every prefix (length >= 1).
inline double markov_conditional_mean(
    const ChainSpec& spec, const std::function<double(const Trajectory&)>& f,
    const Trajectory& prefix) {
  if (prefix.empty()) return mean(joint_law(spec), f);
  double acc = 0.0;
  for (const auto& x : all_trajectories(spec.coord_sizes())) {
    if (!has_prefix(x, prefix)) continue;
    acc += suffix_weight(spec, x, prefix.size() - 1) * f(x);
  }
  return acc;
}

// Per prefix length L = 0..N, mixed-radix tables of E[f | X^{[L]}] from the
// joint law (NaN on null prefixes) and of the Markov version (defined
// everywhere), each built in one pass over all trajectories.
struct PrefixTables {
  std::vector<std::vector<double>> joint;
  std::vector<std::vector<double>> markov;
};

inline PrefixTables prefix_tables(const ChainSpec& spec, const Joint& j,
                                  const std::function<double(const Trajectory&)>& f) {
  const std::size_t n = spec.length();
  PrefixTables t;
  std::vector<std::vector<double>> mass(n + 1);
  std::size_t width = 1;
  for (std::size_t len = 0; len <= n; ++len) {
    t.joint.emplace_back(width, 0.0);
    t.markov.emplace_back(width, 0.0);
    mass[len].assign(width, 0.0);
    if (len < n) width *= spec.coord_size(len);
  }
  for (std::size_t k = 0; k < j.paths.size(); ++k) {
    const auto& x = j.paths[k];
    const double fx = f(x);
    std::size_t idx = 0;
    for (std::size_t len = 0; len <= n; ++len) {
      t.joint[len][idx] += j.probs[k] * fx;
      mass[len][idx] += j.probs[k];
      t.markov[len][idx] += (len == 0 ? j.probs[k] : suffix_weight(spec, x, len - 1)) * fx;
      if (len < n) idx = idx * spec.coord_size(len) + x[len];
    }
  }
  for (std::size_t len = 0; len <= n; ++len)
    for (std::size_t idx = 0; idx < mass[len].size(); ++idx)
      t.joint[len][idx] = mass[len][idx] > 0.0 ? t.joint[len][idx] / mass[len][idx]
                                               : std::numeric_limits<double>::quiet_NaN();
  return t;
}

// max over x, y differing only in coordinate `coord` of |g(x) - g(y)|, for a
// table over the first `len` coordinates.
inline double oscillation(const std::vector<double>& table, const ChainSpec& spec,
                          std::size_t len, std::size_t coord) {
  std::vector<std::size_t> sizes(spec.coord_sizes().begin(),
                                 spec.coord_sizes().begin() + static_cast<std::ptrdiff_t>(len));
  double best = 0.0;
  for (const auto& x : all_trajectories(sizes)) {
    for (std::size_t v = 0; v < sizes[coord]; ++v) {
      auto y = x;
      y[coord] = v;
      std::size_t ix = 0, iy = 0;
      for (std::size_t k = 0; k < len; ++k) {
        ix = ix * sizes[k] + x[k];
        iy = iy * sizes[k] + y[k];
      }
      best = std::max(best, std::abs(table[ix] - table[iy]));
    }
  }
  return best;
}

// Law of (X_j..X_{N-1}) given X_i = x, keyed by the suffix, from the joint.
inline std::map<Trajectory, double> block_law_given(const ChainSpec& spec,
                                                    const Joint& joint,
                                                    std::size_t i, std::size_t x,
                                                    std::size_t j) {
  std::map<Trajectory, double> law;
  double mass = 0.0;
  for (std::size_t k = 0; k < joint.paths.size(); ++k) {
    const auto& p = joint.paths[k];
    if (p[i] != x) continue;
    mass += joint.probs[k];
    law[Trajectory(p.begin() + static_cast<std::ptrdiff_t>(j), p.end())] += joint.probs[k];
  }
  for (auto& [key, v] : law) v /= mass;
  (void)spec;
  return law;
}

inline double tv(const std::map<Trajectory, double>& a,
                 const std::map<Trajectory, double>& b) {
  std::map<Trajectory, double> diff = a;
  for (const auto& [k, v] : b) diff[k] -= v;
  double acc = 0.0;
  for (const auto& [k, v] : diff) acc += std::abs(v);
  return 0.5 * acc;
}

// Γ by joint enumeration, skipping states of zero marginal mass.
inline Matrix gamma_tv(const ChainSpec& spec) {
  const std::size_t n = spec.length();
  const Joint joint = joint_law(spec);
  Matrix g(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    g[i][i] = 1.0;
    std::vector<double> marginal(spec.coord_size(i), 0.0);
    for (std::size_t k = 0; k < joint.paths.size(); ++k) marginal[joint.paths[k][i]] += joint.probs[k];
    for (std::size_t j = i + 1; j < n; ++j) {
      double best = 0.0;
      for (std::size_t x = 0; x < marginal.size(); ++x) {
        if (!(marginal[x] > 0.0)) continue;
        for (std::size_t y = x + 1; y < marginal.size(); ++y) {
          if (!(marginal[y] > 0.0)) continue;
          best = std::max(best, tv(block_law_given(spec, joint, i, x, j),
                                   block_law_given(spec, joint, i, y, j)));
        }
      }
      g[i][j] = best;
    }
  }
  return g;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Matrix matpow(const Matrix& a, std::size_t t) {
  Matrix r(a.size(), std::vector<double>(a.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i][i] = 1.0;
  for (std::size_t s = 0; s < t; ++s) r = matmul(r, a);
  return r;
}

inline double row_tv_max(const Matrix& m) {
  double best = 0.0;
  for (std::size_t x = 0; x < m.size(); ++x)
    for (std::size_t y = 0; y < m.size(); ++y) {
      double acc = 0.0;
      for (std::size_t z = 0; z < m[x].size(); ++z) acc += std::abs(m[x][z] - m[y][z]);
      best = std::max(best, 0.5 * acc);
    }
  return best;
}

// P(Bin(n, p) = k).
inline double binomial_pmf(std::size_t n, std::size_t k, double p) {
  const double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
}

// P(|Bin(n, p) - np| >= t).
inline double binomial_two_sided_tail(std::size_t n, double p, double t) {
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    if (std::abs(static_cast<double>(k) - n * p) >= t) acc += binomial_pmf(n, k, p);
  }
  return acc;
}

// E exp(λ(Bin(n, p) - np)).
inline double binomial_centered_mgf(std::size_t n, double p, double lambda) {
  return std::pow((1.0 - p) * std::exp(-lambda * p) + p * std::exp(lambda * (1.0 - p)),
                  static_cast<double>(n));
}

// Smallest number of closed eps-balls centred at class members covering it,
// by exhaustive search over subsets.
inline std::size_t minimal_cover(const chainconc::PolicyClass& pc, double eps) {
  const std::size_t n = pc.size();
  std::size_t best = n;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto count = static_cast<std::size_t>(__builtin_popcount(mask));
    if (count >= best) continue;
    bool covers = true;
    for (std::size_t p = 0; p < n && covers; ++p) {
      bool hit = false;
      for (std::size_t c = 0; c < n && !hit; ++c) {
        hit = (mask >> c & 1u) && pc.distance(c, p) <= eps;
      }
      covers = hit;
    }
    if (covers) best = count;
  }
  return best;
}

// Random instances.

inline std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n,
                                        double zero_chance) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  while (total == 0.0) {
    total = 0.0;
    for (auto& v : p) {
      v = u(rng) < zero_chance ? 0.0 : u(rng);
      total += v;
    }
  }
  for (auto& v : p) v /= total;
  return p;
}

inline ChainSpec random_chain(std::mt19937_64& rng, std::size_t length,
                              std::size_t max_states, double zero_chance = 0.15) {
  std::uniform_int_distribution<std::size_t> size_dist(1, max_states);
  std::vector<std::size_t> sizes(length);
  for (auto& s : sizes) s = size_dist(rng);
  std::vector<chainconc::Kernel> kernels;
  for (std::size_t k = 0; k + 1 < length; ++k) {
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < sizes[k]; ++r) rows.push_back(random_probs(rng, sizes[k + 1], zero_chance));
    kernels.emplace_back(rows);
  }
  return ChainSpec(chainconc::Distribution(random_probs(rng, sizes[0], zero_chance)),
                   std::move(kernels));
}

inline chainconc::TabularFunction random_function(std::mt19937_64& rng,
                                                  const ChainSpec& spec) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t total = 1;
  for (std::size_t s : spec.coord_sizes()) total *= s;
  std::vector<double> values(total);
  for (auto& v : values) v = u(rng);
  return chainconc::TabularFunction(spec.coord_sizes(), std::move(values));
}

inline chainconc::MdpSpec random_mdp(std::mt19937_64& rng, std::size_t S,
                                     std::size_t A, std::size_t H) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<chainconc::Distribution> rows;
  std::vector<double> rewards;
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      rows.emplace_back(random_probs(rng, S, 0.0));
      rewards.push_back(u(rng));
    }
  return chainconc::MdpSpec(S, A, H, chainconc::Distribution(random_probs(rng, S, 0.0)),
                            std::move(rows), std::move(rewards));
}

inline ChainSpec two_state_chain(std::size_t length) {
  return ChainSpec::homogeneous(chainconc::Distribution({0.5, 0.5}),
                                chainconc::Kernel({{0.9, 0.1}, {0.2, 0.8}}), length);
}

inline ChainSpec fair_product_chain(std::size_t length) {
  return ChainSpec::homogeneous(chainconc::Distribution({0.5, 0.5}),
                                chainconc::Kernel({{0.5, 0.5}, {0.5, 0.5}}), length);
}

}  // namespace oracle
