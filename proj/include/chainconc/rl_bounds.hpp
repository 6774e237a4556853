#pragma once

// Tabular finite-horizon MDPs, the Markov chains their policies induce, and
// bounds on E sup_π (V_π - E V_π) over finite policy classes.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chainconc/chain.hpp"

namespace chainconc {

inline constexpr std::size_t kDefaultPolicyCap = 10'000;

/// Finite MDP over S states, A actions and H stages. Rewards r(s, a) lie in
/// [0, min_i stage_caps[i]].
class MdpSpec {
 public:
  MdpSpec(std::size_t states, std::size_t actions, std::size_t horizon,
          Distribution initial, std::vector<Distribution> transitions,
          std::vector<double> rewards, std::vector<double> stage_caps = {});

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }
  std::size_t horizon() const { return horizon_; }
  const Distribution& initial() const { return initial_; }
  /// P(· | s, a).
  const Distribution& transition(std::size_t s, std::size_t a) const {
    return transitions_[s * actions_ + a];
  }
  double reward(std::size_t s, std::size_t a) const {
    return rewards_[s * actions_ + a];
  }
  const std::vector<double>& stage_caps() const { return stage_caps_; }

 private:
  std::size_t states_;
  std::size_t actions_;
  std::size_t horizon_;
  Distribution initial_;
  std::vector<Distribution> transitions_;
  std::vector<double> rewards_;
  std::vector<double> stage_caps_;
};

/// Deterministic policy: one action table for a stationary policy, or one per
/// stage.
class Policy {
 public:
  explicit Policy(std::vector<std::size_t> actions);
  explicit Policy(std::vector<std::vector<std::size_t>> per_stage);

  bool stationary() const { return tables_.size() == 1; }
  std::size_t action(std::size_t stage, std::size_t state) const {
    return tables_[stationary() ? 0 : stage][state];
  }
  const std::vector<std::vector<std::size_t>>& tables() const {
    return tables_;
  }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<std::vector<std::size_t>> tables_;
};

enum class PolicyMetricKind { hamming, mixing };

const char* to_string(PolicyMetricKind kind);
PolicyMetricKind parse_policy_metric(const std::string& name);

/// d(π, π') = scale · sum_s 1{π(s) != π'(s)} (hamming) or
/// scale · |τ_π - τ_π'| (mixing, with per-policy mixing times supplied).
struct PolicyMetric {
  PolicyMetricKind kind = PolicyMetricKind::hamming;
  double scale = 1.0;
  std::vector<double> mixing_times;  // mixing only, aligned with the class
};

class PolicyClass {
 public:
  PolicyClass(std::vector<Policy> policies, PolicyMetric metric = {});

  std::size_t size() const { return policies_.size(); }
  const Policy& operator[](std::size_t k) const { return policies_[k]; }
  const std::vector<Policy>& policies() const { return policies_; }
  const PolicyMetric& metric() const { return metric_; }

  double distance(std::size_t a, std::size_t b) const;
  double diameter() const;

 private:
  std::vector<Policy> policies_;
  PolicyMetric metric_;
};

void validate_policy(const MdpSpec& mdp, const Policy& pi);

/// Chain over H coordinates of S states with kernel rows P(· | s, π_k(s)).
ChainSpec induced_chain(const MdpSpec& mdp, const Policy& pi);

/// sum_k r(x_k, π_k(x_k)).
double value_function(const MdpSpec& mdp, const Policy& pi,
                      std::span<const std::size_t> traj);

/// E V_π by backward induction.
double exact_value(const MdpSpec& mdp, const Policy& pi);

/// Every stationary deterministic policy, lexicographic with state 0 most
/// significant. Throws CapExceeded when A^S > cap.
PolicyClass enumerate_policies(std::size_t states, std::size_t actions,
                               std::size_t cap = kDefaultPolicyCap);

/// sqrt(2 sigma2 ln |Π|).
double maximal_bound(double sigma2, std::size_t class_size);

/// Greedy farthest-point ε-net size (closed balls), seeded at policy 0.
std::size_t greedy_net_size(const PolicyClass& pc, double eps);

/// Upper bound on N(Π, d, ε): the smallest greedy net over radii r <= ε drawn
/// from {ε} ∪ {pairwise distances}, which keeps the bound nonincreasing in ε.
std::size_t covering_number(const PolicyClass& pc, double eps);

/// min over the grid of ε·E[C] + sqrt(2 sigma2 ln N(Π, d, ε)).
double lipschitz_process_bound(double sigma2, double expected_c,
                               const PolicyClass& pc,
                               std::span<const double> eps_grid);

/// 12 ∫_0^∞ sqrt(ln N(Π, scale·d, ε)) dε, evaluated exactly on the staircase of
/// the covering function.
double dudley_bound(const PolicyClass& pc, double scale = 1.0);

enum class FiniteStateVariant { max_mix, union_bound };

/// max_mix: sqrt(H τ ln(SA)); union_bound: sqrt(H S A τ ln(SA)).
double finite_state_bound(double horizon, double tau_mix, std::size_t states,
                          std::size_t actions, FiniteStateVariant variant);

/// Policy mixing-time metric support: τ_π(ε) per policy, with "no-mix" mapped
/// to the horizon H.
std::vector<double> policy_mixing_times(const MdpSpec& mdp,
                                        const PolicyClass& pc, double eps);

}  // namespace chainconc
