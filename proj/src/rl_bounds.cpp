#include "chainconc/rl_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "chainconc/concentration.hpp"
#include "chainconc/error.hpp"

namespace chainconc {

MdpSpec::MdpSpec(std::size_t states, std::size_t actions, std::size_t horizon,
                 Distribution initial, std::vector<Distribution> transitions,
                 std::vector<double> rewards, std::vector<double> stage_caps)
    : states_(states),
      actions_(actions),
      horizon_(horizon),
      initial_(std::move(initial)),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      stage_caps_(std::move(stage_caps)) {
  if (states_ == 0 || actions_ == 0 || horizon_ == 0) {
    throw InvalidInput("mdp: S, A and H must be positive");
  }
  if (initial_.size() != states_) {
    throw InvalidInput("mdp: initial has " + std::to_string(initial_.size()) +
                       " entries, expected S = " + std::to_string(states_));
  }
  if (transitions_.size() != states_ * actions_) {
    throw InvalidInput("mdp: expected S*A transition rows");
  }
  for (std::size_t k = 0; k < transitions_.size(); ++k) {
    if (transitions_[k].size() != states_) {
      throw InvalidInput("mdp: transitions[" + std::to_string(k / actions_) +
                         "][" + std::to_string(k % actions_) +
                         "] has the wrong length");
    }
  }
  if (stage_caps_.empty()) stage_caps_.assign(horizon_, 1.0);
  if (stage_caps_.size() != horizon_) {
    throw InvalidInput("mdp: stage_caps must have H entries");
  }
  for (std::size_t i = 0; i < horizon_; ++i) {
    if (!(stage_caps_[i] >= 0.0) || !std::isfinite(stage_caps_[i])) {
      throw InvalidInput("mdp: stage_caps[" + std::to_string(i) +
                         "] must be finite and non-negative");
    }
  }
  const double cap = *std::min_element(stage_caps_.begin(), stage_caps_.end());
  if (rewards_.size() != states_ * actions_) {
    throw InvalidInput("mdp: expected an S x A reward table");
  }
  for (std::size_t k = 0; k < rewards_.size(); ++k) {
    if (!(rewards_[k] >= 0.0 && rewards_[k] <= cap)) {
      throw InvalidInput("mdp: rewards[" + std::to_string(k / actions_) + "][" +
                         std::to_string(k % actions_) +
                         "] outside [0, min stage cap]");
    }
  }
}

Policy::Policy(std::vector<std::size_t> actions) : tables_{std::move(actions)} {
  if (tables_.front().empty()) throw InvalidInput("policy: empty action table");
}

Policy::Policy(std::vector<std::vector<std::size_t>> per_stage)
    : tables_(std::move(per_stage)) {
  if (tables_.empty()) throw InvalidInput("policy: no action tables");
  for (const auto& t : tables_) {
    if (t.empty()) throw InvalidInput("policy: empty action table");
  }
}

const char* to_string(PolicyMetricKind kind) {
  return kind == PolicyMetricKind::hamming ? "hamming" : "mixing";
}

PolicyMetricKind parse_policy_metric(const std::string& name) {
  if (name == "hamming") return PolicyMetricKind::hamming;
  if (name == "mixing") return PolicyMetricKind::mixing;
  throw InvalidInput("unknown metric '" + name +
                     "' (expected hamming or mixing)");
}

PolicyClass::PolicyClass(std::vector<Policy> policies, PolicyMetric metric)
    : policies_(std::move(policies)), metric_(std::move(metric)) {
  if (policies_.empty()) throw InvalidInput("policy class: empty");
  std::set<std::vector<std::vector<std::size_t>>> seen;
  for (const Policy& p : policies_) {
    if (!seen.insert(p.tables()).second) {
      throw InvalidInput("policy class: duplicate policy");
    }
  }
  if (!(metric_.scale > 0.0)) {
    throw InvalidInput("policy metric: scale must be positive");
  }
  if (metric_.kind == PolicyMetricKind::mixing &&
      metric_.mixing_times.size() != policies_.size()) {
    throw InvalidInput("policy metric: one mixing time per policy required");
  }
}

double PolicyClass::distance(std::size_t a, std::size_t b) const {
  if (metric_.kind == PolicyMetricKind::mixing) {
    return metric_.scale *
           std::abs(metric_.mixing_times[a] - metric_.mixing_times[b]);
  }
  const auto& ta = policies_[a].tables();
  const auto& tb = policies_[b].tables();
  std::size_t count = 0;
  const std::size_t stages = std::max(ta.size(), tb.size());
  for (std::size_t k = 0; k < stages; ++k) {
    const auto& ra = ta[std::min(k, ta.size() - 1)];
    const auto& rb = tb[std::min(k, tb.size() - 1)];
    for (std::size_t s = 0; s < std::min(ra.size(), rb.size()); ++s) {
      if (ra[s] != rb[s]) ++count;
    }
  }
  return metric_.scale * static_cast<double>(count);
}

double PolicyClass::diameter() const {
  double d = 0.0;
  for (std::size_t a = 0; a < size(); ++a) {
    for (std::size_t b = a + 1; b < size(); ++b) d = std::max(d, distance(a, b));
  }
  return d;
}

void validate_policy(const MdpSpec& mdp, const Policy& pi) {
  const auto& tables = pi.tables();
  if (!pi.stationary() && tables.size() != mdp.horizon()) {
    throw InvalidInput("policy: a time-dependent policy needs H action tables");
  }
  for (std::size_t k = 0; k < tables.size(); ++k) {
    if (tables[k].size() != mdp.states()) {
      throw InvalidInput("policy: action table " + std::to_string(k) +
                         " must have S entries");
    }
    for (std::size_t s = 0; s < tables[k].size(); ++s) {
      if (tables[k][s] >= mdp.actions()) {
        throw InvalidInput("policy: action " + std::to_string(tables[k][s]) +
                           " at state " + std::to_string(s) +
                           " is not below A = " + std::to_string(mdp.actions()));
      }
    }
  }
}

ChainSpec induced_chain(const MdpSpec& mdp, const Policy& pi) {
  validate_policy(mdp, pi);
  std::vector<Kernel> kernels;
  kernels.reserve(mdp.horizon() - 1);
  for (std::size_t k = 0; k + 1 < mdp.horizon(); ++k) {
    if (k > 0 && pi.stationary()) {
      kernels.push_back(kernels.front());
      continue;
    }
    std::vector<std::vector<double>> rows(mdp.states());
    for (std::size_t s = 0; s < mdp.states(); ++s) {
      const auto probs = mdp.transition(s, pi.action(k, s)).probs();
      rows[s].assign(probs.begin(), probs.end());
    }
    kernels.emplace_back(rows);
  }
  return ChainSpec(mdp.initial(), std::move(kernels));
}

double value_function(const MdpSpec& mdp, const Policy& pi,
                      std::span<const std::size_t> traj) {
  if (traj.size() != mdp.horizon()) {
    throw InvalidInput("value_function: trajectory length " +
                       std::to_string(traj.size()) + " != H = " +
                       std::to_string(mdp.horizon()));
  }
  double total = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    total += mdp.reward(traj[k], pi.action(k, traj[k]));
  }
  return total;
}

double exact_value(const MdpSpec& mdp, const Policy& pi) {
  validate_policy(mdp, pi);
  const std::size_t S = mdp.states();
  std::vector<double> to_go(S, 0.0);
  for (std::size_t k = mdp.horizon(); k-- > 0;) {
    std::vector<double> cur(S);
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t a = pi.action(k, s);
      double v = mdp.reward(s, a);
      if (k + 1 < mdp.horizon()) {
        const auto& next = mdp.transition(s, a);
        for (std::size_t t = 0; t < S; ++t) v += next[t] * to_go[t];
      }
      cur[s] = v;
    }
    to_go = std::move(cur);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < S; ++s) total += mdp.initial()[s] * to_go[s];
  return total;
}

PolicyClass enumerate_policies(std::size_t states, std::size_t actions,
                               std::size_t cap) {
  if (states == 0 || actions == 0) {
    throw InvalidInput("enumerate_policies: S and A must be positive");
  }
  std::size_t count = 1;
  for (std::size_t s = 0; s < states; ++s) {
    if (count > cap / actions) {
      throw CapExceeded("enumerate_policies: A^S exceeds the policy cap of " +
                        std::to_string(cap));
    }
    count *= actions;
  }
  std::vector<Policy> policies;
  policies.reserve(count);
  std::vector<std::size_t> table(states, 0);
  for (std::size_t k = 0; k < count; ++k) {
    policies.emplace_back(table);
    for (std::size_t s = states; s-- > 0;) {
      if (++table[s] < actions) break;
      table[s] = 0;
    }
  }
  return PolicyClass(std::move(policies));
}

double maximal_bound(double sigma2, std::size_t class_size) {
  if (class_size == 0) throw InvalidInput("maximal_bound: empty class");
  if (!(sigma2 >= 0.0)) throw InvalidInput("maximal_bound: sigma2 < 0");
  return std::sqrt(2.0 * sigma2 * std::log(static_cast<double>(class_size)));
}

std::size_t greedy_net_size(const PolicyClass& pc, double eps) {
  const std::size_t n = pc.size();
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t center = 0;
  std::size_t centers = 0;
  while (true) {
    ++centers;
    for (std::size_t k = 0; k < n; ++k) {
      nearest[k] = std::min(nearest[k], pc.distance(center, k));
    }
    std::size_t farthest = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (nearest[k] > nearest[farthest]) farthest = k;
    }
    if (nearest[farthest] <= eps) return centers;
    center = farthest;
  }
}

namespace {

std::vector<double> distinct_distances(const PolicyClass& pc) {
  std::vector<double> d{0.0};
  for (std::size_t a = 0; a < pc.size(); ++a) {
    for (std::size_t b = a + 1; b < pc.size(); ++b) d.push_back(pc.distance(a, b));
  }
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

std::size_t covering_from(const PolicyClass& pc,
                          const std::vector<double>& breakpoints, double eps) {
  std::size_t best = greedy_net_size(pc, eps);
  for (double r : breakpoints) {
    if (r > eps) break;
    best = std::min(best, greedy_net_size(pc, r));
  }
  return best;
}

}  // namespace

std::size_t covering_number(const PolicyClass& pc, double eps) {
  if (!(eps >= 0.0)) throw InvalidInput("covering_number: eps must be >= 0");
  return covering_from(pc, distinct_distances(pc), eps);
}

double lipschitz_process_bound(double sigma2, double expected_c,
                               const PolicyClass& pc,
                               std::span<const double> eps_grid) {
  if (eps_grid.empty()) throw InvalidInput("lipschitz_process_bound: empty grid");
  const auto breakpoints = distinct_distances(pc);
  double best = std::numeric_limits<double>::infinity();
  for (double eps : eps_grid) {
    if (!(eps >= 0.0)) {
      throw InvalidInput("lipschitz_process_bound: grid values must be >= 0");
    }
    const std::size_t cover = covering_from(pc, breakpoints, eps);
    best = std::min(best, eps * expected_c + maximal_bound(sigma2, cover));
  }
  return best;
}

double dudley_bound(const PolicyClass& pc, double scale) {
  if (!(scale > 0.0)) throw InvalidInput("dudley_bound: scale must be positive");
  const auto breakpoints = distinct_distances(pc);
  // N is constant on [d_k, d_{k+1}) and equals 1 from the diameter on.
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const std::size_t cover = covering_from(pc, breakpoints, breakpoints[k]);
    if (cover <= 1) break;
    integral += (breakpoints[k + 1] - breakpoints[k]) *
                std::sqrt(std::log(static_cast<double>(cover)));
  }
  return 12.0 * scale * integral;
}

double finite_state_bound(double horizon, double tau_mix, std::size_t states,
                          std::size_t actions, FiniteStateVariant variant) {
  if (!(horizon > 0.0) || !(tau_mix > 0.0) || states == 0 || actions == 0) {
    throw InvalidInput("finite_state_bound: arguments must be positive");
  }
  const double sa = static_cast<double>(states) * static_cast<double>(actions);
  const double log_sa = std::log(sa);
  if (variant == FiniteStateVariant::max_mix) {
    return std::sqrt(horizon * tau_mix * log_sa);
  }
  return std::sqrt(horizon * sa * tau_mix * log_sa);
}

std::vector<double> policy_mixing_times(const MdpSpec& mdp,
                                        const PolicyClass& pc, double eps) {
  std::vector<double> taus;
  taus.reserve(pc.size());
  for (const Policy& pi : pc.policies()) {
    const auto tau = mixing_time(induced_chain(mdp, pi), eps);
    taus.push_back(static_cast<double>(tau ? *tau : mdp.horizon()));
  }
  return taus;
}

}  // namespace chainconc
