#include "chainconc/mc_verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "chainconc/error.hpp"

namespace chainconc {

namespace {

constexpr std::uint64_t kPilotSeedSalt = 0x9E3779B97F4A7C15ull;
constexpr double kMaxExponent = 700.0;

void check_replicates(std::size_t replicates) {
  if (replicates < kMinReplicates) {
    throw InvalidInput("replicates must be at least " +
                       std::to_string(kMinReplicates) + " (got " +
                       std::to_string(replicates) + ")");
  }
}

// Per-replicate values f(X_r), r = 0..replicates-1.
std::vector<double> sample_values(const ChainSpec& spec,
                                  const TrajectoryFunction& f,
                                  std::size_t replicates, std::uint64_t seed,
                                  std::size_t threads) {
  std::vector<double> values(replicates);
  parallel_for(replicates, threads, [&](std::size_t begin, std::size_t end) {
    Trajectory traj;
    for (std::size_t r = begin; r < end; ++r) {
      sample_trajectory_into(spec, seed, r, traj);
      values[r] = f.eval(traj);
    }
  });
  return values;
}

struct Centered {
  std::vector<double> deviations;
  double mean = 0.0;
  std::string centering;
};

Centered centered_values(const ChainSpec& spec, const TrajectoryFunction& f,
                         std::size_t replicates, std::uint64_t seed,
                         std::size_t threads) {
  Centered out;
  if (f.exact_mean) {
    out.mean = *f.exact_mean;
    out.centering = f.centering;
  } else {
    const auto pilot = sample_values(spec, f, kPilotReplicates,
                                     seed ^ kPilotSeedSalt, threads);
    out.mean = pairwise_sum(pilot) / static_cast<double>(pilot.size());
    out.centering = "pilot";
  }
  out.deviations = sample_values(spec, f, replicates, seed, threads);
  for (double& v : out.deviations) v -= out.mean;
  return out;
}

double table_max_deviation(const TabularFunction& f, double mean) {
  double worst = 0.0;
  for (double v : f.values()) worst = std::max(worst, std::abs(v - mean));
  return worst;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    body(0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(count, t * chunk);
      const std::size_t end = std::min(count, begin + chunk);
      workers.emplace_back([&, t, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double AdditiveFunction::operator()(std::span<const std::size_t> traj) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) acc += terms[i][traj[i]];
  return acc;
}

double AdditiveFunction::mean(const ChainSpec& spec) const {
  if (terms.size() != spec.length()) {
    throw InvalidInput("additive function: expected one term per coordinate");
  }
  const auto margins = marginals(spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].size() != spec.coord_size(i)) {
      throw InvalidInput("additive function: term " + std::to_string(i) +
                         " has the wrong number of states");
    }
    for (std::size_t x = 0; x < terms[i].size(); ++x) {
      acc += margins[i][x] * terms[i][x];
    }
  }
  return acc;
}

LipschitzWeights AdditiveFunction::weights() const {
  std::vector<double> c;
  c.reserve(terms.size());
  for (const auto& term : terms) {
    if (term.empty()) throw InvalidInput("additive function: empty term");
    const auto [lo, hi] = std::minmax_element(term.begin(), term.end());
    c.push_back(*hi - *lo);
  }
  return LipschitzWeights(std::move(c));
}

TrajectoryFunction as_trajectory_function(const TabularFunction& f,
                                          const ChainSpec& spec) {
  const auto tables = conditional_expectation_tables(f, spec);
  return {[f](std::span<const std::size_t> traj) { return f(traj); },
          tables[0][0], "enumeration"};
}

TrajectoryFunction as_trajectory_function(const AdditiveFunction& f,
                                          const ChainSpec& spec) {
  return {[f](std::span<const std::size_t> traj) { return f(traj); },
          f.mean(spec), "marginals"};
}

std::vector<std::size_t> TailEstimate::violations(double z) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (empirical[k] > bound[k] + z * standard_errors[k]) out.push_back(k);
  }
  return out;
}

TailEstimate empirical_tail(const ChainSpec& spec, const TrajectoryFunction& f,
                            double sigma2, std::span<const double> t_grid,
                            std::size_t replicates, std::uint64_t seed,
                            std::size_t threads) {
  check_replicates(replicates);
  if (t_grid.empty()) throw InvalidInput("empirical_tail: empty t grid");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] >= 0.0) || !std::isfinite(t_grid[k])) {
      throw InvalidInput("empirical_tail: grid point " + std::to_string(k) +
                         " must be finite and non-negative");
    }
  }
  if (!(sigma2 > 0.0)) throw InvalidInput("empirical_tail: sigma2 must be > 0");

  const Centered c = centered_values(spec, f, replicates, seed, threads);
  TailEstimate est;
  est.t_grid.assign(t_grid.begin(), t_grid.end());
  est.replicates = replicates;
  est.seed = seed;
  est.sigma2 = sigma2;
  est.mean = c.mean;
  est.centering = c.centering;
  const double m = static_cast<double>(replicates);
  for (double t : t_grid) {
    std::size_t hits = 0;
    for (double d : c.deviations) {
      if (std::abs(d) >= t) ++hits;
    }
    const double p = static_cast<double>(hits) / m;
    est.empirical.push_back(p);
    est.standard_errors.push_back(std::sqrt(p * (1.0 - p) / m));
    est.bound.push_back(2.0 * tail_bound(sigma2, t));
  }
  return est;
}

TailEstimate empirical_tail(const ChainSpec& spec, const TabularFunction& f,
                            double sigma2, std::span<const double> t_grid,
                            std::size_t replicates, std::uint64_t seed,
                            std::size_t threads) {
  return empirical_tail(spec, as_trajectory_function(f, spec), sigma2, t_grid,
                        replicates, seed, threads);
}

std::vector<double> default_lambda_grid(double sigma2) {
  const double scale = 1.0 / std::sqrt(sigma2);
  std::vector<double> grid;
  for (double base : {0.05, 0.1, 0.2, 0.5}) {
    grid.push_back(-base * scale);
    grid.push_back(base * scale);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

MgfEstimate empirical_mgf(const ChainSpec& spec, const TrajectoryFunction& f,
                          double sigma2, std::span<const double> lambda_grid,
                          double max_deviation, std::size_t replicates,
                          std::uint64_t seed, std::size_t threads) {
  check_replicates(replicates);
  if (lambda_grid.empty()) throw InvalidInput("empirical_mgf: empty grid");
  if (!(sigma2 >= 0.0)) throw InvalidInput("empirical_mgf: sigma2 < 0");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    const double lambda = lambda_grid[k];
    if (!std::isfinite(lambda) ||
        std::abs(lambda) * max_deviation > kMaxExponent ||
        lambda * lambda * sigma2 / 2.0 > kMaxExponent) {
      throw InvalidInput("empirical_mgf: lambda grid point " +
                         std::to_string(k) + " risks exp overflow");
    }
  }

  const Centered c = centered_values(spec, f, replicates, seed, threads);
  MgfEstimate est;
  est.replicates = replicates;
  est.seed = seed;
  est.sigma2 = sigma2;
  est.mean = c.mean;
  est.centering = c.centering;
  const double m = static_cast<double>(replicates);
  std::vector<double> e(replicates), sq(replicates);
  for (double lambda : lambda_grid) {
    for (std::size_t r = 0; r < replicates; ++r) {
      e[r] = std::exp(lambda * c.deviations[r]);
    }
    const double total = pairwise_sum(e);
    const double mean = total / m;
    // Jackknife over leave-one-out means.
    for (std::size_t r = 0; r < replicates; ++r) {
      const double loo = (total - e[r]) / (m - 1.0);
      sq[r] = (loo - mean) * (loo - mean);
    }
    const double var = (m - 1.0) / m * pairwise_sum(sq);
    est.rows.push_back({lambda, mean, std::sqrt(var),
                        std::exp(lambda * lambda * sigma2 / 2.0)});
  }
  return est;
}

MgfEstimate empirical_mgf(const ChainSpec& spec, const TabularFunction& f,
                          double sigma2, std::span<const double> lambda_grid,
                          std::size_t replicates, std::uint64_t seed,
                          std::size_t threads) {
  const TrajectoryFunction tf = as_trajectory_function(f, spec);
  return empirical_mgf(spec, tf, sigma2, lambda_grid,
                       table_max_deviation(f, *tf.exact_mean), replicates, seed,
                       threads);
}

SupEstimate empirical_sup_value(const MdpSpec& mdp, const PolicyClass& pc,
                                std::size_t replicates, std::uint64_t seed,
                                std::size_t threads, std::size_t cap) {
  check_replicates(replicates);
  if (pc.size() > cap) {
    throw CapExceeded("empirical_sup_value: class of " +
                      std::to_string(pc.size()) + " policies exceeds cap " +
                      std::to_string(cap));
  }
  std::vector<ChainSpec> chains;
  SupEstimate est;
  est.replicates = replicates;
  est.seed = seed;
  for (const Policy& pi : pc.policies()) {
    chains.push_back(induced_chain(mdp, pi));
    est.exact_values.push_back(exact_value(mdp, pi));
  }
  std::vector<double> sups(replicates);
  parallel_for(replicates, threads, [&](std::size_t begin, std::size_t end) {
    Trajectory traj;
    for (std::size_t r = begin; r < end; ++r) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < chains.size(); ++k) {
        sample_trajectory_into(chains[k], seed, r, traj);
        best = std::max(best,
                        value_function(mdp, pc[k], traj) - est.exact_values[k]);
      }
      sups[r] = best;
    }
  });
  const double m = static_cast<double>(replicates);
  est.estimate = pairwise_sum(sups) / m;
  std::vector<double> sq(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    sq[r] = (sups[r] - est.estimate) * (sups[r] - est.estimate);
  }
  est.standard_error = std::sqrt(pairwise_sum(sq) / (m - 1.0) / m);
  return est;
}

}  // namespace chainconc
