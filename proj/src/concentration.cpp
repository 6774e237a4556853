#include "chainconc/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chainconc/coupling.hpp"
#include "chainconc/error.hpp"

namespace chainconc {

namespace {

constexpr double kBracketSlack = 1e-12;

std::size_t product(std::span<const std::size_t> sizes, std::size_t begin,
                    std::size_t end) {
  std::size_t p = 1;
  for (std::size_t k = begin; k < end; ++k) p *= sizes[k];
  return p;
}

// Transition weight from a prefix of length k (flat index `prefix`) to state y
// at coordinate k.
double step_weight(const ChainSpec& spec, std::size_t k, std::size_t prefix,
                   std::size_t y) {
  if (k == 0) return spec.initial()[y];
  return spec.kernel(k - 1)(prefix % spec.coord_size(k - 1), y);
}

void check_function_matches(const TabularFunction& f, const ChainSpec& spec) {
  if (f.sizes() != spec.coord_sizes()) {
    throw InvalidInput("tabular function shape does not match the chain");
  }
}

}  // namespace

LipschitzWeights::LipschitzWeights(std::vector<double> c) : c_(std::move(c)) {
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (!(c_[i] >= 0.0) || !std::isfinite(c_[i])) {
      throw InvalidInput("lipschitz weight " + std::to_string(i) +
                         " must be a finite non-negative number");
    }
  }
}

TabularFunction::TabularFunction(std::vector<std::size_t> sizes,
                                 std::vector<double> values)
    : sizes_(std::move(sizes)), values_(std::move(values)) {
  const std::size_t expected =
      checked_joint_size(sizes_, std::numeric_limits<std::size_t>::max());
  if (values_.size() != expected) {
    throw InvalidInput("tabular function: expected " +
                       std::to_string(expected) + " values, got " +
                       std::to_string(values_.size()));
  }
}

TabularFunction TabularFunction::from(
    std::vector<std::size_t> sizes,
    const std::function<double(std::span<const std::size_t>)>& fn,
    std::size_t cap) {
  const std::size_t total = checked_joint_size(sizes, cap);
  std::vector<double> values(total);
  Trajectory traj(sizes.size(), 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    values[idx] = fn(traj);
    for (std::size_t k = sizes.size(); k-- > 0;) {
      if (++traj[k] < sizes[k]) break;
      traj[k] = 0;
    }
  }
  return TabularFunction(std::move(sizes), std::move(values));
}

double local_oscillation(std::span<const double> table,
                         std::span<const std::size_t> sizes,
                         std::size_t coordinate) {
  const std::size_t stride = product(sizes, coordinate + 1, sizes.size());
  const std::size_t block = sizes[coordinate] * stride;
  double worst = 0.0;
  for (std::size_t base = 0; base < table.size(); base += block) {
    for (std::size_t off = 0; off < stride; ++off) {
      double lo = table[base + off];
      double hi = lo;
      for (std::size_t a = 1; a < sizes[coordinate]; ++a) {
        const double v = table[base + off + a * stride];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      worst = std::max(worst, hi - lo);
    }
  }
  return worst;
}

std::vector<double> local_oscillation_vector(const TabularFunction& f,
                                             const ChainSpec& spec) {
  check_function_matches(f, spec);
  std::vector<double> delta(spec.length());
  for (std::size_t i = 0; i < spec.length(); ++i) {
    delta[i] = local_oscillation(f.values(), f.sizes(), i);
  }
  return delta;
}

std::vector<std::vector<double>> conditional_expectation_tables(
    const TabularFunction& f, const ChainSpec& spec) {
  check_function_matches(f, spec);
  const auto& sizes = spec.coord_sizes();
  const std::size_t n = spec.length();
  std::vector<std::vector<double>> tables(n + 1);
  tables[n].assign(f.values().begin(), f.values().end());
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t count = product(sizes, 0, k);
    const auto& next = tables[k + 1];
    std::vector<double> cur(count, 0.0);
    for (std::size_t p = 0; p < count; ++p) {
      double acc = 0.0;
      for (std::size_t y = 0; y < sizes[k]; ++y) {
        const double w = step_weight(spec, k, p, y);
        if (w != 0.0) acc += w * next[p * sizes[k] + y];
      }
      cur[p] = acc;
    }
    tables[k] = std::move(cur);
  }
  return tables;
}

double conditional_expectation(const TabularFunction& f, const ChainSpec& spec,
                               std::span<const std::size_t> prefix) {
  check_function_matches(f, spec);
  if (prefix_probability(spec, prefix) <= 0.0) {
    throw ZeroProbability("conditional_expectation: prefix has probability 0");
  }
  const auto& sizes = spec.coord_sizes();
  // Enumerate suffix weights forward from the last prefix state.
  const std::size_t k0 = prefix.size();
  const std::size_t base = flat_index(prefix, sizes);
  std::vector<double> weights{1.0};
  for (std::size_t k = k0; k < spec.length(); ++k) {
    std::vector<double> next(weights.size() * sizes[k]);
    for (std::size_t s = 0; s < weights.size(); ++s) {
      for (std::size_t y = 0; y < sizes[k]; ++y) {
        double w;
        if (k == 0) {
          w = spec.initial()[y];
        } else {
          const std::size_t last =
              k == k0 ? prefix.back() : s % sizes[k - 1];
          w = spec.kernel(k - 1)(last, y);
        }
        next[s * sizes[k] + y] = weights[s] * w;
      }
    }
    weights = std::move(next);
  }
  const std::size_t suffix_count = weights.size();
  double acc = 0.0;
  for (std::size_t s = 0; s < suffix_count; ++s) {
    if (weights[s] != 0.0) acc += weights[s] * f.values()[base * suffix_count + s];
  }
  return acc;
}

std::vector<double> martingale_differences(const TabularFunction& f,
                                           const ChainSpec& spec,
                                           std::span<const std::size_t> traj) {
  check_function_matches(f, spec);
  if (traj.size() != spec.length()) {
    throw InvalidInput("martingale_differences: trajectory length mismatch");
  }
  if (prefix_probability(spec, traj) <= 0.0) {
    throw ZeroProbability("martingale_differences: trajectory has probability 0");
  }
  const auto tables = conditional_expectation_tables(f, spec);
  const auto& sizes = spec.coord_sizes();
  std::vector<double> diffs(spec.length());
  std::size_t prev_index = 0;
  for (std::size_t i = 0; i < spec.length(); ++i) {
    const std::size_t index = prev_index * sizes[i] + traj[i];
    diffs[i] = tables[i + 1][index] - tables[i][prev_index];
    prev_index = index;
  }
  return diffs;
}

MartingaleBracket martingale_brackets(const TabularFunction& f,
                                      const ChainSpec& spec,
                                      std::size_t coordinate) {
  check_function_matches(f, spec);
  if (coordinate >= spec.length()) {
    throw InvalidInput("martingale_brackets: coordinate out of range");
  }
  const auto& sizes = spec.coord_sizes();
  const auto tables = conditional_expectation_tables(f, spec);

  std::vector<double> prefix_prob{1.0};
  for (std::size_t k = 0; k < coordinate; ++k) {
    std::vector<double> next(prefix_prob.size() * sizes[k]);
    for (std::size_t p = 0; p < prefix_prob.size(); ++p) {
      for (std::size_t y = 0; y < sizes[k]; ++y) {
        next[p * sizes[k] + y] = prefix_prob[p] * step_weight(spec, k, p, y);
      }
    }
    prefix_prob = std::move(next);
  }

  MartingaleBracket out;
  out.coordinate = coordinate;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.lower.assign(prefix_prob.size(), nan);
  out.upper.assign(prefix_prob.size(), nan);
  const auto& next_table = tables[coordinate + 1];
  for (std::size_t p = 0; p < prefix_prob.size(); ++p) {
    if (prefix_prob[p] <= 0.0) continue;
    const double mean = tables[coordinate][p];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t x = 0; x < sizes[coordinate]; ++x) {
      if (step_weight(spec, coordinate, p, x) <= 0.0) continue;
      const double g = next_table[p * sizes[coordinate] + x];
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    out.lower[p] = lo - mean;
    out.upper[p] = hi - mean;
    out.width = std::max(out.width, hi - lo);
  }
  const std::span<const std::size_t> prefix_sizes(sizes.data(), coordinate + 1);
  out.oscillation_bound = local_oscillation(next_table, prefix_sizes, coordinate);
  out.within_bound = out.width <= out.oscillation_bound + kBracketSlack;
  return out;
}

GammaMatrix gamma_contractive(std::span<const double> thetas) {
  for (std::size_t s = 0; s < thetas.size(); ++s) {
    if (!(thetas[s] >= 0.0 && thetas[s] <= 1.0)) {
      throw InvalidInput("gamma_contractive: theta[" + std::to_string(s) +
                         "] outside [0, 1]");
    }
  }
  const std::size_t n = thetas.size() + 1;
  GammaMatrix gamma(n, GammaProvenance::contractive);
  for (std::size_t i = 0; i < n; ++i) {
    double running = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      running *= thetas[j - 1];
      gamma.set(i, j, running);
    }
  }
  return gamma;
}

GammaMatrix gamma_ergodic(std::size_t n_blocks, double eps) {
  if (n_blocks == 0) throw InvalidInput("gamma_ergodic: n_blocks must be >= 1");
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw InvalidInput("gamma_ergodic: eps must lie in [0, 1)");
  }
  GammaMatrix gamma(n_blocks, GammaProvenance::ergodic);
  for (std::size_t i = 0; i < n_blocks; ++i) {
    if (i + 1 < n_blocks) gamma.set(i, i + 1, 1.0);
    for (std::size_t j = i + 2; j < n_blocks; ++j) {
      gamma.set(i, j, std::pow(eps, static_cast<double>(j - i - 1)));
    }
  }
  return gamma;
}

std::optional<std::size_t> mixing_time(const ChainSpec& spec, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InvalidInput("mixing_time: eps must lie in (0, 1)");
  }
  const std::size_t n = spec.length();
  if (n == 1) return 1;
  // worst[t] = max_i t_step_pair_tv(spec, i, t), filled incrementally from
  // every start position.
  std::vector<double> worst(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t states = spec.coord_size(i);
    std::vector<std::vector<double>> laws(states);
    for (std::size_t x = 0; x < states; ++x) {
      laws[x].assign(states, 0.0);
      laws[x][x] = 1.0;
    }
    for (std::size_t t = 1; i + t < n; ++t) {
      for (auto& law : laws) law = propagate(law, spec.kernel(i + t - 1));
      double tv = 0.0;
      for (std::size_t x = 0; x < states; ++x) {
        for (std::size_t y = x + 1; y < states; ++y) {
          tv = std::max(tv, tv_distance(laws[x], laws[y]));
        }
      }
      worst[t] = std::max(worst[t], tv);
    }
  }
  for (std::size_t t = 1; t < n; ++t) {
    if (worst[t] <= eps) return t;
  }
  return std::nullopt;
}

OperatorNorm operator_norm_detail(const GammaMatrix& g, double rel_tol,
                                  std::size_t max_iterations) {
  const std::size_t n = g.size();
  for (double v : g.entries()) {
    if (!std::isfinite(v)) throw InvalidInput("operator_norm: non-finite entry");
  }
  // gram = ΓᵀΓ
  std::vector<double> gram(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += g(k, a) * g(k, b);
      gram[a * n + b] = acc;
      gram[b * n + a] = acc;
    }
  }
  std::vector<double> v(n, 1.0), w(n);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    double vv = 0.0, vw = 0.0, upper = 0.0, scale = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < n; ++b) acc += gram[a * n + b] * v[b];
      w[a] = acc;
      vv += v[a] * v[a];
      vw += v[a] * acc;
      if (v[a] > 0.0) upper = std::max(upper, acc / v[a]);
      scale = std::max(scale, acc);
    }
    const double lower = vw / vv;
    if (upper - lower <= rel_tol * upper) {
      return {std::sqrt(upper), std::sqrt(lower), it};
    }
    for (std::size_t a = 0; a < n; ++a) v[a] = w[a] / scale;
  }
  throw ConvergenceError("operator_norm: power iteration did not converge in " +
                         std::to_string(max_iterations) + " iterations");
}

const char* to_string(Convention convention) {
  switch (convention) {
    case Convention::exact:
      return "exact";
    case Convention::opnorm:
      return "opnorm";
    case Convention::paper:
      return "paper";
  }
  return "unknown";
}

Convention parse_convention(const std::string& name) {
  if (name == "exact") return Convention::exact;
  if (name == "opnorm") return Convention::opnorm;
  if (name == "paper") return Convention::paper;
  throw InvalidInput("unknown convention '" + name +
                     "' (expected exact, opnorm or paper)");
}

namespace {

void check_dimensions(const GammaMatrix& g, const LipschitzWeights& c) {
  if (g.size() != c.size()) {
    throw InvalidInput("variance_proxy: gamma is " + std::to_string(g.size()) +
                       "x" + std::to_string(g.size()) + " but there are " +
                       std::to_string(c.size()) + " weights");
  }
}

double exact_proxy(const GammaMatrix& g, const LipschitzWeights& c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) row += g(i, j) * c[j];
    acc += row * row;
  }
  return 0.25 * acc;
}

double unfactored_proxy(double norm, const LipschitzWeights& c) {
  double cc = 0.0;
  for (double x : c.values()) cc += x * x;
  return norm * norm * cc;
}

}  // namespace

double variance_proxy(const GammaMatrix& g, const LipschitzWeights& c,
                      Convention convention) {
  check_dimensions(g, c);
  switch (convention) {
    case Convention::exact:
      return exact_proxy(g, c);
    case Convention::opnorm:
      return 0.25 * unfactored_proxy(operator_norm(g), c);
    case Convention::paper:
      return unfactored_proxy(operator_norm(g), c);
  }
  return 0.0;
}

double tail_bound(double sigma2, double t) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidInput("tail_bound: sigma2 must be positive");
  }
  if (!(t >= 0.0)) throw InvalidInput("tail_bound: t must be non-negative");
  return std::exp(-t * t / (2.0 * sigma2));
}

const char* to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::contractive:
      return "contractive";
    case MethodKind::ergodic:
      return "ergodic";
    case MethodKind::brute_force:
      return "brute";
  }
  return "unknown";
}

MethodKind parse_method(const std::string& name) {
  if (name == "contractive") return MethodKind::contractive;
  if (name == "ergodic") return MethodKind::ergodic;
  if (name == "brute" || name == "brute_force") return MethodKind::brute_force;
  throw InvalidInput("unknown method '" + name +
                     "' (expected contractive, ergodic or brute)");
}

double ConcentrationReport::sigma2(Convention c) const {
  switch (c) {
    case Convention::exact:
      return sigma2_exact;
    case Convention::opnorm:
      return sigma2_opnorm;
    case Convention::paper:
      return sigma2_paper;
  }
  return sigma2_opnorm;
}

std::vector<double> default_t_grid(double sigma2) {
  const double scale = std::sqrt(sigma2);
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(0.5 * k * scale);
  return grid;
}

ConcentrationReport certify(const ChainSpec& spec, const LipschitzWeights& c,
                            const Method& method, Convention convention,
                            std::size_t cap) {
  const std::size_t n = spec.length();
  if (c.size() != n) {
    throw InvalidInput("certify: " + std::to_string(c.size()) +
                       " weights for a chain of length " + std::to_string(n));
  }
  ConcentrationReport report;
  report.method = method;
  report.convention = convention;
  std::vector<double> weights(c.values().begin(), c.values().end());

  switch (method.kind) {
    case MethodKind::contractive: {
      for (const Kernel& k : spec.kernels()) {
        report.thetas.push_back(dobrushin_coefficient(k));
      }
      report.gamma = gamma_contractive(report.thetas);
      break;
    }
    case MethodKind::brute_force:
      report.gamma = wasserstein_matrix_tv(spec, cap);
      break;
    case MethodKind::ergodic: {
      const auto tau = mixing_time(spec, method.eps);
      if (!tau) {
        std::ostringstream msg;
        msg << "certify: chain does not mix within the horizon at eps = "
            << method.eps;
        throw InvalidInput(msg.str());
      }
      report.mixing_time = tau;
      const std::size_t blocks = (n + *tau - 1) / *tau;
      std::vector<double> block_weights(blocks, 0.0);
      for (std::size_t b = 0; b < blocks; ++b) {
        report.block_boundaries.push_back(b * *tau);
        for (std::size_t i = b * *tau; i < std::min(n, (b + 1) * *tau); ++i) {
          block_weights[b] += c[i];
        }
      }
      weights = std::move(block_weights);
      report.gamma = gamma_ergodic(blocks, method.eps);
      break;
    }
  }

  const LipschitzWeights used(weights);
  report.weights = weights;
  report.gamma_norm = operator_norm(report.gamma);
  report.sigma2_exact = exact_proxy(report.gamma, used);
  report.sigma2_paper = unfactored_proxy(report.gamma_norm, used);
  report.sigma2_opnorm = 0.25 * report.sigma2_paper;

  const double s2 = report.sigma2(convention);
  if (s2 > 0.0) {
    for (double t : default_t_grid(s2)) {
      report.tail_curve.emplace_back(t, tail_bound(s2, t));
    }
  }
  return report;
}

}  // namespace chainconc
