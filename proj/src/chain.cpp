#include "chainconc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "chainconc/error.hpp"
#include "chainconc/rng.hpp"

namespace chainconc {

namespace {

// Validates `probs` in place; `where` prefixes the error message.
void normalize_probabilities(std::vector<double>& probs,
                             const std::string& where) {
  if (probs.empty()) throw InvalidInput(where + ": empty probability vector");
  double sum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double p = probs[k];
    if (!std::isfinite(p)) {
      std::ostringstream msg;
      msg << where << ": entry " << k << " is not finite";
      throw InvalidInput(msg.str());
    }
    if (p < 0.0) {
      std::ostringstream msg;
      msg << where << ": negative entry " << p << " at index " << k;
      throw InvalidInput(msg.str());
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << where << ": sum " << sum << " deviates from 1 by more than "
        << kProbTolerance;
    throw InvalidInput(msg.str());
  }
  if (sum != 1.0) {
    for (double& p : probs) p /= sum;
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  normalize_probabilities(probs_, "distribution");
}

Distribution Distribution::point_mass(std::size_t size, std::size_t at) {
  std::vector<double> probs(size, 0.0);
  probs.at(at) = 1.0;
  return Distribution(std::move(probs));
}

Distribution Distribution::uniform(std::size_t size) {
  if (size == 0) throw InvalidInput("uniform distribution over empty set");
  return Distribution(
      std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Kernel::Kernel(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidInput("kernel: no rows");
  rows_ = rows.size();
  cols_ = rows.front().size();
  data_.reserve(rows_ * cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (rows[r].size() != cols_) {
      std::ostringstream msg;
      msg << "kernel row " << r << ": has " << rows[r].size()
          << " entries, expected " << cols_;
      throw InvalidInput(msg.str());
    }
    std::vector<double> row = rows[r];
    normalize_probabilities(row, "kernel row " + std::to_string(r));
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

Kernel Kernel::identity(std::size_t size) {
  std::vector<std::vector<double>> rows(size, std::vector<double>(size, 0.0));
  for (std::size_t s = 0; s < size; ++s) rows[s][s] = 1.0;
  return Kernel(rows);
}

ChainSpec::ChainSpec(Distribution initial, std::vector<Kernel> kernels)
    : initial_(std::move(initial)), kernels_(std::move(kernels)) {
  if (initial_.size() == 0) throw InvalidInput("chain: empty initial law");
  sizes_.push_back(initial_.size());
  for (std::size_t k = 0; k < kernels_.size(); ++k) {
    if (kernels_[k].rows() != sizes_.back()) {
      std::ostringstream msg;
      msg << "kernel " << k << ": has " << kernels_[k].rows()
          << " rows but coordinate " << k << " has " << sizes_.back()
          << " states";
      throw InvalidInput(msg.str());
    }
    sizes_.push_back(kernels_[k].cols());
  }
}

ChainSpec ChainSpec::homogeneous(Distribution initial, const Kernel& kernel,
                                 std::size_t length) {
  if (length == 0) throw InvalidInput("chain: length must be at least 1");
  return ChainSpec(std::move(initial),
                   std::vector<Kernel>(length - 1, kernel));
}

ChainSpec validate_chain(const ChainData& data) {
  std::vector<double> initial = data.initial;
  normalize_probabilities(initial, "initial");
  std::vector<Kernel> kernels;
  kernels.reserve(data.kernels.size());
  for (std::size_t k = 0; k < data.kernels.size(); ++k) {
    const auto& rows = data.kernels[k];
    const std::string where = "kernel " + std::to_string(k);
    if (rows.empty()) throw InvalidInput(where + ": no rows");
    std::vector<std::vector<double>> checked(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.front().size()) {
        throw InvalidInput(where + ", row " + std::to_string(r) +
                           ": ragged row length");
      }
      checked[r] = rows[r];
      normalize_probabilities(checked[r],
                              where + ", row " + std::to_string(r));
    }
    kernels.emplace_back(checked);
  }
  ChainSpec spec(Distribution(std::move(initial)), std::move(kernels));
  if (!data.coord_sizes.empty()) {
    if (data.coord_sizes.size() != spec.length()) {
      throw InvalidInput("coord_sizes: length " +
                         std::to_string(data.coord_sizes.size()) +
                         " does not match " + std::to_string(spec.length()) +
                         " coordinates");
    }
    for (std::size_t i = 0; i < spec.length(); ++i) {
      if (data.coord_sizes[i] != spec.coord_size(i)) {
        throw InvalidInput("coord_sizes[" + std::to_string(i) + "] = " +
                           std::to_string(data.coord_sizes[i]) +
                           " does not match the kernel shapes (" +
                           std::to_string(spec.coord_size(i)) + ")");
      }
    }
  }
  return spec;
}

std::size_t checked_joint_size(std::span<const std::size_t> sizes,
                               std::size_t cap) {
  std::size_t total = 1;
  for (std::size_t s : sizes) {
    if (s != 0 && total > cap / s) {
      throw CapExceeded("joint state space exceeds the enumeration cap of " +
                        std::to_string(cap));
    }
    total *= s;
  }
  if (total > cap) {
    throw CapExceeded("joint state space of " + std::to_string(total) +
                      " exceeds the enumeration cap of " +
                      std::to_string(cap));
  }
  return total;
}

std::size_t flat_index(std::span<const std::size_t> states,
                       std::span<const std::size_t> sizes) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    index = index * sizes[k] + states[k];
  }
  return index;
}

Trajectory unflatten(std::size_t index, std::span<const std::size_t> sizes) {
  Trajectory states(sizes.size());
  for (std::size_t k = sizes.size(); k-- > 0;) {
    states[k] = index % sizes[k];
    index /= sizes[k];
  }
  return states;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw InvalidInput("tv_distance: length mismatch (" +
                       std::to_string(p.size()) + " vs " +
                       std::to_string(q.size()) + ")");
  }
  double l1 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) l1 += std::abs(p[k] - q[k]);
  return std::min(1.0, 0.5 * l1);
}

double dobrushin_coefficient(const Kernel& k) {
  double theta = 0.0;
  for (std::size_t a = 0; a < k.rows(); ++a) {
    for (std::size_t b = a + 1; b < k.rows(); ++b) {
      theta = std::max(theta, tv_distance(k.row(a), k.row(b)));
    }
  }
  return theta;
}

std::vector<double> propagate(std::span<const double> law, const Kernel& k) {
  std::vector<double> next(k.cols(), 0.0);
  for (std::size_t s = 0; s < k.rows(); ++s) {
    if (law[s] == 0.0) continue;
    const auto row = k.row(s);
    for (std::size_t t = 0; t < k.cols(); ++t) next[t] += law[s] * row[t];
  }
  return next;
}

std::vector<std::vector<double>> marginals(const ChainSpec& spec) {
  std::vector<std::vector<double>> out;
  out.reserve(spec.length());
  out.emplace_back(spec.initial().probs().begin(),
                   spec.initial().probs().end());
  for (const Kernel& k : spec.kernels()) out.push_back(propagate(out.back(), k));
  return out;
}

double prefix_probability(const ChainSpec& spec,
                          std::span<const std::size_t> prefix) {
  if (prefix.size() > spec.length()) {
    throw InvalidInput("prefix longer than the chain");
  }
  if (prefix.empty()) return 1.0;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (prefix[k] >= spec.coord_size(k)) {
      throw InvalidInput("prefix state " + std::to_string(prefix[k]) +
                         " out of range at coordinate " + std::to_string(k));
    }
  }
  double p = spec.initial()[prefix[0]];
  for (std::size_t k = 1; k < prefix.size(); ++k) {
    p *= spec.kernel(k - 1)(prefix[k - 1], prefix[k]);
  }
  return p;
}

BlockLaw expand_block(const ChainSpec& spec, std::size_t j,
                      std::vector<double> start, std::size_t cap) {
  BlockLaw block;
  block.first = j;
  block.sizes.assign(spec.coord_sizes().begin() + static_cast<long>(j),
                     spec.coord_sizes().end());
  checked_joint_size(block.sizes, cap);
  block.probs = std::move(start);
  for (std::size_t k = j; k + 1 < spec.length(); ++k) {
    const Kernel& kernel = spec.kernel(k);
    const std::size_t width = kernel.cols();
    std::vector<double> next(block.probs.size() * width, 0.0);
    for (std::size_t idx = 0; idx < block.probs.size(); ++idx) {
      const double mass = block.probs[idx];
      if (mass == 0.0) continue;
      const auto row = kernel.row(idx % kernel.rows());
      for (std::size_t y = 0; y < width; ++y) {
        next[idx * width + y] = mass * row[y];
      }
    }
    block.probs = std::move(next);
  }
  return block;
}

BlockLaw conditional_law(const ChainSpec& spec,
                         std::span<const std::size_t> prefix, std::size_t j,
                         std::size_t cap) {
  if (j >= spec.length() || j < prefix.size()) {
    throw InvalidInput("conditional_law: target coordinate " +
                       std::to_string(j) + " must lie in [" +
                       std::to_string(prefix.size()) + ", " +
                       std::to_string(spec.length()) + ")");
  }
  if (prefix_probability(spec, prefix) <= 0.0) {
    throw ZeroProbability("conditional_law: prefix has probability zero");
  }
  std::vector<double> law;
  std::size_t from;
  if (prefix.empty()) {
    law.assign(spec.initial().probs().begin(), spec.initial().probs().end());
    from = 0;
  } else {
    from = prefix.size() - 1;
    law.assign(spec.coord_size(from), 0.0);
    law[prefix.back()] = 1.0;
  }
  for (std::size_t k = from; k < j; ++k) law = propagate(law, spec.kernel(k));
  return expand_block(spec, j, std::move(law), cap);
}

std::vector<double> t_step_law(const ChainSpec& spec, std::size_t i,
                               std::size_t state, std::size_t t) {
  if (i + t >= spec.length()) {
    throw InvalidInput("t_step_law: position " + std::to_string(i) + " + " +
                       std::to_string(t) + " steps runs past the chain");
  }
  std::vector<double> law(spec.coord_size(i), 0.0);
  law.at(state) = 1.0;
  for (std::size_t k = i; k < i + t; ++k) law = propagate(law, spec.kernel(k));
  return law;
}

double t_step_pair_tv(const ChainSpec& spec, std::size_t i, std::size_t t) {
  if (i + t >= spec.length()) {
    throw InvalidInput("t_step_pair_tv: position " + std::to_string(i) +
                       " + " + std::to_string(t) +
                       " steps runs past the chain");
  }
  const std::size_t n = spec.coord_size(i);
  std::vector<std::vector<double>> laws;
  laws.reserve(n);
  for (std::size_t x = 0; x < n; ++x) laws.push_back(t_step_law(spec, i, x, t));
  double worst = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      worst = std::max(worst, tv_distance(laws[x], laws[y]));
    }
  }
  return worst;
}

void sample_trajectory_into(const ChainSpec& spec, std::uint64_t seed,
                            std::uint64_t replicate, Trajectory& out) {
  out.resize(spec.length());
  out[0] = rng::inverse_cdf(spec.initial().probs(),
                            rng::uniform(seed, replicate, 0));
  for (std::size_t k = 1; k < spec.length(); ++k) {
    out[k] = rng::inverse_cdf(spec.kernel(k - 1).row(out[k - 1]),
                              rng::uniform(seed, replicate, k));
  }
}

Trajectory sample_trajectory(const ChainSpec& spec, std::uint64_t seed,
                             std::uint64_t replicate) {
  Trajectory out;
  sample_trajectory_into(spec, seed, replicate, out);
  return out;
}

}  // namespace chainconc
