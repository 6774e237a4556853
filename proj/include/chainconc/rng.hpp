#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace chainconc::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., Random123). Stateless: the output
// is a pure function of (counter, key).
Counter philox4x32(Counter counter, Key key);

// Uniform variate in [0, 1) with 53 random bits, keyed by
// (seed, replicate, coordinate). Identical on every platform.
double uniform(std::uint64_t seed, std::uint64_t replicate,
               std::uint64_t coordinate);

// Inverse-CDF draw from a probability vector. Falls back to the last index
// with positive mass when rounding leaves u above the final partial sum.
std::size_t inverse_cdf(std::span<const double> probs, double u);

}  // namespace chainconc::rng
