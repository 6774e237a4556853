#include "doctest.h"

#include <cmath>
#include <random>

#include "chainconc/chain.hpp"
#include "chainconc/error.hpp"
#include "chainconc/rng.hpp"
#include "support.hpp"

using namespace chainconc;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using rng::Counter;
  using rng::Key;
  CHECK(rng::philox4x32({0, 0, 0, 0}, {0, 0}) ==
        Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(rng::philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                        {0xffffffff, 0xffffffff}) ==
        Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(rng::philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                        {0xa4093822, 0x299f31d0}) ==
        Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniform variates are keyed and in [0, 1)") {
  CHECK(rng::uniform(1, 2, 3) == rng::uniform(1, 2, 3));
  CHECK(rng::uniform(1, 2, 3) != rng::uniform(1, 2, 4));
  CHECK(rng::uniform(1, 2, 3) != rng::uniform(1, 3, 3));
  CHECK(rng::uniform(1, 2, 3) != rng::uniform(2, 2, 3));
  double total = 0.0;
  const int n = 100000;
  for (int r = 0; r < n; ++r) {
    const double u = rng::uniform(7, static_cast<std::uint64_t>(r), 0);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    total += u;
  }
  // Mean of U(0,1) has SE 1/sqrt(12 n) ~ 9e-4.
  CHECK(std::abs(total / n - 0.5) < 5e-3);
}

TEST_CASE("inverse_cdf") {
  const std::vector<double> p{0.2, 0.0, 0.5, 0.3};
  CHECK(rng::inverse_cdf(p, 0.0) == 0);
  CHECK(rng::inverse_cdf(p, 0.19) == 0);
  CHECK(rng::inverse_cdf(p, 0.2) == 2);
  CHECK(rng::inverse_cdf(p, 0.69) == 2);
  CHECK(rng::inverse_cdf(p, 0.71) == 3);
  const std::vector<double> q{0.5, 0.5, 0.0};
  CHECK(rng::inverse_cdf(q, 0.9999999999999999) == 1);
}

TEST_CASE("validate_chain") {
  SUBCASE("exact stochastic matrix is accepted") {
    ChainData d{{}, {0.5, 0.5}, {{{0.5, 0.5}, {0.5, 0.5}}}};
    const ChainSpec spec = validate_chain(d);
    CHECK(spec.length() == 2);
  }
  SUBCASE("row summing to 1.5 names kernel 0") {
    ChainData d{{}, {0.5, 0.5}, {{{1.0, 0.5}, {0.5, 0.5}}}};
    try {
      validate_chain(d);
      FAIL("expected rejection");
    } catch (const InvalidInput& e) {
      CHECK(std::string(e.what()).find("kernel 0") != std::string::npos);
    }
  }
  SUBCASE("sum within tolerance is renormalized") {
    ChainData d{{}, {0.5, 0.5}, {{{0.5, 0.5 + 1e-13}, {0.5, 0.5}}}};
    const ChainSpec spec = validate_chain(d);
    CHECK(spec.kernel(0)(0, 0) + spec.kernel(0)(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("negative entry and shape mismatch") {
    CHECK_THROWS_AS(validate_chain({{}, {0.5, 0.5}, {{{1.5, -0.5}, {0.5, 0.5}}}}),
                    InvalidInput);
    CHECK_THROWS_AS(validate_chain({{}, {0.5, 0.5}, {{{1.0}, {1.0}, {1.0}}}}),
                    InvalidInput);
    CHECK_THROWS_AS(validate_chain({{}, {0.5, 0.5}, {{{0.5, 0.5}, {0.5, 0.5}},
                                                      {{1.0, 0.0}}}}),
                    InvalidInput);
    CHECK_THROWS_AS(validate_chain({{3, 2}, {0.5, 0.5}, {{{0.5, 0.5}, {0.5, 0.5}}}}),
                    InvalidInput);
  }
}

TEST_CASE("tv_distance") {
  CHECK(tv_distance(Distribution({0.5, 0.5}), Distribution({0.5, 0.5})) == 0.0);
  CHECK(tv_distance(Distribution({1.0, 0.0}), Distribution({0.0, 1.0})) == 1.0);
  CHECK(tv_distance(Distribution({0.5, 0.5}), Distribution({0.8, 0.2})) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(tv_distance(Distribution({1.0}), Distribution({0.5, 0.5})),
                  InvalidInput);

  std::mt19937_64 gen(11);
  for (int k = 0; k < 200; ++k) {
    const auto p = oracle::random_probs(gen, 5, 0.3);
    const auto q = oracle::random_probs(gen, 5, 0.3);
    const double d = tv_distance(p, q);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d == tv_distance(q, p));
    CHECK(tv_distance(p, p) == 0.0);
  }
}

TEST_CASE("dobrushin_coefficient") {
  CHECK(dobrushin_coefficient(Kernel::identity(2)) == 1.0);
  CHECK(dobrushin_coefficient(Kernel({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}})) == 0.0);
  CHECK(dobrushin_coefficient(Kernel({{0.9, 0.1}, {0.2, 0.8}})) ==
        doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("flat_index and unflatten are inverse") {
  const std::vector<std::size_t> sizes{2, 3, 2};
  for (std::size_t k = 0; k < 12; ++k) CHECK(flat_index(unflatten(k, sizes), sizes) == k);
  CHECK(flat_index(std::vector<std::size_t>{1, 0, 0}, sizes) == 6);
  CHECK_THROWS_AS(checked_joint_size(std::vector<std::size_t>{1000, 1000, 2}, 1'000'000),
                  CapExceeded);
}

TEST_CASE("marginals and prefix probabilities match the joint law") {
  std::mt19937_64 gen(5);
  for (int inst = 0; inst < 20; ++inst) {
    const ChainSpec spec = oracle::random_chain(gen, 4, 3);
    const auto joint = oracle::joint_law(spec);
    const auto m = marginals(spec);
    for (std::size_t i = 0; i < spec.length(); ++i) {
      for (std::size_t x = 0; x < spec.coord_size(i); ++x) {
        const double ref = oracle::mean(joint, [&](const Trajectory& t) { return t[i] == x ? 1.0 : 0.0; });
        CHECK(m[i][x] == doctest::Approx(ref).epsilon(1e-12));
      }
    }
    for (const auto& path : joint.paths) {
      const Trajectory prefix(path.begin(), path.begin() + 2);
      const double ref = oracle::mean(joint, [&](const Trajectory& t) { return oracle::has_prefix(t, prefix) ? 1.0 : 0.0; });
      CHECK(std::abs(prefix_probability(spec, prefix) - ref) < 1e-12);
    }
  }
}

TEST_CASE("conditional_law matches joint enumeration") {
  std::mt19937_64 gen(17);
  for (int inst = 0; inst < 20; ++inst) {
    const ChainSpec spec = oracle::random_chain(gen, 4, 3);
    const auto joint = oracle::joint_law(spec);
    for (const auto& path : joint.paths) {
      for (std::size_t len = 1; len <= 3; ++len) {
        const Trajectory prefix(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(len));
        if (!(prefix_probability(spec, prefix) > 0.0)) {
          CHECK_THROWS_AS(conditional_law(spec, prefix, len), ZeroProbability);
          continue;
        }
        for (std::size_t j = len; j < spec.length(); ++j) {
          const BlockLaw law = conditional_law(spec, prefix, j);
          for (std::size_t b = 0; b < law.probs.size(); ++b) {
            const Trajectory block = unflatten(b, law.sizes);
            const double ref = oracle::conditional_mean(joint, [&](const Trajectory& t) {
              return std::equal(block.begin(), block.end(), t.begin() + static_cast<std::ptrdiff_t>(j)) ? 1.0 : 0.0;
            }, prefix);
            CHECK(std::abs(law.probs[b] - ref) < 1e-12);
          }
        }
      }
    }
  }
  const ChainSpec spec = oracle::two_state_chain(3);
  CHECK_THROWS_AS(conditional_law(spec, std::vector<std::size_t>{0, 1}, 1), InvalidInput);
}

TEST_CASE("t-step laws against matrix powers") {
  const ChainSpec spec = oracle::two_state_chain(8);
  const oracle::Matrix k{{0.9, 0.1}, {0.2, 0.8}};
  for (std::size_t t = 1; t < 8; ++t) {
    const auto kt = oracle::matpow(k, t);
    const auto law = t_step_law(spec, 0, 0, t);
    CHECK(law[0] == doctest::Approx(kt[0][0]).epsilon(1e-13));
    CHECK(t_step_pair_tv(spec, 0, t) == doctest::Approx(oracle::row_tv_max(kt)).epsilon(1e-12));
    CHECK(t_step_pair_tv(spec, 0, t) == doctest::Approx(std::pow(0.7, t)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(t_step_pair_tv(spec, 3, 5), InvalidInput);
}

TEST_CASE("sample_trajectory is deterministic and has the right law") {
  const ChainSpec spec = oracle::two_state_chain(3);
  CHECK(sample_trajectory(spec, 42, 7) == sample_trajectory(spec, 42, 7));
  const auto joint = oracle::joint_law(spec);
  std::vector<double> counts(joint.paths.size(), 0.0);
  const std::size_t n = 200000;
  Trajectory t;
  for (std::size_t r = 0; r < n; ++r) {
    sample_trajectory_into(spec, 3, r, t);
    counts[flat_index(t, spec.coord_sizes())] += 1.0;
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double p = joint.probs[k];
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(counts[k] / n - p) < 5 * se + 1e-12);
  }
}
