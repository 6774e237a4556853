#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chainconc/chain.hpp"

namespace chainconc::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kMalformedInput = 1,
  kInfeasible = 2,
  kViolation = 3,
};

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string output;
  std::string function;     // verify: {"values"} or {"terms"} file
  std::string certificate;  // verify: report written by certify
  std::string csv;          // certify / verify CSV sidecar
  std::string mgf_csv;      // verify
  std::vector<double> weights;
  std::vector<double> thetas;  // gamma --method contractive
  std::size_t blocks = 0;      // gamma --method ergodic
  std::uint64_t seed = 42;
  std::size_t replicates = 100'000;
  double eps = 0.25;
  std::string method = "contractive";
  std::string convention = "opnorm";
  std::string metric = "hamming";
  double scale = 1.0;
  std::optional<double> expected_c;
  std::size_t cap = kDefaultEnumerationCap;
  std::size_t threads = 1;  // not echoed: results do not depend on it
};

/// Executes one subcommand. The JSON report goes to config.output when set,
/// otherwise to `out`; diagnostics go to `err`. Returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace chainconc::cli
