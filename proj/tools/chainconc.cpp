#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "chainconc/cli.hpp"

namespace {

using chainconc::cli::RunConfig;

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--input,-i", c.input, "JSON input file");
  sub->add_option("--output,-o", c.output, "write the JSON report here");
  sub->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  sub->add_option("--replicates", c.replicates, "Monte Carlo replicates")
      ->capture_default_str();
  sub->add_option("--eps", c.eps, "mixing threshold")->capture_default_str();
  sub->add_option("--method", c.method, "contractive | ergodic | brute")
      ->capture_default_str();
  sub->add_option("--convention", c.convention, "exact | opnorm | paper")
      ->capture_default_str();
  sub->add_option("--metric", c.metric, "hamming | mixing")
      ->capture_default_str();
  sub->add_option("--scale", c.scale, "policy metric scale")
      ->capture_default_str();
  sub->add_option("--cap", c.cap, "enumeration cap (env CHAINCONC_CAP)");
  sub->add_option("--threads", c.threads, "worker threads, 0 = all cores")
      ->capture_default_str();
  sub->add_option("--weights", c.weights, "Lipschitz weights c_i")
      ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concentration certificates for finite Markov chains"};
  app.set_version_flag("--version", chainconc::cli::kVersion);
  app.require_subcommand(1);
  RunConfig c;

  const std::pair<const char*, const char*> commands[] = {
      {"certify", "compute Gamma, variance proxies and the tail bound"},
      {"verify", "Monte Carlo check of a certificate"},
      {"coupling", "maximal coupling of two distributions"},
      {"mix", "mixing time tau(eps)"},
      {"gamma", "build a Gamma matrix and its operator norm"},
      {"rl-bound", "uniform value-function deviation bounds"},
      {"rl-verify", "empirical E sup over the policy class"},
      {"demo", "two-state chain walkthrough"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, c);
    if (std::string(name) == "verify") {
      sub->add_option("--function", c.function, "function JSON file");
      sub->add_option("--certificate", c.certificate, "certify report");
      sub->add_option("--mgf-csv", c.mgf_csv, "MGF CSV output");
    }
    if (std::string(name) == "gamma") {
      sub->add_option("--thetas", c.thetas, "contraction coefficients")
          ->delimiter(',');
      sub->add_option("--blocks", c.blocks, "number of ergodic blocks");
    }
    if (std::string(name) == "rl-bound" || std::string(name) == "rl-verify") {
      double expected_c = 0.0;
      auto* opt = sub->add_option("--expected-c", expected_c,
                                  "Lipschitz constant E[C] of the process");
      opt->each([&c](const std::string& v) { c.expected_c = std::stod(v); });
    }
    if (std::string(name) == "certify" || std::string(name) == "verify" ||
        std::string(name) == "demo") {
      sub->add_option("--csv", c.csv, "CSV output");
    }
    sub->callback([&c, sub] { c.subcommand = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : chainconc::cli::kMalformedInput;
  }

  bool cap_given = false;
  for (const CLI::App* sub : app.get_subcommands()) {
    cap_given = cap_given || sub->count("--cap") > 0;
  }
  if (!cap_given) {
    if (const char* env = std::getenv("CHAINCONC_CAP")) {
      try {
        c.cap = std::stoull(env);
      } catch (const std::exception&) {
        std::cerr << "error: CHAINCONC_CAP must be a positive integer\n";
        return chainconc::cli::kMalformedInput;
      }
    }
  }
  return chainconc::cli::run(c, std::cout, std::cerr);
}
