#include "chainconc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "chainconc/concentration.hpp"
#include "chainconc/coupling.hpp"
#include "chainconc/error.hpp"
#include "chainconc/io.hpp"
#include "chainconc/mc_verify.hpp"
#include "chainconc/rl_bounds.hpp"

namespace chainconc::cli {

namespace {

using io::Json;

constexpr double kCouplingTolerance = 1e-12;

const char* kQuarterCaveat =
    "Azuma-Hoeffding gives variance parameter 1/4 sum ||B_k - A_k||^2: "
    "sigma2_exact = 1/4 ||Gamma c||^2 and sigma2_opnorm = 1/4 ||Gamma||^2 "
    "||c||^2 carry the 1/4, sigma2_paper = ||Gamma||^2 ||c||^2 omits it.";
const char* kPolicyCountCaveat =
    "Stationary deterministic policies number A^S, not S*A; the maximal "
    "inequality uses ln|Pi| while the finite state-action formulas take "
    "ln(S*A) as stated.";
const char* kCrnCaveat =
    "E sup is estimated with common random numbers: every policy's "
    "trajectory in a replicate is driven by the same uniforms. The coupling "
    "across policies is a modelling choice; per-policy marginals are exact.";
const char* kDudleyCaveat =
    "The Dudley bound assumes (V_pi) is subgaussian in the scaled policy "
    "metric; it is conditional on that assumption.";
const char* kUnionCaveat =
    "The union variant realizes the suppressed log factor as sqrt(ln(S*A)).";

Json config_echo(const RunConfig& c) {
  Json j;
  j["subcommand"] = c.subcommand;
  if (!c.input.empty()) j["input"] = c.input;
  if (!c.function.empty()) j["function"] = c.function;
  if (!c.certificate.empty()) j["certificate"] = c.certificate;
  if (!c.weights.empty()) j["weights"] = c.weights;
  if (!c.thetas.empty()) j["thetas"] = c.thetas;
  if (c.blocks != 0) j["blocks"] = c.blocks;
  j["seed"] = c.seed;
  j["replicates"] = c.replicates;
  j["eps"] = c.eps;
  j["method"] = c.method;
  j["convention"] = c.convention;
  j["metric"] = c.metric;
  j["scale"] = c.scale;
  if (c.expected_c) j["expected_c"] = *c.expected_c;
  j["cap"] = c.cap;
  return j;
}

Json envelope(const RunConfig& c) {
  Json j;
  j["tool"] = "chainconc";
  j["version"] = kVersion;
  j["config"] = config_echo(c);
  j["seed"] = c.seed;
  j["convention"] = c.convention;
  j["caveats"] = Json::array({kQuarterCaveat, kPolicyCountCaveat});
  return j;
}

void emit(const RunConfig& c, const Json& report, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (c.output.empty()) {
    out << text;
  } else {
    io::write_text_file(c.output, text);
  }
}

Method method_of(const RunConfig& c) {
  switch (parse_method(c.method)) {
    case MethodKind::contractive:
      return Method::contractive();
    case MethodKind::ergodic:
      return Method::ergodic(c.eps);
    case MethodKind::brute_force:
      return Method::brute_force();
  }
  return Method::contractive();
}

ChainSpec load_chain(const RunConfig& c) {
  if (c.input.empty()) throw InvalidInput("--input is required");
  return io::chain_from_json(io::read_json_file(c.input));
}

LipschitzWeights weights_for(const RunConfig& c, std::size_t n) {
  if (c.weights.empty()) return LipschitzWeights::unit(n);
  if (c.weights.size() != n) {
    throw InvalidInput("--weights: expected " + std::to_string(n) +
                       " values, got " + std::to_string(c.weights.size()));
  }
  return LipschitzWeights(c.weights);
}

int run_certify(const RunConfig& c, std::ostream& out) {
  const ChainSpec spec = load_chain(c);
  const auto report = certify(spec, weights_for(c, spec.length()), method_of(c),
                              parse_convention(c.convention), c.cap);
  Json j = envelope(c);
  j["result"] = io::to_json(report);
  emit(c, j, out);
  if (!c.csv.empty()) io::write_text_file(c.csv, io::tail_curve_csv(report));
  return kOk;
}

struct VerifyOutcome {
  Json json;
  bool violated = false;
};

VerifyOutcome verify_function(const RunConfig& c, const ChainSpec& spec,
                              const TrajectoryFunction& f,
                              const LipschitzWeights& weights,
                              double max_deviation) {
  const Convention convention = parse_convention(c.convention);
  VerifyOutcome outcome;
  double sigma2;
  if (!c.certificate.empty()) {
    const Json cert = io::read_json_file(c.certificate);
    const Json& result = cert.contains("result") ? cert.at("result") : cert;
    const std::string key = std::string("sigma2_") + to_string(convention);
    if (!result.contains(key)) {
      throw InvalidInput("certificate: missing field '" + key + "'");
    }
    sigma2 = result.at(key).get<double>();
    outcome.json["certificate_sigma2"] = sigma2;
  } else {
    const auto report = certify(spec, weights, method_of(c), convention, c.cap);
    sigma2 = report.sigma2(convention);
    outcome.json["certificate"] = io::to_json(report);
  }
  if (!(sigma2 > 0.0)) {
    throw InvalidInput("certificate: sigma2 must be positive to verify");
  }
  const auto grid = default_t_grid(sigma2);
  const auto tail =
      empirical_tail(spec, f, sigma2, grid, c.replicates, c.seed, c.threads);
  const auto mgf = empirical_mgf(spec, f, sigma2, default_lambda_grid(sigma2),
                                 max_deviation, c.replicates, c.seed, c.threads);
  outcome.json["tail"] = io::to_json(tail);
  outcome.json["mgf"] = io::to_json(mgf);
  const auto bad = tail.violations(2.0);
  outcome.violated = !bad.empty();
  outcome.json["verdict"] = outcome.violated ? "violated" : "consistent";
  if (!c.csv.empty()) io::write_text_file(c.csv, io::tail_estimate_csv(tail));
  if (!c.mgf_csv.empty()) io::write_text_file(c.mgf_csv, io::mgf_csv(mgf));
  return outcome;
}

void report_violations(const Json& tail, std::ostream& err) {
  for (const auto& k : tail.at("violations_2se")) {
    const std::size_t idx = k.get<std::size_t>();
    err << "bound violated at grid point t = "
        << io::format_number(tail.at("t")[idx].get<double>())
        << ": empirical " << io::format_number(tail.at("empirical")[idx].get<double>())
        << " > bound " << io::format_number(tail.at("bound")[idx].get<double>())
        << " + 2 SE\n";
  }
}

int run_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ChainSpec spec = load_chain(c);
  TrajectoryFunction f;
  LipschitzWeights weights = LipschitzWeights::unit(spec.length());
  double max_deviation = 0.0;
  if (c.function.empty()) {
    // Default statistic: weighted count of visits to state 0.
    const auto w = weights_for(c, spec.length());
    AdditiveFunction add;
    for (std::size_t i = 0; i < spec.length(); ++i) {
      std::vector<double> term(spec.coord_size(i), 0.0);
      term[0] = w[i];
      add.terms.push_back(std::move(term));
    }
    f = as_trajectory_function(add, spec);
    weights = add.weights();
    for (double x : w.values()) max_deviation += x;
  } else {
    const auto parsed =
        io::function_from_json(io::read_json_file(c.function), spec);
    if (const auto* table = std::get_if<TabularFunction>(&parsed)) {
      checked_joint_size(table->sizes(), c.cap);
      f = as_trajectory_function(*table, spec);
      weights = LipschitzWeights(local_oscillation_vector(*table, spec));
      for (double v : table->values()) {
        max_deviation = std::max(max_deviation, std::abs(v - *f.exact_mean));
      }
    } else {
      const auto& add = std::get<AdditiveFunction>(parsed);
      f = as_trajectory_function(add, spec);
      weights = add.weights();
      for (double x : weights.values()) max_deviation += x;
    }
  }
  const auto outcome = verify_function(c, spec, f, weights, max_deviation);
  Json j = envelope(c);
  j["weights"] = std::vector<double>(weights.values().begin(),
                                     weights.values().end());
  j["result"] = outcome.json;
  emit(c, j, out);
  if (outcome.violated) {
    report_violations(outcome.json.at("tail"), err);
    return kViolation;
  }
  return kOk;
}

int run_coupling(const RunConfig& c, std::ostream& out) {
  if (c.input.empty()) throw InvalidInput("--input is required");
  const Json in = io::read_json_file(c.input);
  if (!in.contains("p") || !in.contains("q")) {
    throw InvalidInput("coupling input: expected fields 'p' and 'q'");
  }
  Distribution p, q;
  try {
    p = Distribution(in.at("p").get<std::vector<double>>());
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("field 'p': ") + e.what());
  }
  try {
    q = Distribution(in.at("q").get<std::vector<double>>());
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("field 'q': ") + e.what());
  }
  const auto table = goldstein_coupling(p.probs(), q.probs());
  const double tv = tv_distance(p, q);
  const double off = table.off_diagonal_mass();
  double marginal_error = 0.0;
  const auto rows = table.row_sums();
  const auto cols = table.col_sums();
  for (std::size_t k = 0; k < p.size(); ++k) {
    marginal_error = std::max({marginal_error, std::abs(rows[k] - p[k]),
                               std::abs(cols[k] - q[k])});
  }
  Json j = envelope(c);
  Json r;
  r["coupling"] = io::to_json(table);
  r["tv_distance"] = tv;
  r["off_diagonal_mass"] = off;
  r["marginal_error"] = marginal_error;
  r["maximal"] = std::abs(off - tv) <= kCouplingTolerance &&
                 marginal_error <= kCouplingTolerance;
  j["result"] = r;
  emit(c, j, out);
  return kOk;
}

int run_mix(const RunConfig& c, std::ostream& out) {
  const ChainSpec spec = load_chain(c);
  const auto tau = mixing_time(spec, c.eps);
  Json j = envelope(c);
  Json r;
  r["eps"] = c.eps;
  if (tau) {
    r["mixing_time"] = *tau;
    double at_tau = 0.0;
    for (std::size_t i = 0; i + *tau < spec.length(); ++i) {
      at_tau = std::max(at_tau, t_step_pair_tv(spec, i, *tau));
    }
    r["max_tv_at_tau"] = at_tau;
  } else {
    r["mixing_time"] = "no-mix";
  }
  j["result"] = r;
  emit(c, j, out);
  return kOk;
}

int run_gamma(const RunConfig& c, std::ostream& out) {
  const MethodKind kind = parse_method(c.method);
  std::optional<GammaMatrix> gamma;
  switch (kind) {
    case MethodKind::contractive:
      if (!c.thetas.empty()) {
        gamma = gamma_contractive(c.thetas);
      } else {
        const ChainSpec spec = load_chain(c);
        std::vector<double> thetas;
        for (const Kernel& k : spec.kernels()) {
          thetas.push_back(dobrushin_coefficient(k));
        }
        gamma = gamma_contractive(thetas);
      }
      break;
    case MethodKind::ergodic:
      if (c.blocks == 0) throw InvalidInput("--blocks is required for ergodic");
      gamma = gamma_ergodic(c.blocks, c.eps);
      break;
    case MethodKind::brute_force:
      gamma = wasserstein_matrix_tv(load_chain(c), c.cap);
      break;
  }
  Json j = envelope(c);
  Json r;
  r["gamma"] = io::to_json(*gamma);
  r["operator_norm"] = operator_norm(*gamma);
  j["result"] = r;
  emit(c, j, out);
  return kOk;
}

struct PolicyAnalysis {
  MdpSpec mdp;
  PolicyClass policies;
  std::vector<ConcentrationReport> certificates;
  std::vector<double> mixing_times;
  double sigma2_max = 0.0;
};

PolicyAnalysis analyse_policies(const RunConfig& c) {
  if (c.input.empty()) throw InvalidInput("--input is required");
  MdpSpec mdp = io::mdp_from_json(io::read_json_file(c.input));
  PolicyClass base = enumerate_policies(mdp.states(), mdp.actions());
  const auto taus = policy_mixing_times(mdp, base, c.eps);
  PolicyMetric metric{parse_policy_metric(c.metric), c.scale, {}};
  if (metric.kind == PolicyMetricKind::mixing) metric.mixing_times = taus;
  PolicyClass pc(base.policies(), metric);
  const Convention convention = parse_convention(c.convention);
  const LipschitzWeights weights(mdp.stage_caps());
  std::vector<ConcentrationReport> certs;
  double sigma2_max = 0.0;
  for (const Policy& pi : pc.policies()) {
    certs.push_back(certify(induced_chain(mdp, pi), weights, method_of(c),
                            convention, c.cap));
    sigma2_max = std::max(sigma2_max, certs.back().sigma2(convention));
  }
  return {std::move(mdp), std::move(pc), std::move(certs), taus, sigma2_max};
}

Json bounds_json(const RunConfig& c, const PolicyAnalysis& a) {
  Json r;
  const MdpSpec& mdp = a.mdp;
  r["class_size"] = a.policies.size();
  r["state_action_count"] = mdp.states() * mdp.actions();
  r["log_class_differs_from_log_sa"] =
      a.policies.size() != mdp.states() * mdp.actions();
  r["policy_class"] = io::to_json(a.policies);
  Json per_policy = Json::array();
  for (std::size_t k = 0; k < a.policies.size(); ++k) {
    Json p;
    p["policy"] = io::to_json(a.policies[k]);
    p["exact_value"] = exact_value(mdp, a.policies[k]);
    p["mixing_time"] = a.mixing_times[k];
    p["sigma2_exact"] = a.certificates[k].sigma2_exact;
    p["sigma2_opnorm"] = a.certificates[k].sigma2_opnorm;
    p["sigma2_paper"] = a.certificates[k].sigma2_paper;
    per_policy.push_back(p);
  }
  r["policies"] = per_policy;
  r["sigma2_max"] = a.sigma2_max;
  r["maximal_bound"] = maximal_bound(a.sigma2_max, a.policies.size());

  std::vector<double> grid{0.0};
  for (std::size_t x = 0; x < a.policies.size(); ++x) {
    for (std::size_t y = x + 1; y < a.policies.size(); ++y) {
      grid.push_back(a.policies.distance(x, y));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  Json covering = Json::array();
  for (double eps : grid) covering.push_back({eps, covering_number(a.policies, eps)});
  r["covering_staircase"] = covering;
  // Under the Hamming metric distinct policies are at distance >= scale, so
  // C = (sum of stage caps) / scale bounds |V_π - V_π'| / d(π, π') surely.
  std::optional<double> expected_c = c.expected_c;
  if (!expected_c && a.policies.metric().kind == PolicyMetricKind::hamming) {
    double total = 0.0;
    for (double cap : mdp.stage_caps()) total += cap;
    expected_c = total / a.policies.metric().scale;
  }
  if (expected_c) {
    r["expected_c"] = *expected_c;
    r["lipschitz_process_bound"] =
        lipschitz_process_bound(a.sigma2_max, *expected_c, a.policies, grid);
  }
  r["dudley_bound"] = dudley_bound(a.policies, 1.0);
  const double tau_mix =
      *std::max_element(a.mixing_times.begin(), a.mixing_times.end());
  r["tau_mix"] = tau_mix;
  const auto H = static_cast<double>(mdp.horizon());
  r["finite_state_bound_max_mix"] = finite_state_bound(
      H, tau_mix, mdp.states(), mdp.actions(), FiniteStateVariant::max_mix);
  r["finite_state_bound_union"] = finite_state_bound(
      H, tau_mix, mdp.states(), mdp.actions(), FiniteStateVariant::union_bound);
  return r;
}

Json rl_envelope(const RunConfig& c) {
  Json j = envelope(c);
  j["caveats"].push_back(kDudleyCaveat);
  j["caveats"].push_back(kUnionCaveat);
  return j;
}

int run_rl_bound(const RunConfig& c, std::ostream& out) {
  const auto analysis = analyse_policies(c);
  Json j = rl_envelope(c);
  j["result"] = bounds_json(c, analysis);
  emit(c, j, out);
  return kOk;
}

int run_rl_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto analysis = analyse_policies(c);
  const auto sup = empirical_sup_value(analysis.mdp, analysis.policies,
                                       c.replicates, c.seed, c.threads);
  Json j = rl_envelope(c);
  j["caveats"].push_back(kCrnCaveat);
  Json r = bounds_json(c, analysis);
  r["empirical_sup"] = io::to_json(sup);
  const double maximal = r.at("maximal_bound").get<double>();
  const bool violated = sup.estimate > maximal + 2.0 * sup.standard_error;
  r["verdict"] = violated ? "violated" : "consistent";
  j["result"] = r;
  emit(c, j, out);
  if (violated) {
    err << "empirical E sup " << io::format_number(sup.estimate)
        << " exceeds the maximal bound " << io::format_number(maximal)
        << " + 2 SE\n";
    return kViolation;
  }
  return kOk;
}

int run_demo(const RunConfig& c, std::ostream& out, std::ostream& err) {
  constexpr std::size_t kLength = 20;
  const ChainSpec spec = ChainSpec::homogeneous(
      Distribution::uniform(2), Kernel({{0.9, 0.1}, {0.2, 0.8}}), kLength);
  const auto weights = LipschitzWeights::unit(kLength);
  const Convention convention = parse_convention(c.convention);
  const auto contractive =
      certify(spec, weights, Method::contractive(), convention, c.cap);
  const auto ergodic =
      certify(spec, weights, Method::ergodic(c.eps), convention, c.cap);

  AdditiveFunction visits;
  for (std::size_t i = 0; i < kLength; ++i) visits.terms.push_back({1.0, 0.0});
  const TrajectoryFunction f = as_trajectory_function(visits, spec);
  const double sigma2 = contractive.sigma2(convention);
  const auto tail = empirical_tail(spec, f, sigma2, default_t_grid(sigma2),
                                   c.replicates, c.seed, c.threads);

  Json j = envelope(c);
  Json r;
  r["chain"] = io::to_json(spec);
  r["statistic"] = "number of visits to state 0";
  const auto tau = mixing_time(spec, c.eps);
  if (tau) {
    r["mixing_time"] = *tau;
  } else {
    r["mixing_time"] = "no-mix";
  }
  r["contractive"] = io::to_json(contractive);
  r["ergodic"] = io::to_json(ergodic);
  r["tail"] = io::to_json(tail);
  const bool violated = !tail.violations(2.0).empty();
  r["verdict"] = violated ? "violated" : "consistent";
  j["result"] = r;
  emit(c, j, out);
  if (!c.csv.empty()) io::write_text_file(c.csv, io::tail_estimate_csv(tail));
  if (violated) {
    report_violations(r.at("tail"), err);
    return kViolation;
  }
  return kOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const std::string& cmd = config.subcommand;
    if (cmd == "certify") return run_certify(config, out);
    if (cmd == "verify") return run_verify(config, out, err);
    if (cmd == "coupling") return run_coupling(config, out);
    if (cmd == "mix") return run_mix(config, out);
    if (cmd == "gamma") return run_gamma(config, out);
    if (cmd == "rl-bound") return run_rl_bound(config, out);
    if (cmd == "rl-verify") return run_rl_verify(config, out, err);
    if (cmd == "demo") return run_demo(config, out, err);
    err << "error: unknown subcommand '" << cmd << "'\n";
    return kMalformedInput;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kMalformedInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kMalformedInput;
  }
}

}  // namespace chainconc::cli
