#include "chainconc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "chainconc/error.hpp"

namespace chainconc::io {

namespace {

template <typename T>
T field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw InvalidInput(std::string("missing field '") + name + "'");
  }
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("field '") + name + "': " + e.what());
  }
}

Json matrix_json(std::size_t rows, std::size_t cols,
                 std::span<const double> data) {
  Json j;
  j["shape"] = {rows, cols};
  j["data"] = std::vector<double>(data.begin(), data.end());
  return j;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
}

ChainSpec chain_from_json(const Json& j) {
  ChainData data;
  if (j.contains("kernel")) {
    const auto kernel = field<std::vector<std::vector<double>>>(j, "kernel");
    const auto n = field<std::size_t>(j, "n");
    if (n == 0) throw InvalidInput("field 'n': must be at least 1");
    data.kernels.assign(n - 1, kernel);
    if (!kernel.empty() && n == 1) {
      data.coord_sizes = {kernel.size()};
    }
  } else if (j.contains("kernels")) {
    data.kernels =
        field<std::vector<std::vector<std::vector<double>>>>(j, "kernels");
  }
  if (j.contains("coord_sizes")) {
    data.coord_sizes = field<std::vector<std::size_t>>(j, "coord_sizes");
  }
  if (j.contains("initial")) {
    data.initial = field<std::vector<double>>(j, "initial");
  } else {
    std::size_t states = 0;
    if (!data.kernels.empty()) {
      states = data.kernels.front().size();
    } else if (!data.coord_sizes.empty()) {
      states = data.coord_sizes.front();
    }
    if (states == 0) throw InvalidInput("missing field 'initial'");
    data.initial.assign(states, 1.0 / static_cast<double>(states));
  }
  return validate_chain(data);
}

Json to_json(const ChainSpec& spec) {
  Json j;
  j["coord_sizes"] = spec.coord_sizes();
  j["initial"] = std::vector<double>(spec.initial().probs().begin(),
                                     spec.initial().probs().end());
  Json kernels = Json::array();
  for (const Kernel& k : spec.kernels()) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < k.rows(); ++r) {
      rows.push_back(std::vector<double>(k.row(r).begin(), k.row(r).end()));
    }
    kernels.push_back(rows);
  }
  j["kernels"] = kernels;
  return j;
}

MdpSpec mdp_from_json(const Json& j) {
  const auto S = field<std::size_t>(j, "S");
  const auto A = field<std::size_t>(j, "A");
  const auto H = field<std::size_t>(j, "H");
  const auto transitions =
      field<std::vector<std::vector<std::vector<double>>>>(j, "transitions");
  const auto rewards = field<std::vector<std::vector<double>>>(j, "rewards");
  std::vector<double> initial;
  if (j.contains("initial")) {
    initial = field<std::vector<double>>(j, "initial");
  } else {
    initial.assign(S, 1.0 / static_cast<double>(S));
  }
  std::vector<double> caps;
  if (j.contains("stage_caps")) caps = field<std::vector<double>>(j, "stage_caps");

  if (transitions.size() != S) {
    throw InvalidInput("field 'transitions': expected S = " +
                       std::to_string(S) + " entries");
  }
  if (rewards.size() != S) {
    throw InvalidInput("field 'rewards': expected S = " + std::to_string(S) +
                       " rows");
  }
  std::vector<Distribution> rows;
  std::vector<double> flat_rewards;
  for (std::size_t s = 0; s < S; ++s) {
    if (transitions[s].size() != A) {
      throw InvalidInput("field 'transitions[" + std::to_string(s) +
                         "]': expected A = " + std::to_string(A) + " rows");
    }
    if (rewards[s].size() != A) {
      throw InvalidInput("field 'rewards[" + std::to_string(s) +
                         "]': expected A = " + std::to_string(A) + " entries");
    }
    for (std::size_t a = 0; a < A; ++a) {
      try {
        rows.emplace_back(transitions[s][a]);
      } catch (const InvalidInput& e) {
        throw InvalidInput("field 'transitions[" + std::to_string(s) + "][" +
                           std::to_string(a) + "]': " + e.what());
      }
      flat_rewards.push_back(rewards[s][a]);
    }
  }
  Distribution init;
  try {
    init = Distribution(initial);
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("field 'initial': ") + e.what());
  }
  return MdpSpec(S, A, H, std::move(init), std::move(rows),
                 std::move(flat_rewards), std::move(caps));
}

Json to_json(const MdpSpec& mdp) {
  Json j;
  j["S"] = mdp.states();
  j["A"] = mdp.actions();
  j["H"] = mdp.horizon();
  j["initial"] = std::vector<double>(mdp.initial().probs().begin(),
                                     mdp.initial().probs().end());
  Json transitions = Json::array();
  Json rewards = Json::array();
  for (std::size_t s = 0; s < mdp.states(); ++s) {
    Json t_row = Json::array();
    Json r_row = Json::array();
    for (std::size_t a = 0; a < mdp.actions(); ++a) {
      const auto p = mdp.transition(s, a).probs();
      t_row.push_back(std::vector<double>(p.begin(), p.end()));
      r_row.push_back(mdp.reward(s, a));
    }
    transitions.push_back(t_row);
    rewards.push_back(r_row);
  }
  j["transitions"] = transitions;
  j["rewards"] = rewards;
  j["stage_caps"] = mdp.stage_caps();
  return j;
}

FunctionSpec function_from_json(const Json& j, const ChainSpec& spec) {
  if (j.contains("values")) {
    return TabularFunction(spec.coord_sizes(),
                           field<std::vector<double>>(j, "values"));
  }
  if (j.contains("terms")) {
    AdditiveFunction f{field<std::vector<std::vector<double>>>(j, "terms")};
    if (f.terms.size() != spec.length()) {
      throw InvalidInput("field 'terms': expected one term per coordinate");
    }
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
      if (f.terms[i].size() != spec.coord_size(i)) {
        throw InvalidInput("field 'terms[" + std::to_string(i) +
                           "]': expected " + std::to_string(spec.coord_size(i)) +
                           " entries");
      }
    }
    return f;
  }
  throw InvalidInput("function: expected field 'values' or 'terms'");
}

Json to_json(const CouplingTable& table) {
  return matrix_json(table.rows, table.cols, table.joint);
}

Json to_json(const GammaMatrix& gamma) {
  Json j = matrix_json(gamma.size(), gamma.size(), gamma.entries());
  j["provenance"] = to_string(gamma.provenance());
  return j;
}

GammaMatrix gamma_from_json(const Json& j) {
  const auto shape = field<std::vector<std::size_t>>(j, "shape");
  if (shape.size() != 2 || shape[0] != shape[1]) {
    throw InvalidInput("field 'shape': gamma matrix must be square");
  }
  const auto name = j.contains("provenance")
                        ? field<std::string>(j, "provenance")
                        : std::string("contractive");
  GammaProvenance provenance = GammaProvenance::contractive;
  if (name == "ergodic") provenance = GammaProvenance::ergodic;
  if (name == "brute_force_tv") provenance = GammaProvenance::brute_force_tv;
  return GammaMatrix(shape[0], field<std::vector<double>>(j, "data"),
                     provenance);
}

Json to_json(const ConcentrationReport& report) {
  Json j;
  j["method"] = to_string(report.method.kind);
  if (report.method.kind == MethodKind::ergodic) {
    j["eps"] = report.method.eps;
    j["mixing_time"] = *report.mixing_time;
    j["block_boundaries"] = report.block_boundaries;
  }
  if (report.method.kind == MethodKind::contractive) {
    j["thetas"] = report.thetas;
  }
  j["weights"] = report.weights;
  j["gamma"] = to_json(report.gamma);
  j["gamma_norm"] = report.gamma_norm;
  j["sigma2_exact"] = report.sigma2_exact;
  j["sigma2_opnorm"] = report.sigma2_opnorm;
  j["sigma2_paper"] = report.sigma2_paper;
  j["convention"] = to_string(report.convention);
  Json curve = Json::array();
  for (const auto& [t, b] : report.tail_curve) curve.push_back({t, b});
  j["tail_curve"] = curve;
  return j;
}

Json to_json(const TailEstimate& est) {
  Json j;
  j["replicates"] = est.replicates;
  j["seed"] = est.seed;
  j["sigma2"] = est.sigma2;
  j["mean"] = est.mean;
  j["centering"] = est.centering;
  j["t"] = est.t_grid;
  j["empirical"] = est.empirical;
  j["se"] = est.standard_errors;
  j["bound"] = est.bound;
  j["violations_2se"] = est.violations(2.0);
  return j;
}

Json to_json(const MgfEstimate& est) {
  Json j;
  j["replicates"] = est.replicates;
  j["seed"] = est.seed;
  j["sigma2"] = est.sigma2;
  j["mean"] = est.mean;
  j["centering"] = est.centering;
  Json rows = Json::array();
  for (const auto& r : est.rows) {
    rows.push_back({{"lambda", r.lambda},
                    {"empirical", r.empirical},
                    {"se", r.standard_error},
                    {"bound", r.bound}});
  }
  j["rows"] = rows;
  return j;
}

Json to_json(const SupEstimate& est) {
  Json j;
  j["replicates"] = est.replicates;
  j["seed"] = est.seed;
  j["estimate"] = est.estimate;
  j["se"] = est.standard_error;
  j["exact_values"] = est.exact_values;
  return j;
}

Json to_json(const Policy& pi) {
  if (pi.stationary()) return Json(pi.tables().front());
  return Json(pi.tables());
}

Json to_json(const PolicyClass& pc) {
  Json j;
  j["metric"] = to_string(pc.metric().kind);
  j["scale"] = pc.metric().scale;
  Json policies = Json::array();
  for (const Policy& pi : pc.policies()) policies.push_back(to_json(pi));
  j["policies"] = policies;
  return j;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string tail_curve_csv(const ConcentrationReport& report) {
  std::string out = "t,bound\n";
  for (const auto& [t, b] : report.tail_curve) {
    out += format_number(t) + "," + format_number(b) + "\n";
  }
  return out;
}

std::string tail_estimate_csv(const TailEstimate& est) {
  std::string out = "t,empirical,se,bound\n";
  for (std::size_t k = 0; k < est.t_grid.size(); ++k) {
    out += format_number(est.t_grid[k]) + "," +
           format_number(est.empirical[k]) + "," +
           format_number(est.standard_errors[k]) + "," +
           format_number(est.bound[k]) + "\n";
  }
  return out;
}

std::string mgf_csv(const MgfEstimate& est) {
  std::string out = "lambda,empirical,se,bound\n";
  for (const auto& r : est.rows) {
    out += format_number(r.lambda) + "," + format_number(r.empirical) + "," +
           format_number(r.standard_error) + "," + format_number(r.bound) +
           "\n";
  }
  return out;
}

}  // namespace chainconc::io
