#pragma once

// JSON in, JSON/CSV out.

#include <string>
#include <variant>

#include "json.hpp"

#include "chainconc/chain.hpp"
#include "chainconc/concentration.hpp"
#include "chainconc/coupling.hpp"
#include "chainconc/mc_verify.hpp"
#include "chainconc/rl_bounds.hpp"

namespace chainconc::io {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// {"coord_sizes", "initial", "kernels"} or the homogeneous shorthand
/// {"kernel", "n", "initial"?}; a missing initial law defaults to uniform.
ChainSpec chain_from_json(const Json& j);
Json to_json(const ChainSpec& spec);

/// {"S", "A", "H", "initial", "transitions" (S x A x S), "rewards" (S x A),
/// "stage_caps"?}.
MdpSpec mdp_from_json(const Json& j);
Json to_json(const MdpSpec& mdp);

/// {"values": [...]} (tabular over the chain) or {"terms": [[...], ...]}.
using FunctionSpec = std::variant<TabularFunction, AdditiveFunction>;
FunctionSpec function_from_json(const Json& j, const ChainSpec& spec);

Json to_json(const CouplingTable& table);
Json to_json(const GammaMatrix& gamma);
GammaMatrix gamma_from_json(const Json& j);
Json to_json(const ConcentrationReport& report);
Json to_json(const TailEstimate& est);
Json to_json(const MgfEstimate& est);
Json to_json(const SupEstimate& est);
Json to_json(const Policy& pi);
Json to_json(const PolicyClass& pc);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

/// "t,bound"
std::string tail_curve_csv(const ConcentrationReport& report);
/// "t,empirical,se,bound"
std::string tail_estimate_csv(const TailEstimate& est);
/// "lambda,empirical,se,bound"
std::string mgf_csv(const MgfEstimate& est);

}  // namespace chainconc::io
