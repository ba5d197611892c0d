#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mpsched/mdp.hpp"
#include "mpsched/sim.hpp"
#include "mpsched/solver.hpp"

namespace mpsched {

/// `value` rounded to `digits` significant decimal digits.
double round_significant(double value, int digits = 12);

/// printf-style "%.<digits>g".
std::string format_significant(double value, int digits);

/// Policy file: shape header, gain and diagnostics, then one entry per state
/// with its tuple label, action vector (or "drop") and bias.
nlohmann::json solve_result_to_json(const TabularMdp& mdp, const SolveResult& result);

/// Reads the "states" table of a policy file. Throws ContractError when the
/// file does not describe the state space of `config`.
Policy policy_from_json(const nlohmann::json& doc, const SystemConfig& config);
Policy load_policy(const std::filesystem::path& path, const SystemConfig& config);

nlohmann::json report_to_json(const ReliabilityReport& report, const SystemConfig& config);

/// "state,count" rows for every visited state, in state-index order.
std::string histogram_csv(const ReliabilityReport& report, const SystemConfig& config);

/// Full dump: states, actions, rewards and sparse kernel rows.
nlohmann::json mdp_to_json(const TabularMdp& mdp);

}  // namespace mpsched
