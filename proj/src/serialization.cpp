#include "mpsched/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mpsched/config_io.hpp"

namespace mpsched {

namespace {

constexpr const char* kPolicyFormat = "mpsched-policy/1";

nlohmann::json link_types(const SystemConfig& config) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& link : config.links) out.push_back(is_onoff(link) ? "onoff" : "exponential");
  return out;
}

nlohmann::json action_to_json(const ActionVector& action) {
  if (action.drop) return "drop";
  return action.counts;
}

}  // namespace

std::string format_significant(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  return std::stod(format_significant(value, digits));
}

nlohmann::json solve_result_to_json(const TabularMdp& mdp, const SolveResult& result) {
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t s = 0; s < mdp.states.size(); ++s) {
    states.push_back({{"state", to_string(mdp.states[s])},
                      {"action", action_to_json(result.policy[s])},
                      {"bias", round_significant(result.bias(static_cast<Eigen::Index>(s)))}});
  }
  return {{"format", kPolicyFormat},
          {"block_packets", block_packet_count(mdp.config)},
          {"q_max", mdp.config.q_max},
          {"links", link_types(mdp.config)},
          {"gain", round_significant(result.gain, 12)},
          {"iterations", result.iterations},
          {"span_residual", round_significant(result.span_residual, 6)},
          {"damped", result.damped},
          {"states", states}};
}

Policy policy_from_json(const nlohmann::json& doc, const SystemConfig& config) {
  auto fail = [](const std::string& why) { throw ContractError("policy does not match configuration: " + why); };
  if (!doc.is_object() || doc.value("format", "") != kPolicyFormat) fail("not a policy file");
  if (doc.value("q_max", -1) != config.q_max) fail("q_max differs");
  if (doc.value("block_packets", -1) != block_packet_count(config)) fail("block size differs");
  if (doc.value("links", nlohmann::json{}) != link_types(config)) fail("link types differ");

  const StateSpace space(config);
  const auto& entries = doc.at("states");
  if (!entries.is_array() || entries.size() != space.size()) fail("state count differs");
  Policy policy;
  for (std::size_t s = 0; s < space.size(); ++s) {
    const auto& e = entries[s];
    const std::string label = to_string(space.state(s));
    if (e.value("state", "") != label) fail("state " + std::to_string(s) + " is not " + label);
    const auto& a = e.at("action");
    if (a.is_string() && a.get<std::string>() == "drop") {
      if (!config.allow_drop) fail("DROP action while allow_drop is false");
      policy.actions.push_back(ActionVector::make_drop(config.links.size()));
    } else if (a.is_array() && a.size() == config.links.size()) {
      ActionVector action;
      for (const auto& n : a) {
        if (!n.is_number_integer() || n.get<int>() < 0) fail("bad packet count at " + label);
        action.counts.push_back(n.get<int>());
      }
      policy.actions.push_back(std::move(action));
    } else {
      fail("malformed action at " + label);
    }
  }
  return policy;
}

Policy load_policy(const std::filesystem::path& path, const SystemConfig& config) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open policy file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractError(std::string("malformed policy JSON: ") + e.what());
  }
  return policy_from_json(doc, config);
}

nlohmann::json report_to_json(const ReliabilityReport& report, const SystemConfig& config) {
  const StateSpace space(config);
  nlohmann::json visits = nlohmann::json::array();
  for (std::size_t s = 0; s < report.state_visits.size(); ++s) {
    if (report.state_visits[s] == 0) continue;
    visits.push_back({{"state", to_string(space.state(s))}, {"count", report.state_visits[s]}});
  }
  return {{"blocks_total", report.blocks_total},
          {"blocks_on_time", report.blocks_on_time},
          {"estimate", report.estimate},
          {"ci_low", report.ci_low},
          {"ci_high", report.ci_high},
          {"confidence", report.confidence},
          {"batches", report.batches},
          {"batch_ci_low", report.batch_ci_low},
          {"batch_ci_high", report.batch_ci_high},
          {"seed", report.seed},
          {"state_visits", visits}};
}

std::string histogram_csv(const ReliabilityReport& report, const SystemConfig& config) {
  const StateSpace space(config);
  std::string out = "state,count\n";
  for (std::size_t s = 0; s < report.state_visits.size(); ++s) {
    if (report.state_visits[s] == 0) continue;
    out += '"' + to_string(space.state(s)) + "\"," + std::to_string(report.state_visits[s]) + '\n';
  }
  return out;
}

nlohmann::json mdp_to_json(const TabularMdp& mdp) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : mdp.states) states.push_back(to_string(s));
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : mdp.actions) actions.push_back(action_to_json(a));
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index s = 0; s < mdp.num_states(); ++s) {
    for (Eigen::Index a = 0; a < mdp.num_actions(); ++a) {
      nlohmann::json next = nlohmann::json::array();
      for (TabularMdp::Kernel::InnerIterator it(mdp.kernel, mdp.row(s, a)); it; ++it) {
        next.push_back({it.col(), it.value()});
      }
      rows.push_back({{"state", s}, {"action", a}, {"reward", mdp.reward(s, a)}, {"next", next}});
    }
  }
  return {{"config", config_to_json(mdp.config)}, {"states", states}, {"actions", actions}, {"rows", rows}};
}

}  // namespace mpsched
