#include "mpsched/config_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <string>

namespace mpsched {

namespace {

std::string lowercase_compact(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

struct Reader {
  const nlohmann::json& doc;
  std::vector<FieldIssue>& issues;

  template <typename T>
  void number(const char* key, T& out, bool required) {
    if (!doc.contains(key)) {
      if (required) issues.push_back({key, "missing"});
      return;
    }
    const auto& v = doc.at(key);
    if (!v.is_number()) {
      issues.push_back({key, "must be a number"});
      return;
    }
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) {
        issues.push_back({key, "must be an integer"});
        return;
      }
    }
    out = v.get<T>();
  }
};

LinkModel parse_link(const nlohmann::json& doc, const std::string& prefix,
                     std::vector<FieldIssue>& issues) {
  if (!doc.is_object()) {
    issues.push_back({prefix, "must be an object"});
    return ExponentialLink{};
  }
  const std::string type = doc.value("type", std::string{});
  if (type == "onoff") {
    OnOffLink link;
    if (!doc.contains("p_out") || !doc["p_out"].is_number()) {
      issues.push_back({prefix + ".p_out", "missing or not a number"});
    } else {
      link.p_out = doc["p_out"].get<double>();
    }
    if (doc.contains("mean_outage_slots")) {
      if (!doc["mean_outage_slots"].is_number()) {
        issues.push_back({prefix + ".mean_outage_slots", "must be a number"});
      } else {
        link.mean_outage_slots = doc["mean_outage_slots"].get<double>();
      }
    }
    return link;
  }
  if (type == "exponential") {
    ExponentialLink link;
    const char* key = doc.contains("capacity") ? "capacity" : "capacity_bps";
    if (!doc.contains(key)) {
      issues.push_back({prefix + ".capacity", "missing"});
      return link;
    }
    try {
      const auto& v = doc[key];
      link.capacity_bps = v.is_string() ? parse_rate(v.get<std::string>()) : v.get<double>();
    } catch (const std::exception& e) {
      issues.push_back({prefix + ".capacity", e.what()});
    }
    return link;
  }
  issues.push_back({prefix + ".type", "must be \"onoff\" or \"exponential\""});
  return ExponentialLink{};
}

}  // namespace

double parse_rate(std::string_view text) {
  const std::string s = lowercase_compact(text);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || end == s.data()) {
    throw std::invalid_argument("cannot parse rate '" + std::string(text) + "'");
  }
  const std::string unit(end, s.data() + s.size());
  double scale = 0.0;
  if (unit.empty() || unit == "b/s" || unit == "bps" || unit == "bit/s") {
    scale = 1.0;
  } else if (unit == "kb/s" || unit == "kbps" || unit == "kbit/s") {
    scale = 1e3;
  } else if (unit == "mb/s" || unit == "mbps" || unit == "mbit/s") {
    scale = 1e6;
  } else if (unit == "gb/s" || unit == "gbps" || unit == "gbit/s") {
    scale = 1e9;
  } else {
    throw std::invalid_argument("unknown rate unit '" + unit + "' in '" + std::string(text) + "'");
  }
  return value * scale;
}

SystemConfig config_from_json(const nlohmann::json& doc) {
  std::vector<FieldIssue> issues;
  SystemConfig config;
  if (!doc.is_object()) {
    throw ConfigError("<root>", "configuration must be a JSON object");
  }
  static const std::set<std::string> known = {"fps",     "frame_bits", "packet_bits", "deadline_slots",
                                               "q_max",   "n_cap",      "allow_drop",  "epsilon",
                                               "state_limit", "links",  "$schema"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) issues.push_back({key, "unknown field"});
  }
  Reader r{doc, issues};
  r.number("fps", config.fps, true);
  r.number("frame_bits", config.frame_bits, true);
  r.number("packet_bits", config.packet_bits, true);
  r.number("deadline_slots", config.deadline_slots, true);
  r.number("q_max", config.q_max, false);
  r.number("n_cap", config.n_cap, false);
  r.number("epsilon", config.epsilon, false);
  r.number("state_limit", config.state_limit, false);
  if (doc.contains("allow_drop")) {
    if (doc["allow_drop"].is_boolean()) {
      config.allow_drop = doc["allow_drop"].get<bool>();
    } else {
      issues.push_back({"allow_drop", "must be true or false"});
    }
  }

  if (!doc.contains("links") || !doc["links"].is_array()) {
    issues.push_back({"links", "missing or not an array"});
  } else {
    const auto& links = doc["links"];
    for (std::size_t i = 0; i < links.size(); ++i) {
      config.links.push_back(parse_link(links[i], "links[" + std::to_string(i) + "]", issues));
    }
  }

  if (issues.empty()) issues = validation_issues(config);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return config;
}

nlohmann::json config_to_json(const SystemConfig& config) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& link : config.links) {
    if (const auto* onoff = std::get_if<OnOffLink>(&link)) {
      links.push_back({{"type", "onoff"},
                       {"p_out", onoff->p_out},
                       {"mean_outage_slots", onoff->mean_outage_slots}});
    } else {
      links.push_back({{"type", "exponential"},
                       {"capacity", std::get<ExponentialLink>(link).capacity_bps}});
    }
  }
  return {{"fps", config.fps},
          {"frame_bits", config.frame_bits},
          {"packet_bits", config.packet_bits},
          {"deadline_slots", config.deadline_slots},
          {"q_max", config.q_max},
          {"n_cap", config.n_cap},
          {"allow_drop", config.allow_drop},
          {"epsilon", config.epsilon},
          {"state_limit", config.state_limit},
          {"links", links}};
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(doc);
}

}  // namespace mpsched
