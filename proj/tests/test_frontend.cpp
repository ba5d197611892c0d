#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "mpsched/config_io.hpp"
#include "mpsched/policy_table.hpp"
#include "mpsched/serialization.hpp"
#include "mpsched/sweep.hpp"

using namespace mpsched;
using nlohmann::json;

namespace {

const std::string kConfigDir = MPSCHED_CONFIG_DIR;

json base_doc() {
  return json::parse(R"({
    "fps": 120, "frame_bits": 400000, "packet_bits": 40000, "deadline_slots": 1.5,
    "links": [{"type": "onoff", "p_out": 0.2, "mean_outage_slots": 5},
              {"type": "exponential", "capacity": "36 Mb/s"}]
  })");
}

std::vector<std::string> fields_of(const json& doc) {
  try {
    config_from_json(doc);
  } catch (const ConfigError& e) {
    std::vector<std::string> out;
    for (const auto& i : e.issues()) out.push_back(i.field);
    return out;
  }
  return {};
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("rates accept bits/s and Mb/s forms") {
  CHECK(parse_rate("36 Mb/s") == 36e6);
  CHECK(parse_rate("36Mbps") == 36e6);
  CHECK(parse_rate("36000000 b/s") == 36e6);
  CHECK(parse_rate("36e6") == 36e6);
  CHECK(parse_rate("2.4 Gb/s") == 2.4e9);
  CHECK(parse_rate("500 kb/s") == 5e5);
  CHECK_THROWS(parse_rate("36 furlongs"));
  CHECK_THROWS(parse_rate("fast"));
  CHECK_THROWS(parse_rate(""));
}

TEST_CASE("config parsing") {
  const auto c = config_from_json(base_doc());
  CHECK(c.fps == 120.0);
  CHECK(block_packet_count(c) == 10);
  REQUIRE(c.links.size() == 2);
  CHECK(std::get<OnOffLink>(c.links[0]).p_out == 0.2);
  CHECK(std::get<ExponentialLink>(c.links[1]).capacity_bps == 36e6);
  CHECK(c.q_max == 4);
  CHECK(c.allow_drop);

  auto doc = base_doc();
  doc["links"][1]["capacity"] = 36e6;
  CHECK(std::get<ExponentialLink>(config_from_json(doc).links[1]).capacity_bps == 36e6);
}

TEST_CASE("config errors are reported per field") {
  auto doc = base_doc();
  doc["links"] = json::array();
  CHECK(has(fields_of(doc), "links"));

  doc = base_doc();
  doc.erase("fps");
  doc["q_max"] = 2.5;
  doc["allow_drop"] = "yes";
  doc["links"][0]["p_out"] = "high";
  doc["links"][1]["capacity"] = "36 parsecs";
  const auto f = fields_of(doc);
  CHECK(has(f, "fps"));
  CHECK(has(f, "q_max"));
  CHECK(has(f, "allow_drop"));
  CHECK(has(f, "links[0].p_out"));
  CHECK(has(f, "links[1].capacity"));

  doc = base_doc();
  doc["links"][0]["type"] = "laser";
  CHECK(has(fields_of(doc), "links[0].type"));

  doc = base_doc();
  doc["qmax"] = 8;
  CHECK(has(fields_of(doc), "qmax"));

  doc = base_doc();
  doc["links"][0]["p_out"] = 0.95;
  CHECK(has(fields_of(doc), "links[0].p_out"));

  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
  CHECK_THROWS_AS(load_config(kConfigDir + "/does-not-exist.cfg"), ConfigError);
}

TEST_CASE("config JSON round-trips") {
  const auto c = config_from_json(base_doc());
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("reference configs carry the evaluation parameters") {
  for (const char* name : {"pure-mmwave.cfg", "pure-sub6.cfg", "mixed.cfg"}) {
    CAPTURE(name);
    const auto c = load_config(kConfigDir + "/" + name);
    CHECK(c.fps == 120.0);
    CHECK(c.frame_bits == 400'000);
    CHECK(c.packet_bits == 40'000);
    CHECK(c.deadline_slots == 1.5);
    CHECK(c.links.size() == 2);
    for (const auto& link : c.links) {
      if (const auto* o = std::get_if<OnOffLink>(&link)) {
        CHECK(o->mean_outage_slots == 5.0);
        CHECK(o->p_out == 0.2);
      } else {
        CHECK(std::get<ExponentialLink>(link).capacity_bps == 36e6);
      }
    }
  }
}

TEST_CASE("sweep grids") {
  const auto outage = default_sweep(SweepParameter::OnOffOutage);
  const auto g = sweep_grid(outage);
  REQUIRE(g.size() == 21);
  CHECK(g.front() == 0.0);
  CHECK(g[4] == 0.1);
  CHECK(g.back() == 0.5);

  const auto cap = sweep_grid(default_sweep(SweepParameter::ExponentialCapacity));
  REQUIRE(cap.size() == 21);
  CHECK(cap.front() == 24e6);
  CHECK(cap[2] == 28.8e6);
  CHECK(cap[6] == 38.4e6);
  CHECK(cap.back() == 72e6);

  SweepSpec single = default_sweep(SweepParameter::ExponentialCapacity);
  single.from = single.to = 36e6;
  CHECK(sweep_grid(single) == std::vector<double>{36e6});

  CHECK(parse_sweep_parameter("onoff.p_out") == SweepParameter::OnOffOutage);
  CHECK(parse_sweep_parameter("exponential.capacity_bps") == SweepParameter::ExponentialCapacity);
  CHECK_THROWS(parse_sweep_parameter("p"));
}

TEST_CASE("sweep specs are checked against the config") {
  const auto mixed = load_config(kConfigDir + "/mixed.cfg");
  auto spec = default_sweep(SweepParameter::OnOffOutage);
  CHECK_NOTHROW(check_sweep(spec, mixed));
  spec.links = {1};
  CHECK_THROWS_AS(check_sweep(spec, mixed), ContractError);
  spec.links = {7};
  CHECK_THROWS_AS(check_sweep(spec, mixed), ContractError);
  spec.links = {};
  spec.step = 0.0;
  CHECK_THROWS_AS(check_sweep(spec, mixed), ContractError);
  spec.step = 0.1;
  spec.from = 0.4;
  spec.to = 0.1;
  CHECK_THROWS_AS(check_sweep(spec, mixed), ContractError);

  const auto sub6 = load_config(kConfigDir + "/pure-sub6.cfg");
  CHECK_THROWS_AS(check_sweep(default_sweep(SweepParameter::OnOffOutage), sub6), ContractError);
  const auto applied = apply_sweep_point(mixed, default_sweep(SweepParameter::OnOffOutage), 0.35);
  CHECK(std::get<OnOffLink>(applied.links[0]).p_out == 0.35);
  CHECK(std::get<ExponentialLink>(applied.links[1]).capacity_bps == 36e6);
}

TEST_CASE("pure mmWave sweep rows and byte-stable CSV") {
  auto config = load_config(kConfigDir + "/pure-mmwave.cfg");
  config.q_max = 2;  // on/off queues only matter in outage; keeps the test quick
  auto spec = default_sweep(SweepParameter::OnOffOutage);
  spec.workers = 1;
  const auto rows = run_sweep(config, spec);
  REQUIRE(rows.size() == 21);
  for (const auto& row : rows) {
    CHECK(row.ok);
    CHECK(std::abs(row.gain - (1 - row.value * row.value)) < 1e-6);
  }
  const auto csv = sweep_csv(rows);
  CHECK(csv.rfind("parameter,gain,sim_estimate,ci_low,ci_high\n", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  for (const auto& row : rows) {
    std::getline(lines, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == row.value);
    CHECK(std::abs(std::stod(line.substr(comma + 1)) - (1 - row.value * row.value)) < 1e-6);
    CHECK(line.substr(line.find(',', comma + 1)) == ",,,");
  }

  spec.workers = 4;
  spec.sim_blocks = 2000;
  spec.seed = 11;
  const auto with_sim = sweep_csv(run_sweep(config, spec));
  spec.workers = 1;
  CHECK(sweep_csv(run_sweep(config, spec)) == with_sim);
}

TEST_CASE("failed sweep points carry the error sentinel") {
  const auto config = load_config(kConfigDir + "/mixed.cfg");
  auto spec = default_sweep(SweepParameter::OnOffOutage);
  spec.from = spec.to = 0.3;
  spec.rvi.max_iter = 2;
  const auto rows = run_sweep(config, spec);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].ok);
  CHECK(sweep_csv(rows) == "parameter,gain,sim_estimate,ci_low,ci_high\n0.3,error,,,\n");
}

TEST_CASE("policy JSON round trip and mismatch detection") {
  const auto config = load_config(kConfigDir + "/mixed.cfg");
  const auto mdp = build_mdp(config);
  const auto result = relative_value_iteration(mdp);
  const auto doc = solve_result_to_json(mdp, result);
  CHECK(doc["format"] == "mpsched-policy/1");
  CHECK(doc["states"].size() == mdp.states.size());
  CHECK(doc["states"][0]["state"] == "(0,0|A)");
  const auto back = policy_from_json(json::parse(doc.dump()), config);
  CHECK(back.actions == result.policy.actions);

  auto other = config;
  other.q_max = 3;
  CHECK_THROWS_AS(policy_from_json(doc, other), ContractError);
  auto broken = doc;
  broken["states"][3]["action"] = json::array({1});
  CHECK_THROWS_AS(policy_from_json(broken, config), ContractError);

  // gain carries 12 significant digits
  CHECK(doc["gain"].get<double>() == round_significant(result.gain, 12));
  CHECK(format_significant(0.123456789012345, 12) == "0.123456789012");
}

TEST_CASE("policy table rendering") {
  const auto config = load_config(kConfigDir + "/pure-sub6.cfg");
  const auto mdp = build_mdp(config);
  const auto policy = relative_value_iteration(mdp).policy;

  const auto csv = render_policy_table(config, policy, TableFormat::Csv, 4);
  CHECK(csv.rfind("availability,q1,q2,frac1,frac2,redundancy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 25);
  CHECK(csv.find(",4,4,0.5,0.5,0.0\n") != std::string::npos);
  const auto full = render_policy_table(config, policy, TableFormat::Csv);
  CHECK(std::count(full.begin(), full.end(), '\n') == 1 + (config.q_max + 1) * (config.q_max + 1));

  const auto text = render_policy_table(config, policy, TableFormat::Text, 4);
  CHECK(text.find("0.5\\0.5") != std::string::npos);
  CHECK(text.find("redundancy") != std::string::npos);

  SystemConfig single;
  single.links = {ExponentialLink{36e6}};
  single.q_max = 0;
  const auto one = relative_value_iteration(build_mdp(single)).policy;
  const auto grid = render_policy_table(single, one, TableFormat::Csv);
  CHECK(grid == "availability,q1,frac1,redundancy\n,0,1.0,0.0\n");

  SystemConfig three;
  three.links = {ExponentialLink{36e6}, ExponentialLink{36e6}, ExponentialLink{36e6}};
  three.q_max = 0;
  CHECK_THROWS_AS(render_policy_table(three, Policy{}, TableFormat::Text), UnsupportedRenderingError);
}

TEST_CASE("mdp dump is complete JSON") {
  SystemConfig c;
  c.frame_bits = c.packet_bits = 40'000;
  c.q_max = 0;
  c.links = {OnOffLink{0.2, 5}, OnOffLink{0.2, 5}};
  const auto doc = mdp_to_json(build_mdp(c));
  CHECK(doc["states"].size() == 4);
  CHECK(doc["actions"].size() == 6);
  CHECK(doc.contains("config"));
}
