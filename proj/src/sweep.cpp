#include "mpsched/sweep.hpp"

#include <cmath>

#include "mpsched/mdp.hpp"
#include "mpsched/parallel.hpp"
#include "mpsched/serialization.hpp"
#include "mpsched/sim.hpp"

namespace mpsched {

namespace {

bool matches(const LinkModel& link, SweepParameter parameter) {
  return is_onoff(link) == (parameter == SweepParameter::OnOffOutage);
}

std::vector<std::size_t> target_links(const SweepSpec& spec, const SystemConfig& config) {
  if (!spec.links.empty()) return spec.links;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < config.links.size(); ++i) {
    if (matches(config.links[i], spec.parameter)) out.push_back(i);
  }
  return out;
}

}  // namespace

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "onoff.p_out") return SweepParameter::OnOffOutage;
  if (name == "exponential.capacity_bps") return SweepParameter::ExponentialCapacity;
  throw ContractError("unknown sweep parameter '" + std::string(name) +
                      "' (expected onoff.p_out or exponential.capacity_bps)");
}

std::string to_string(SweepParameter parameter) {
  return parameter == SweepParameter::OnOffOutage ? "onoff.p_out" : "exponential.capacity_bps";
}

SweepSpec default_sweep(SweepParameter parameter) {
  SweepSpec spec;
  spec.parameter = parameter;
  if (parameter == SweepParameter::ExponentialCapacity) {
    spec.from = 24e6;
    spec.to = 72e6;
    spec.step = 2.4e6;
  }
  return spec;
}

void check_sweep(const SweepSpec& spec, const SystemConfig& config) {
  if (!(spec.step > 0.0) || !std::isfinite(spec.step)) throw ContractError("sweep step must be positive");
  if (!(spec.from <= spec.to)) throw ContractError("sweep requires from <= to");
  const auto links = target_links(spec, config);
  if (links.empty()) {
    throw ContractError("configuration has no link the parameter " + to_string(spec.parameter) + " applies to");
  }
  for (const auto i : links) {
    if (i >= config.links.size()) throw ContractError("sweep link index " + std::to_string(i) + " out of range");
    if (!matches(config.links[i], spec.parameter)) {
      throw ContractError("link " + std::to_string(i) + " has no parameter " + to_string(spec.parameter));
    }
  }
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
  const auto count = static_cast<std::size_t>(std::floor((spec.to - spec.from) / spec.step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(round_significant(spec.from + static_cast<double>(i) * spec.step, 12));
  }
  return grid;
}

SystemConfig apply_sweep_point(const SystemConfig& config, const SweepSpec& spec, double value) {
  SystemConfig out = config;
  for (const auto i : target_links(spec, config)) {
    if (auto* onoff = std::get_if<OnOffLink>(&out.links[i])) {
      onoff->p_out = value;
    } else {
      std::get<ExponentialLink>(out.links[i]).capacity_bps = value;
    }
  }
  return out;
}

std::vector<SweepRow> run_sweep(const SystemConfig& config, const SweepSpec& spec) {
  check_sweep(spec, config);
  const auto grid = sweep_grid(spec);
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), spec.workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = grid[i];
    try {
      const SystemConfig point = apply_sweep_point(config, spec, grid[i]);
      // Points already run concurrently; build each MDP on one thread.
      const auto mdp = build_mdp(point, BuildOptions{1});
      const auto solved = relative_value_iteration(mdp, spec.rvi);
      row.gain = solved.gain;
      if (spec.sim_blocks > 0) {
        const auto report = simulate(point, solved.policy, spec.sim_blocks, spec.seed);
        row.simulated = true;
        row.sim_estimate = report.estimate;
        row.ci_low = report.ci_low;
        row.ci_high = report.ci_high;
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "parameter,gain,sim_estimate,ci_low,ci_high\n";
  for (const auto& row : rows) {
    out += format_significant(row.value, 10);
    if (!row.ok) {
      out += ",error,,,\n";
      continue;
    }
    out += ',' + format_significant(row.gain, 12);
    if (row.simulated) {
      out += ',' + format_significant(row.sim_estimate, 12) + ',' + format_significant(row.ci_low, 12) + ',' +
             format_significant(row.ci_high, 12) + '\n';
    } else {
      out += ",,,\n";
    }
  }
  return out;
}

}  // namespace mpsched
