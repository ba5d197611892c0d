#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mpsched/model.hpp"
#include "mpsched/solver.hpp"

namespace mpsched {

enum class SweepParameter { OnOffOutage, ExponentialCapacity };

/// Accepts "onoff.p_out" and "exponential.capacity_bps".
SweepParameter parse_sweep_parameter(std::string_view name);
std::string to_string(SweepParameter parameter);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::OnOffOutage;
  std::vector<std::size_t> links;  // empty: every link of the matching type
  double from = 0.0;
  double to = 0.5;
  double step = 0.025;
  std::uint64_t sim_blocks = 0;  // 0 leaves the simulation columns empty
  std::uint64_t seed = 0;
  unsigned workers = 1;
  RviOptions rvi;
};

/// Default grids: p_out 0..0.5 step 0.025; capacity 24..72 Mb/s step 2.4 Mb/s.
SweepSpec default_sweep(SweepParameter parameter);

/// Throws ContractError for a malformed grid or link selection.
void check_sweep(const SweepSpec& spec, const SystemConfig& config);

/// Ascending grid values from, from+step, ..., <= to (rounded to 12 digits).
std::vector<double> sweep_grid(const SweepSpec& spec);

SystemConfig apply_sweep_point(const SystemConfig& config, const SweepSpec& spec, double value);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  double gain = 0.0;
  bool simulated = false;
  double sim_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string error;
};

/// Solves every grid point independently (up to spec.workers at a time);
/// rows come back in grid order.
std::vector<SweepRow> run_sweep(const SystemConfig& config, const SweepSpec& spec);

/// Header "parameter,gain,sim_estimate,ci_low,ci_high"; failed points carry
/// "error" in the gain column.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace mpsched
