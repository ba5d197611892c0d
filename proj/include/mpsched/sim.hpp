#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mpsched/model.hpp"
#include "mpsched/solver.hpp"

namespace mpsched {

enum class DrawKind : std::uint32_t { DeadlineService = 0, SlotService = 1, Channel = 2 };

/// Stateless generator: every uniform is a hash of (seed, block, link, kind,
/// draw), so any block can be replayed independently of the others.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed);

  /// Uniform in [0, 1).
  double uniform(std::uint64_t block, std::uint32_t link, DrawKind kind, std::uint32_t draw = 0) const;

  /// Poisson(mean) from the uniforms of (block, link, kind).
  std::uint64_t poisson(double mean, std::uint64_t block, std::uint32_t link, DrawKind kind) const;

 private:
  std::uint64_t key_;
};

/// Smallest k with F(k) > u for Poisson(mean); mean should stay below a few hundred.
std::uint64_t poisson_by_inversion(double mean, double u);

/// Wilson score interval. Throws ContractError when trials == 0 or successes > trials.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                          double confidence = 0.99);

struct ReliabilityReport {
  std::uint64_t blocks_total = 0;
  std::uint64_t blocks_on_time = 0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  // Batch-means interval over `batches` consecutive runs of blocks; accounts
  // for correlation between successive blocks.
  std::uint64_t batches = 0;
  double batch_ci_low = 0.0;
  double batch_ci_high = 1.0;
  std::vector<std::uint64_t> state_visits;  // by state index
};

struct SimulationOptions {
  double confidence = 0.99;
  std::size_t initial_state = 0;
};

/// Runs n_blocks decision epochs of `policy` with the same slot-level
/// delivery rule the MDP uses. Bit-identical for identical inputs.
ReliabilityReport simulate(const SystemConfig& config, const Policy& policy, std::uint64_t n_blocks,
                           std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace mpsched
