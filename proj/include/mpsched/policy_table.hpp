#pragma once

#include <string>

#include "mpsched/errors.hpp"
#include "mpsched/model.hpp"
#include "mpsched/solver.hpp"

namespace mpsched {

class UnsupportedRenderingError : public ContractError {
 public:
  using ContractError::ContractError;
};

enum class TableFormat { Csv, Text, Json };

/// Per-link fractions n_i/K of every state, one (q_max+1) x (q_max+1) grid per
/// availability combination: columns follow link 1's queue, rows link 2's.
/// Throws UnsupportedRenderingError for more than two links. Json lists the
/// same cells as Csv. `max_queue` crops the grid to queues 0..max_queue; negative shows every queue level.
std::string render_policy_table(const SystemConfig& config, const Policy& policy, TableFormat format,
                                int max_queue = -1);

}  // namespace mpsched
