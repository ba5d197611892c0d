#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mpsched/model.hpp"

namespace mpsched {

/// Per-link backlog plus the availability flag of every on/off link (in link order).
struct MdpState {
  std::vector<int> queues;
  std::vector<Availability> availability;

  bool operator==(const MdpState&) const = default;
};

/// Renders "(q1,q2|A,O)"; the availability part is omitted without on/off links.
std::string to_string(const MdpState& state);

/// Coded packets of the new block per link, or DROP.
struct ActionVector {
  std::vector<int> counts;
  bool drop = false;

  int total() const;
  static ActionVector make_drop(std::size_t links);

  bool operator==(const ActionVector&) const = default;
};

std::string to_string(const ActionVector& action);

/// Tie-break order: smaller total first, then lexicographically smaller
/// counts, DROP last.
bool tie_break_less(const ActionVector& a, const ActionVector& b);

/// Mixed-radix indexing over (q_1..q_L, s_1..s_M); the last digit varies fastest,
/// so index 0 is the all-empty, all-Available state.
class StateSpace {
 public:
  explicit StateSpace(const SystemConfig& config);

  std::size_t size() const { return size_; }
  std::size_t link_count() const { return links_; }
  std::size_t onoff_count() const { return onoff_; }

  std::size_t index(const MdpState& state) const;
  MdpState state(std::size_t index) const;

  std::size_t queue_stride(std::size_t link) const { return strides_[link]; }
  std::size_t availability_stride(std::size_t onoff_slot) const { return strides_[links_ + onoff_slot]; }

 private:
  std::size_t links_ = 0;
  std::size_t onoff_ = 0;
  std::vector<std::size_t> radices_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

std::vector<MdpState> enumerate_states(const SystemConfig& config);

/// Every count vector with K <= sum <= n_cap and 0 <= n_i <= 2K, ordered by
/// tie_break_less, then DROP when allowed.
std::vector<ActionVector> enumerate_actions(const SystemConfig& config);

using SparseDistribution = std::vector<std::pair<std::size_t, double>>;

/// Slot-level delivery and queue dynamics of a configuration, with all
/// per-link service tables precomputed.
class DeliveryModel {
 public:
  explicit DeliveryModel(const SystemConfig& config);

  const SystemConfig& config() const { return config_; }
  const StateSpace& space() const { return space_; }
  int block_packets() const { return k_; }

  /// P(at least K of the block's coded packets arrive by the deadline).
  double success_probability(const MdpState& state, const ActionVector& action) const;

  /// Next-state distribution sorted by state index; `deficit`, when given,
  /// receives 1 minus the mass before renormalization.
  SparseDistribution next_state_distribution(const MdpState& state, const ActionVector& action,
                                             double* deficit = nullptr) const;

 private:
  struct LinkTables {
    bool onoff = false;
    std::size_t onoff_slot = 0;
    Eigen::Matrix2d channel;
    std::vector<double> deadline_pmf;   // completions within the deadline
    std::vector<double> deadline_tail;  // tail[x] = P(N >= x)
    std::vector<double> slot_pmf;       // completions within one slot
    std::vector<double> slot_tail;
  };

  int admitted(const ActionVector& action, std::size_t link) const;

  SystemConfig config_;
  StateSpace space_;
  int k_ = 0;
  std::vector<LinkTables> tables_;
};

double block_success_probability(const MdpState& state, const ActionVector& action,
                                 const SystemConfig& config);

std::vector<std::pair<MdpState, double>> transition_distribution(const MdpState& state,
                                                                 const ActionVector& action,
                                                                 const SystemConfig& config);

/// Tabular MDP. Every state offers the same action list; kernel row
/// `s * num_actions() + a` holds P(. | s, a).
template <typename Scalar>
struct BasicTabularMdp {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Kernel = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  SystemConfig config;
  std::vector<MdpState> states;
  std::vector<ActionVector> actions;
  Matrix reward;  // states x actions
  Kernel kernel;  // (states * actions) x states

  Eigen::Index num_states() const { return reward.rows(); }
  Eigen::Index num_actions() const { return reward.cols(); }
  Eigen::Index row(Eigen::Index s, Eigen::Index a) const { return s * num_actions() + a; }

  const std::vector<ActionVector>& actions_of(Eigen::Index /*state*/) const { return actions; }

  template <typename Other>
  BasicTabularMdp<Other> cast() const {
    BasicTabularMdp<Other> out;
    out.config = config;
    out.states = states;
    out.actions = actions;
    out.reward = reward.template cast<Other>();
    out.kernel = kernel.template cast<Other>();
    return out;
  }
};

using TabularMdp = BasicTabularMdp<double>;

struct BuildOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
};

TabularMdp build_mdp(const SystemConfig& config, const BuildOptions& options = {});

}  // namespace mpsched
