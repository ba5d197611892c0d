#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mpsched/errors.hpp"

namespace mpsched {

enum class Availability : std::uint8_t { Available = 0, Outage = 1 };

/// Two-state (Gilbert-Elliott) link: delivers everything while Available,
/// nothing while in Outage.
struct OnOffLink {
  double p_out = 0.0;              // stationary outage probability
  double mean_outage_slots = 5.0;  // mean sojourn in Outage, in slots
};

/// Backlogged FIFO link with i.i.d. exponential per-packet service times.
struct ExponentialLink {
  double capacity_bps = 0.0;
};

using LinkModel = std::variant<OnOffLink, ExponentialLink>;

inline bool is_onoff(const LinkModel& link) { return std::holds_alternative<OnOffLink>(link); }

struct SystemConfig {
  double fps = 120.0;
  std::int64_t frame_bits = 400'000;
  std::int64_t packet_bits = 40'000;
  double deadline_slots = 1.5;
  std::vector<LinkModel> links;
  int q_max = 4;
  int n_cap = 0;  // 0 selects the default of 2K
  bool allow_drop = true;
  double epsilon = 1e-12;
  std::size_t state_limit = 10'000'000;

  double slot_seconds() const { return 1.0 / fps; }
};

/// Field-level problems with `config`; empty when valid.
std::vector<FieldIssue> validation_issues(const SystemConfig& config);

/// Throws ConfigError listing every issue.
void validate(const SystemConfig& config);

/// Source packets per block: ceil(frame_bits / packet_bits).
int block_packet_count(const SystemConfig& config);

/// Upper bound on the total coded packets of one block (n_cap, resolved).
int total_packet_cap(const SystemConfig& config);

/// Upper bound on coded packets one link may carry for one block (2K).
int per_link_packet_cap(const SystemConfig& config);

std::size_t onoff_link_count(const SystemConfig& config);

/// Packet completions per second of a backlogged exponential link.
double service_rate(const ExponentialLink& link, const SystemConfig& config);

/// Availability chain of an on/off link, ordered {Available, Outage}.
/// Leaving Outage has probability 1/mean_outage_slots; entering it is chosen so
/// the stationary outage mass equals p_out.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 2, 2> onoff_transition_matrix(Scalar p_out, Scalar mean_outage_slots) {
  if (!(p_out >= Scalar(0)) || !(p_out < Scalar(1))) {
    throw InfeasibleParameterError("p_out must lie in [0, 1)");
  }
  if (!(mean_outage_slots >= Scalar(1))) {
    throw InfeasibleParameterError("mean_outage_slots must be >= 1");
  }
  const Scalar recover = Scalar(1) / mean_outage_slots;
  const Scalar fail = p_out / (Scalar(1) - p_out) * recover;
  if (fail > Scalar(1)) {
    throw InfeasibleParameterError(
        "p_out too large for the requested outage sojourn: P(Available->Outage) > 1");
  }
  Eigen::Matrix<Scalar, 2, 2> m;
  m << Scalar(1) - fail, fail, recover, Scalar(1) - recover;
  return m;
}

inline Eigen::Matrix2d onoff_transition_matrix(const OnOffLink& link) {
  return onoff_transition_matrix<double>(link.p_out, link.mean_outage_slots);
}

/// Stationary row vector of a small dense irreducible stochastic matrix,
/// via a direct solve with one balance equation replaced by normalization.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> stationary_distribution(
    const Eigen::MatrixBase<Derived>& transition) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = transition.rows();
  Mat system = transition.transpose();
  system.diagonal().array() -= Scalar(1);
  system.row(0).setOnes();
  Vec rhs = Vec::Zero(n);
  rhs(0) = Scalar(1);
  return system.fullPivLu().solve(rhs);
}

/// Distribution of delivered-packet counts {0, ..., m}; mass beyond m is kept
/// separately in truncation_mass.
struct ServicePmf {
  Eigen::VectorXd probabilities;
  double truncation_mass = 0.0;

  Eigen::Index support_size() const { return probabilities.size(); }
  double mean() const;

  /// Probabilities with the truncated tail folded into the last bin.
  Eigen::VectorXd folded() const;
};

/// Poisson(mean) truncated at the smallest support whose tail is below epsilon.
ServicePmf poisson_pmf(double mean, double epsilon = 1e-12);

/// Completions in a window of duration_slots on an exponential link.
/// Throws ModelMismatchError for on/off links.
ServicePmf service_pmf(const LinkModel& link, double duration_slots, const SystemConfig& config,
                       double epsilon = 1e-12);

}  // namespace mpsched
