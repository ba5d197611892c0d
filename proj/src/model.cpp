#include "mpsched/model.hpp"

#include <cmath>
#include <string>

namespace mpsched {

std::vector<FieldIssue> validation_issues(const SystemConfig& config) {
  std::vector<FieldIssue> issues;
  auto add = [&](std::string field, std::string message) {
    issues.push_back({std::move(field), std::move(message)});
  };

  if (!(config.fps > 0.0) || !std::isfinite(config.fps)) add("fps", "must be a positive number");
  if (config.frame_bits <= 0) add("frame_bits", "must be positive");
  if (config.packet_bits <= 0) add("packet_bits", "must be positive");
  if (!(config.deadline_slots >= 1.0) || !std::isfinite(config.deadline_slots)) {
    add("deadline_slots", "must be >= 1");
  }
  if (config.q_max < 0) add("q_max", "must be >= 0");
  if (!(config.epsilon > 0.0 && config.epsilon < 1e-3)) add("epsilon", "must lie in (0, 1e-3)");
  if (config.state_limit == 0) add("state_limit", "must be positive");
  if (config.links.empty()) add("links", "must contain at least one link");

  for (std::size_t i = 0; i < config.links.size(); ++i) {
    const std::string prefix = "links[" + std::to_string(i) + "]";
    if (const auto* onoff = std::get_if<OnOffLink>(&config.links[i])) {
      if (!(onoff->p_out >= 0.0 && onoff->p_out < 1.0)) {
        add(prefix + ".p_out", "must lie in [0, 1)");
      }
      if (!(onoff->mean_outage_slots >= 1.0) || !std::isfinite(onoff->mean_outage_slots)) {
        add(prefix + ".mean_outage_slots", "must be >= 1");
      } else if (onoff->p_out >= 0.0 && onoff->p_out < 1.0 &&
                 onoff->p_out / (1.0 - onoff->p_out) / onoff->mean_outage_slots > 1.0) {
        add(prefix + ".p_out",
            "infeasible with mean_outage_slots: P(Available->Outage) would exceed 1");
      }
    } else {
      const auto& exp = std::get<ExponentialLink>(config.links[i]);
      if (!(exp.capacity_bps > 0.0) || !std::isfinite(exp.capacity_bps)) {
        add(prefix + ".capacity", "must be a positive rate");
      }
    }
  }

  if (config.frame_bits > 0 && config.packet_bits > 0 && !config.links.empty() &&
      config.n_cap != 0) {
    const int k = block_packet_count(config);
    const long upper = 2L * k * static_cast<long>(config.links.size());
    if (config.n_cap < k || config.n_cap > upper) {
      add("n_cap", "must lie in [K, 2K*links] = [" + std::to_string(k) + ", " +
                       std::to_string(upper) + "]");
    }
  }
  return issues;
}

void validate(const SystemConfig& config) {
  auto issues = validation_issues(config);
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

int block_packet_count(const SystemConfig& config) {
  return static_cast<int>((config.frame_bits + config.packet_bits - 1) / config.packet_bits);
}

int total_packet_cap(const SystemConfig& config) {
  return config.n_cap == 0 ? 2 * block_packet_count(config) : config.n_cap;
}

int per_link_packet_cap(const SystemConfig& config) { return 2 * block_packet_count(config); }

std::size_t onoff_link_count(const SystemConfig& config) {
  std::size_t n = 0;
  for (const auto& link : config.links) n += is_onoff(link) ? 1 : 0;
  return n;
}

double service_rate(const ExponentialLink& link, const SystemConfig& config) {
  return link.capacity_bps / static_cast<double>(config.packet_bits);
}

double ServicePmf::mean() const {
  double m = 0.0;
  for (Eigen::Index k = 0; k < probabilities.size(); ++k) m += static_cast<double>(k) * probabilities(k);
  return m;
}

Eigen::VectorXd ServicePmf::folded() const {
  Eigen::VectorXd out = probabilities;
  out(out.size() - 1) += truncation_mass;
  return out;
}

ServicePmf poisson_pmf(double mean, double epsilon) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw InfeasibleParameterError("Poisson mean must be finite and non-negative");
  }
  ServicePmf pmf;
  if (mean == 0.0) {
    pmf.probabilities = Eigen::VectorXd::Ones(1);
    return pmf;
  }
  const double log_mean = std::log(mean);
  const auto hard_limit = static_cast<std::size_t>(mean + 60.0 * std::sqrt(mean) + 200.0);
  std::vector<double> probs;
  double sum = 0.0;
  for (std::size_t k = 0; k <= hard_limit; ++k) {
    const double kd = static_cast<double>(k);
    const double p = std::exp(kd * log_mean - mean - std::lgamma(kd + 1.0));
    probs.push_back(p);
    sum += p;
    if (kd >= mean && 1.0 - sum < epsilon) break;
  }
  pmf.probabilities = Eigen::Map<Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
  pmf.truncation_mass = std::max(0.0, 1.0 - sum);
  return pmf;
}

ServicePmf service_pmf(const LinkModel& link, double duration_slots, const SystemConfig& config,
                       double epsilon) {
  const auto* exp = std::get_if<ExponentialLink>(&link);
  if (exp == nullptr) {
    throw ModelMismatchError("service_pmf: on/off links have no finite-rate service distribution");
  }
  if (!(duration_slots >= 0.0)) throw ContractError("service_pmf: duration must be >= 0");
  const double mean = std::max(0.0, service_rate(*exp, config)) * duration_slots * config.slot_seconds();
  return poisson_pmf(mean, epsilon);
}

}  // namespace mpsched
