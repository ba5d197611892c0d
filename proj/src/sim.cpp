#include "mpsched/sim.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mpsched/mdp.hpp"

namespace mpsched {

namespace {

constexpr std::uint64_t kBatches = 50;

constexpr double kInversionMeanLimit = 100.0;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct LinkDynamics {
  bool onoff = false;
  std::size_t onoff_slot = 0;
  double fail = 0.0;     // P(Available -> Outage)
  double recover = 0.0;  // P(Outage -> Available)
  double deadline_mean = 0.0;
  double slot_mean = 0.0;
};

}  // namespace

CounterRng::CounterRng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

double CounterRng::uniform(std::uint64_t block, std::uint32_t link, DrawKind kind, std::uint32_t draw) const {
  std::uint64_t x = mix64(key_ ^ mix64(block));
  x = mix64(x ^ ((static_cast<std::uint64_t>(link) << 40) | (static_cast<std::uint64_t>(kind) << 32) | draw));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::poisson(double mean, std::uint64_t block, std::uint32_t link, DrawKind kind) const {
  // Large means are split into independent pieces the inversion handles well.
  const auto pieces = static_cast<std::uint32_t>(std::max(1.0, std::ceil(mean / kInversionMeanLimit)));
  std::uint64_t total = 0;
  for (std::uint32_t j = 0; j < pieces; ++j) {
    total += poisson_by_inversion(mean / pieces, uniform(block, link, kind, j));
  }
  return total;
}

std::uint64_t poisson_by_inversion(double mean, double u) {
  if (mean <= 0.0) return 0;
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  const auto limit = static_cast<std::uint64_t>(mean + 40.0 * std::sqrt(mean) + 100.0);
  while (u >= cdf && k < limit) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) throw ContractError("wilson_interval: trials must be positive");
  if (successes > trials) throw ContractError("wilson_interval: successes exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ContractError("wilson_interval: confidence must lie in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + confidence / 2.0);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  double low = successes == 0 ? 0.0 : std::clamp(centre - half, 0.0, p);
  double high = successes == trials ? 1.0 : std::clamp(centre + half, p, 1.0);
  return {low, high};
}

ReliabilityReport simulate(const SystemConfig& config, const Policy& policy, std::uint64_t n_blocks,
                           std::uint64_t seed, const SimulationOptions& options) {
  validate(config);
  if (n_blocks == 0) throw ContractError("simulate: n_blocks must be positive");
  const StateSpace space(config);
  if (policy.size() != space.size()) {
    throw ContractError("simulate: policy covers " + std::to_string(policy.size()) +
                        " states but the configuration has " + std::to_string(space.size()));
  }
  const std::size_t links = config.links.size();
  const int k_packets = block_packet_count(config);
  const int per_link_cap = per_link_packet_cap(config);
  const int total_cap = total_packet_cap(config);
  for (const auto& action : policy.actions) {
    if (action.counts.size() != links) throw ContractError("simulate: policy action has the wrong link count");
    if (action.drop && !config.allow_drop) throw ContractError("simulate: policy drops but DROP is disabled");
    if (action.drop) continue;
    for (const int n : action.counts) {
      if (n < 0 || n > per_link_cap) throw ContractError("simulate: policy action " + to_string(action) +
                                                         " exceeds the per-link packet cap");
    }
    if (action.total() < k_packets || action.total() > total_cap) {
      throw ContractError("simulate: policy action " + to_string(action) + " is outside [K, n_cap]");
    }
  }

  std::vector<LinkDynamics> dyn(links);
  std::size_t slot = 0;
  for (std::size_t i = 0; i < links; ++i) {
    if (const auto* onoff = std::get_if<OnOffLink>(&config.links[i])) {
      const Eigen::Matrix2d m = onoff_transition_matrix(*onoff);
      dyn[i].onoff = true;
      dyn[i].onoff_slot = slot++;
      dyn[i].fail = m(0, 1);
      dyn[i].recover = m(1, 0);
    } else {
      const double rate = service_rate(std::get<ExponentialLink>(config.links[i]), config);
      dyn[i].slot_mean = rate * config.slot_seconds();
      dyn[i].deadline_mean = dyn[i].slot_mean * config.deadline_slots;
    }
  }

  const CounterRng rng(seed);
  const auto k = static_cast<std::uint64_t>(block_packet_count(config));
  const auto q_max = static_cast<std::int64_t>(config.q_max);
  MdpState state = space.state(options.initial_state);

  ReliabilityReport report;
  report.seed = seed;
  report.confidence = options.confidence;
  report.blocks_total = n_blocks;
  report.state_visits.assign(space.size(), 0);

  const std::uint64_t batches = std::min<std::uint64_t>(kBatches, n_blocks);
  std::vector<std::uint64_t> batch_hits(batches, 0);
  std::uint64_t batch = 0;
  std::uint64_t batch_end = n_blocks / batches;

  for (std::uint64_t block = 0; block < n_blocks; ++block) {
    if (block == batch_end) batch_end = n_blocks * (++batch + 1) / batches;
    const std::size_t idx = space.index(state);
    ++report.state_visits[idx];
    const ActionVector& action = policy[idx];
    std::uint64_t delivered = 0;
    for (std::size_t i = 0; i < links; ++i) {
      const auto link = static_cast<std::uint32_t>(i);
      const std::int64_t n = action.drop ? 0 : action.counts[i];
      const std::int64_t q = state.queues[i];
      const auto& d = dyn[i];
      if (d.onoff) {
        auto& flag = state.availability[d.onoff_slot];
        const bool up = flag == Availability::Available;
        delivered += up ? static_cast<std::uint64_t>(n) : 0;
        state.queues[i] = static_cast<int>(up ? 0 : std::min(q + n, q_max));
        const double u = rng.uniform(block, link, DrawKind::Channel);
        if (up) {
          flag = u < d.fail ? Availability::Outage : Availability::Available;
        } else {
          flag = u < d.recover ? Availability::Available : Availability::Outage;
        }
      } else {
        const auto by_deadline =
            static_cast<std::int64_t>(rng.poisson(d.deadline_mean, block, link, DrawKind::DeadlineService));
        delivered += static_cast<std::uint64_t>(std::min(n, std::max<std::int64_t>(0, by_deadline - q)));
        const auto in_slot =
            static_cast<std::int64_t>(rng.poisson(d.slot_mean, block, link, DrawKind::SlotService));
        state.queues[i] = static_cast<int>(std::min(std::max<std::int64_t>(0, q + n - in_slot), q_max));
      }
    }
    if (!action.drop && delivered >= k) {
      ++report.blocks_on_time;
      ++batch_hits[batch];
    }
  }

  report.estimate = static_cast<double>(report.blocks_on_time) / static_cast<double>(n_blocks);
  std::tie(report.ci_low, report.ci_high) =
      wilson_interval(report.blocks_on_time, report.blocks_total, options.confidence);

  // Batch means: consecutive blocks share queue and channel state, so the
  // i.i.d. Wilson width understates the spread of the estimate.
  report.batches = batches;
  report.batch_ci_low = 0.0;
  report.batch_ci_high = 1.0;
  if (batches >= 2) {
    std::vector<double> means(batches);
    double mean = 0.0;
    for (std::uint64_t b = 0; b < batches; ++b) {
      const std::uint64_t size = n_blocks * (b + 1) / batches - n_blocks * b / batches;
      means[b] = static_cast<double>(batch_hits[b]) / static_cast<double>(size);
      mean += means[b];
    }
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (const double m : means) var += (m - mean) * (m - mean);
    var /= static_cast<double>(batches - 1);
    const boost::math::students_t_distribution<double> t(static_cast<double>(batches - 1));
    const double half = boost::math::quantile(t, 0.5 + options.confidence / 2.0) *
                        std::sqrt(var / static_cast<double>(batches));
    report.batch_ci_low = std::max(0.0, report.estimate - half);
    report.batch_ci_high = std::min(1.0, report.estimate + half);
  }
  return report;
}

}  // namespace mpsched
