#include "mpsched/solver.hpp"

#include <numeric>

namespace mpsched {

namespace {

// Largest-remainder apportionment of `total` packets by `weights`.
std::vector<int> apportion(int total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = total * weights[i] / sum;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++counts[remainders[r].second];
  return counts;
}

}  // namespace

Policy heuristic_policy(const TabularMdp& mdp, Heuristic kind, std::size_t link) {
  const auto& config = mdp.config;
  const std::size_t links = config.links.size();
  if (kind == Heuristic::SingleLink && link >= links) throw ContractError("heuristic link index out of range");
  const int k = block_packet_count(config);
  const int cap = total_packet_cap(config);

  Policy policy;
  for (const auto& state : mdp.states) {
    ActionVector action{std::vector<int>(links, 0), false};
    switch (kind) {
      case Heuristic::FullReplication: {
        int budget = cap;
        for (auto& n : action.counts) {
          n = std::min(k, budget);
          budget -= n;
        }
        break;
      }
      case Heuristic::SingleLink:
        action.counts[link] = k;
        break;
      case Heuristic::ProportionalSplit: {
        std::vector<double> weights(links, 0.0);
        std::size_t slot = 0;
        for (std::size_t i = 0; i < links; ++i) {
          if (is_onoff(config.links[i])) {
            weights[i] = state.availability[slot++] == Availability::Available ? k : 0.0;
          } else {
            weights[i] = service_rate(std::get<ExponentialLink>(config.links[i]), config) * config.slot_seconds();
          }
        }
        if (std::accumulate(weights.begin(), weights.end(), 0.0) > 0.0) {
          action.counts = apportion(k, weights);
        } else if (config.allow_drop) {
          action = ActionVector::make_drop(links);
        } else {
          action.counts[0] = k;
        }
        break;
      }
    }
    if (detail::find_action(mdp.actions, action) == mdp.actions.size()) {
      throw ContractError("heuristic action " + to_string(action) + " is not feasible for this configuration");
    }
    policy.actions.push_back(std::move(action));
  }
  return policy;
}

}  // namespace mpsched
