#include "mpsched/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mpsched/parallel.hpp"

namespace mpsched {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// tail[x] = sum_{k >= x} pmf[k], with tail[pmf.size()] = 0.
std::vector<double> suffix_sums(const std::vector<double>& pmf) {
  std::vector<double> tail(pmf.size() + 1, 0.0);
  for (std::size_t k = pmf.size(); k-- > 0;) tail[k] = tail[k + 1] + pmf[k];
  return tail;
}

double at(const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; }

void enumerate_counts(std::size_t link, std::vector<int>& counts, int partial, int lo, int hi,
                      int per_link, std::vector<ActionVector>& out) {
  if (link == counts.size()) {
    if (partial >= lo) out.push_back(ActionVector{counts, false});
    return;
  }
  for (int n = 0; n <= per_link && partial + n <= hi; ++n) {
    counts[link] = n;
    enumerate_counts(link + 1, counts, partial + n, lo, hi, per_link, out);
  }
  counts[link] = 0;
}

}  // namespace

std::string to_string(const MdpState& state) {
  std::string out = "(";
  for (std::size_t i = 0; i < state.queues.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(state.queues[i]);
  }
  if (!state.availability.empty()) {
    out += '|';
    for (std::size_t i = 0; i < state.availability.size(); ++i) {
      if (i) out += ',';
      out += state.availability[i] == Availability::Available ? 'A' : 'O';
    }
  }
  out += ')';
  return out;
}

int ActionVector::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

ActionVector ActionVector::make_drop(std::size_t links) {
  return ActionVector{std::vector<int>(links, 0), true};
}

std::string to_string(const ActionVector& action) {
  if (action.drop) return "drop";
  std::string out = "[";
  for (std::size_t i = 0; i < action.counts.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(action.counts[i]);
  }
  return out + "]";
}

bool tie_break_less(const ActionVector& a, const ActionVector& b) {
  if (a.drop != b.drop) return !a.drop;
  if (a.drop) return false;
  const int ta = a.total();
  const int tb = b.total();
  if (ta != tb) return ta < tb;
  return a.counts < b.counts;
}

StateSpace::StateSpace(const SystemConfig& config) : links_(config.links.size()), onoff_(onoff_link_count(config)) {
  radices_.assign(links_, static_cast<std::size_t>(config.q_max) + 1);
  radices_.insert(radices_.end(), onoff_, 2);
  double approx = 1.0;
  for (auto r : radices_) approx *= static_cast<double>(r);
  if (approx > static_cast<double>(config.state_limit)) {
    throw CapacityError("state space of " + std::to_string(approx) + " states exceeds the limit of " +
                        std::to_string(config.state_limit));
  }
  strides_.assign(radices_.size(), 1);
  for (std::size_t d = radices_.size(); d-- > 1;) strides_[d - 1] = strides_[d] * radices_[d];
  size_ = radices_.empty() ? 1 : strides_[0] * radices_[0];
}

std::size_t StateSpace::index(const MdpState& state) const {
  if (state.queues.size() != links_ || state.availability.size() != onoff_) {
    throw ContractError("state " + to_string(state) + " does not match the state space shape");
  }
  std::size_t idx = 0;
  for (std::size_t i = 0; i < links_; ++i) {
    const auto q = static_cast<std::size_t>(state.queues[i]);
    if (state.queues[i] < 0 || q >= radices_[i]) {
      throw ContractError("queue length out of range in state " + to_string(state));
    }
    idx += q * strides_[i];
  }
  for (std::size_t j = 0; j < onoff_; ++j) {
    idx += static_cast<std::size_t>(state.availability[j]) * strides_[links_ + j];
  }
  return idx;
}

MdpState StateSpace::state(std::size_t index) const {
  if (index >= size_) throw ContractError("state index out of range");
  MdpState s;
  s.queues.resize(links_);
  s.availability.resize(onoff_);
  for (std::size_t i = 0; i < links_; ++i) {
    s.queues[i] = static_cast<int>((index / strides_[i]) % radices_[i]);
  }
  for (std::size_t j = 0; j < onoff_; ++j) {
    s.availability[j] = static_cast<Availability>((index / strides_[links_ + j]) % 2);
  }
  return s;
}

std::vector<MdpState> enumerate_states(const SystemConfig& config) {
  const StateSpace space(config);
  std::vector<MdpState> states;
  states.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) states.push_back(space.state(i));
  return states;
}

std::vector<ActionVector> enumerate_actions(const SystemConfig& config) {
  const int k = block_packet_count(config);
  std::vector<ActionVector> out;
  std::vector<int> counts(config.links.size(), 0);
  enumerate_counts(0, counts, 0, k, total_packet_cap(config), per_link_packet_cap(config), out);
  std::stable_sort(out.begin(), out.end(), tie_break_less);
  if (config.allow_drop) out.push_back(ActionVector::make_drop(config.links.size()));
  return out;
}

DeliveryModel::DeliveryModel(const SystemConfig& config)
    : config_(config), space_(config), k_(block_packet_count(config)) {
  std::size_t slot = 0;
  for (const auto& link : config.links) {
    LinkTables t;
    if (const auto* onoff = std::get_if<OnOffLink>(&link)) {
      t.onoff = true;
      t.onoff_slot = slot++;
      t.channel = onoff_transition_matrix(*onoff);
    } else {
      t.deadline_pmf = to_std(service_pmf(link, config.deadline_slots, config, config.epsilon).folded());
      t.slot_pmf = to_std(service_pmf(link, 1.0, config, config.epsilon).folded());
      t.deadline_tail = suffix_sums(t.deadline_pmf);
      t.slot_tail = suffix_sums(t.slot_pmf);
    }
    tables_.push_back(std::move(t));
  }
}

// New packets are always admitted; the buffer bound applies to the backlog
// carried into the next slot.
int DeliveryModel::admitted(const ActionVector& action, std::size_t link) const {
  return action.drop ? 0 : action.counts[link];
}

double DeliveryModel::success_probability(const MdpState& state, const ActionVector& action) const {
  if (action.drop) return 0.0;
  const auto k = static_cast<std::size_t>(k_);
  std::vector<std::vector<double>> link_pmfs(tables_.size());
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    const auto& t = tables_[i];
    const auto n = static_cast<std::size_t>(admitted(action, i));
    auto& link_pmf = link_pmfs[i];
    link_pmf.assign(n + 1, 0.0);
    if (t.onoff) {
      const bool up = state.availability[t.onoff_slot] == Availability::Available;
      link_pmf[up ? n : 0] = 1.0;
    } else {
      const auto q = static_cast<std::size_t>(state.queues[i]);
      if (n == 0) {
        link_pmf[0] = 1.0;
      } else {
        // c = min(n, max(0, N - q))
        link_pmf[0] = 1.0 - at(t.deadline_tail, q + 1);
        for (std::size_t c = 1; c < n; ++c) link_pmf[c] = at(t.deadline_pmf, q + c);
        link_pmf[n] = at(t.deadline_tail, q + n);
      }
    }
  }
  // Canonical convolution order: permuting exchangeable links must not change
  // a single bit of the result.
  std::sort(link_pmfs.begin(), link_pmfs.end());

  // dist[j] = P(j packets delivered so far), j == k absorbs ">= K".
  std::vector<double> dist(k + 1, 0.0), next(k + 1);
  dist[0] = 1.0;
  for (const auto& link_pmf : link_pmfs) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = 0; a <= k; ++a) {
      if (dist[a] == 0.0) continue;
      for (std::size_t c = 0; c < link_pmf.size(); ++c) {
        next[std::min(k, a + c)] += dist[a] * link_pmf[c];
      }
    }
    dist.swap(next);
  }
  return std::clamp(dist[k], 0.0, 1.0);
}

SparseDistribution DeliveryModel::next_state_distribution(const MdpState& state,
                                                          const ActionVector& action,
                                                          double* deficit) const {
  const auto q_max = static_cast<std::size_t>(config_.q_max);
  // Offsets of next-state index contributions, combined link by link.
  SparseDistribution combined{{0, 1.0}};
  SparseDistribution factor, merged;
  double mass = 1.0;
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    const auto& t = tables_[i];
    const auto q = static_cast<std::size_t>(state.queues[i]);
    const auto n = static_cast<std::size_t>(admitted(action, i));
    const std::size_t qs = space_.queue_stride(i);
    factor.clear();
    if (t.onoff) {
      const auto s = static_cast<Eigen::Index>(state.availability[t.onoff_slot]);
      const std::size_t next_q = s == 0 ? 0 : std::min(q + n, q_max);
      const std::size_t as = space_.availability_stride(t.onoff_slot);
      for (Eigen::Index s2 = 0; s2 < 2; ++s2) {
        const double p = t.channel(s, s2);
        if (p > 0.0) factor.emplace_back(next_q * qs + static_cast<std::size_t>(s2) * as, p);
      }
    } else {
      const std::size_t backlog = q + n;
      std::vector<double> by_queue(std::min(backlog, q_max) + 1, 0.0);
      // q' = min(max(0, backlog - A), q_max), A ~ slot completions.
      by_queue[0] = at(t.slot_tail, backlog);
      for (std::size_t j = 1; j <= backlog; ++j) {
        by_queue[std::min(j, q_max)] += at(t.slot_pmf, backlog - j);
      }
      for (std::size_t j = 0; j < by_queue.size(); ++j) {
        if (by_queue[j] > 0.0) factor.emplace_back(j * qs, by_queue[j]);
      }
    }
    // Normalizing per link keeps the joint row an exact product, so rows of
    // exchangeable links stay bit-identical under permutation.
    double link_mass = 0.0;
    for (const auto& entry : factor) link_mass += entry.second;
    mass *= link_mass;
    for (auto& entry : factor) entry.second /= link_mass;
    merged.clear();
    for (const auto& [off_a, p_a] : combined) {
      for (const auto& [off_b, p_b] : factor) merged.emplace_back(off_a + off_b, p_a * p_b);
    }
    combined.swap(merged);
  }
  std::sort(combined.begin(), combined.end());
  if (deficit != nullptr) *deficit = 1.0 - mass;
  return combined;
}

double block_success_probability(const MdpState& state, const ActionVector& action,
                                 const SystemConfig& config) {
  return DeliveryModel(config).success_probability(state, action);
}

std::vector<std::pair<MdpState, double>> transition_distribution(const MdpState& state,
                                                                 const ActionVector& action,
                                                                 const SystemConfig& config) {
  const DeliveryModel model(config);
  std::vector<std::pair<MdpState, double>> out;
  for (const auto& [idx, p] : model.next_state_distribution(state, action)) {
    out.emplace_back(model.space().state(idx), p);
  }
  return out;
}

TabularMdp build_mdp(const SystemConfig& config, const BuildOptions& options) {
  validate(config);
  const DeliveryModel model(config);
  TabularMdp mdp;
  mdp.config = config;
  mdp.states = enumerate_states(config);
  mdp.actions = enumerate_actions(config);

  const auto n_states = static_cast<Eigen::Index>(mdp.states.size());
  const auto n_actions = static_cast<Eigen::Index>(mdp.actions.size());
  mdp.reward.resize(n_states, n_actions);

  std::vector<std::vector<Eigen::Triplet<double>>> rows(mdp.states.size());
  parallel_for(mdp.states.size(), options.workers, [&](std::size_t s) {
    const auto& state = mdp.states[s];
    auto& triplets = rows[s];
    for (Eigen::Index a = 0; a < n_actions; ++a) {
      const auto& action = mdp.actions[static_cast<std::size_t>(a)];
      const auto si = static_cast<Eigen::Index>(s);
      mdp.reward(si, a) = model.success_probability(state, action);
      for (const auto& [next, p] : model.next_state_distribution(state, action)) {
        triplets.emplace_back(mdp.row(si, a), static_cast<Eigen::Index>(next), p);
      }
    }
  });

  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  std::vector<Eigen::Triplet<double>> all;
  all.reserve(nnz);
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  mdp.kernel.resize(n_states * n_actions, n_states);
  mdp.kernel.setFromTriplets(all.begin(), all.end());
  mdp.kernel.makeCompressed();
  return mdp;
}

}  // namespace mpsched
