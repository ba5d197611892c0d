#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "mpsched/mdp.hpp"

namespace mpsched {

/// Deterministic stationary policy, indexed by state.
struct Policy {
  std::vector<ActionVector> actions;

  std::size_t size() const { return actions.size(); }
  const ActionVector& operator[](std::size_t s) const { return actions[s]; }
};

struct RviOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1'000'000;
  double tie_tolerance = 1e-9;
  Eigen::Index reference_state = 0;
  // Span stalls over this many iterations switch on the 0.5*I + 0.5*P transform.
  std::size_t stall_window = 200;
};

template <typename Scalar>
struct BasicSolveResult {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Policy policy;
  std::vector<Eigen::Index> action_index;
  Scalar gain = Scalar(0);
  Vector bias;
  std::size_t iterations = 0;
  Scalar span_residual = Scalar(0);
  Scalar error_bound = Scalar(0);  // span / 2
  bool damped = false;
};

using SolveResult = BasicSolveResult<double>;

template <typename Scalar>
struct BasicPolicyEvaluation {
  Scalar gain = Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> stationary;
  Scalar residual = Scalar(0);  // || pi P - pi ||_1
};

using PolicyEvaluation = BasicPolicyEvaluation<double>;

namespace detail {

/// Q(s, a) = r(s, a) + sum_s' P(s'|s,a) values(s'), optionally on the damped
/// kernel 0.5*I + 0.5*P.
template <typename Scalar>
typename BasicTabularMdp<Scalar>::Matrix action_values(
    const BasicTabularMdp<Scalar>& mdp, const typename BasicTabularMdp<Scalar>::Vector& values,
    bool damped = false) {
  using Matrix = typename BasicTabularMdp<Scalar>::Matrix;
  using Vector = typename BasicTabularMdp<Scalar>::Vector;
  const Vector expected = mdp.kernel * values;
  const Eigen::Map<const Matrix> expected_sa(expected.data(), mdp.num_states(), mdp.num_actions());
  if (!damped) return mdp.reward + expected_sa;
  Matrix q = mdp.reward + Scalar(0.5) * expected_sa;
  q.colwise() += Scalar(0.5) * values;
  return q;
}

inline std::size_t find_action(const std::vector<ActionVector>& actions, const ActionVector& a) {
  const auto it = std::find(actions.begin(), actions.end(), a);
  return static_cast<std::size_t>(it - actions.begin());
}

}  // namespace detail

/// Per state, the argmax of r + P*values; actions within `tie_tolerance` of
/// the maximum are resolved by tie_break_less.
template <typename Scalar>
std::vector<Eigen::Index> greedy_action_indices(const BasicTabularMdp<Scalar>& mdp,
                                                const typename BasicTabularMdp<Scalar>::Vector& values,
                                                Scalar tie_tolerance = Scalar(1e-9)) {
  if (values.size() != mdp.num_states()) throw ContractError("value vector size mismatch");
  const auto q = detail::action_values(mdp, values);
  std::vector<Eigen::Index> chosen(static_cast<std::size_t>(mdp.num_states()));
  for (Eigen::Index s = 0; s < mdp.num_states(); ++s) {
    const Scalar best = q.row(s).maxCoeff();
    Eigen::Index pick = -1;
    for (Eigen::Index a = 0; a < mdp.num_actions(); ++a) {
      if (q(s, a) < best - tie_tolerance) continue;
      if (pick < 0 || tie_break_less(mdp.actions[static_cast<std::size_t>(a)],
                                     mdp.actions[static_cast<std::size_t>(pick)])) {
        pick = a;
      }
    }
    chosen[static_cast<std::size_t>(s)] = pick;
  }
  return chosen;
}

template <typename Scalar>
Policy greedy_policy(const BasicTabularMdp<Scalar>& mdp,
                     const typename BasicTabularMdp<Scalar>::Vector& values,
                     Scalar tie_tolerance = Scalar(1e-9)) {
  Policy policy;
  for (const auto a : greedy_action_indices(mdp, values, tie_tolerance)) {
    policy.actions.push_back(mdp.actions[static_cast<std::size_t>(a)]);
  }
  return policy;
}

/// Action-list index of every state's action. Throws ContractError when the
/// policy does not fit the MDP.
template <typename Scalar>
std::vector<Eigen::Index> policy_action_indices(const BasicTabularMdp<Scalar>& mdp, const Policy& policy) {
  if (static_cast<Eigen::Index>(policy.size()) != mdp.num_states()) {
    throw ContractError("policy covers " + std::to_string(policy.size()) + " states, MDP has " +
                        std::to_string(mdp.num_states()));
  }
  std::vector<Eigen::Index> idx(policy.size());
  for (std::size_t s = 0; s < policy.size(); ++s) {
    const auto a = detail::find_action(mdp.actions, policy[s]);
    if (a == mdp.actions.size()) {
      throw ContractError("policy action " + to_string(policy[s]) + " at state " +
                          to_string(mdp.states[s]) + " is not in the action list");
    }
    idx[s] = static_cast<Eigen::Index>(a);
  }
  return idx;
}

/// Average-reward relative value iteration. The bias is pinned to zero at
/// options.reference_state; the gain is the midpoint of the last Bellman
/// increment. Throws NonConvergenceError after max_iter sweeps.
template <typename Scalar>
BasicSolveResult<Scalar> relative_value_iteration(const BasicTabularMdp<Scalar>& mdp,
                                                  const RviOptions& options = {}) {
  using Vector = typename BasicTabularMdp<Scalar>::Vector;
  const Eigen::Index n = mdp.num_states();
  const Eigen::Index ref = options.reference_state;
  if (n == 0 || mdp.num_actions() == 0) throw ContractError("empty MDP");
  if (ref < 0 || ref >= n) throw ContractError("reference state out of range");

  BasicSolveResult<Scalar> result;
  Vector h = Vector::Zero(n);
  std::vector<Scalar> spans;
  const auto tol = static_cast<Scalar>(options.tol);

  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    const Vector v = detail::action_values(mdp, h, result.damped).rowwise().maxCoeff();
    const Vector diff = v - h;
    const Scalar hi = diff.maxCoeff();
    const Scalar lo = diff.minCoeff();
    const Scalar span = hi - lo;
    h = v.array() - v(ref);

    result.iterations = it;
    result.span_residual = span;
    if (span < tol) {
      result.gain = std::clamp((hi + lo) / Scalar(2), Scalar(0), Scalar(1));
      result.error_bound = span / Scalar(2);
      // The damped operator's fixed point is twice the undamped bias.
      result.bias = result.damped ? Vector(h / Scalar(2)) : h;
      result.action_index =
          greedy_action_indices(mdp, result.bias, static_cast<Scalar>(options.tie_tolerance));
      for (const auto a : result.action_index) {
        result.policy.actions.push_back(mdp.actions[static_cast<std::size_t>(a)]);
      }
      return result;
    }

    spans.push_back(span);
    const std::size_t w = options.stall_window;
    if (!result.damped && w > 0 && spans.size() > 2 * w &&
        !(span < Scalar(0.999) * spans[spans.size() - 1 - w])) {
      result.damped = true;
      spans.clear();
    }
  }
  throw NonConvergenceError("relative value iteration did not converge: span " +
                                std::to_string(static_cast<double>(result.span_residual)),
                            static_cast<double>(result.span_residual), result.iterations);
}

template <typename Scalar>
BasicSolveResult<Scalar> relative_value_iteration(const BasicTabularMdp<Scalar>& mdp, double tol,
                                                  std::size_t max_iter) {
  RviOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return relative_value_iteration(mdp, options);
}

/// Stationary distribution and long-run reward of the chain a fixed policy
/// induces. Direct sparse solve first; damped power iteration as fallback.
template <typename Scalar>
BasicPolicyEvaluation<Scalar> policy_gain(const BasicTabularMdp<Scalar>& mdp, const Policy& policy,
                                          Scalar tol = Scalar(1e-12), std::size_t max_iter = 1'000'000) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
  const auto chosen = policy_action_indices(mdp, policy);
  const Eigen::Index n = mdp.num_states();

  Sparse chain(n, n);
  Vector reward(n);
  {
    std::vector<Eigen::Triplet<Scalar>> entries;
    for (Eigen::Index s = 0; s < n; ++s) {
      const Eigen::Index a = chosen[static_cast<std::size_t>(s)];
      reward(s) = mdp.reward(s, a);
      for (typename BasicTabularMdp<Scalar>::Kernel::InnerIterator it(mdp.kernel, mdp.row(s, a)); it; ++it) {
        entries.emplace_back(s, it.col(), it.value());
      }
    }
    chain.setFromTriplets(entries.begin(), entries.end());
  }
  const Sparse chain_t = chain.transpose();
  auto residual_of = [&](const Vector& pi) { return (chain_t * pi - pi).template lpNorm<1>(); };

  BasicPolicyEvaluation<Scalar> out;
  {
    // (P^T - I) pi = 0 with the first balance equation replaced by sum(pi) = 1.
    std::vector<Eigen::Triplet<Scalar>> entries;
    for (Eigen::Index col = 0; col < chain_t.outerSize(); ++col) {
      for (typename Sparse::InnerIterator it(chain_t, col); it; ++it) {
        if (it.row() != 0) entries.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Eigen::Index s = 1; s < n; ++s) entries.emplace_back(s, s, Scalar(-1));
    for (Eigen::Index s = 0; s < n; ++s) entries.emplace_back(0, s, Scalar(1));
    Sparse system(n, n);
    system.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Sparse> lu;
    lu.compute(system);
    if (lu.info() == Eigen::Success) {
      Vector rhs = Vector::Zero(n);
      rhs(0) = Scalar(1);
      Vector pi = lu.solve(rhs);
      if (lu.info() == Eigen::Success && pi.allFinite()) {
        pi = pi.cwiseMax(Scalar(0));
        pi /= pi.sum();
        out.residual = residual_of(pi);
        if (out.residual < tol) out.stationary = std::move(pi);
      }
    }
  }
  if (out.stationary.size() == 0) {
    Vector pi = Vector::Constant(n, Scalar(1) / Scalar(n));
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
      const Vector next = Scalar(0.5) * pi + Scalar(0.5) * (chain_t * pi);
      out.residual = (next - pi).template lpNorm<1>() * Scalar(2);
      pi = next / next.sum();
      if (out.residual < tol) break;
    }
    if (it == max_iter) {
      throw NonConvergenceError("policy_gain: stationary distribution did not converge",
                                static_cast<double>(out.residual), it);
    }
    out.residual = residual_of(pi);
    out.stationary = std::move(pi);
  }
  out.gain = std::clamp(out.stationary.dot(reward), Scalar(0), Scalar(1));
  return out;
}

enum class Heuristic {
  FullReplication,    // K packets on every link
  ProportionalSplit,  // K packets split by expected per-slot service, no redundancy
  SingleLink,         // K packets on one link only
};

/// Fixed reference policies used as baselines for the optimal one.
Policy heuristic_policy(const TabularMdp& mdp, Heuristic kind, std::size_t link = 0);

}  // namespace mpsched
