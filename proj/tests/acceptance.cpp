// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mpsched/config_io.hpp"
#include "mpsched/serialization.hpp"
#include "mpsched/sim.hpp"
#include "mpsched/solver.hpp"
#include "mpsched/sweep.hpp"

using namespace mpsched;

namespace {

const std::string kConfigDir = MPSCHED_CONFIG_DIR;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SystemConfig reference(const char* name) { return load_config(kConfigDir + "/" + name); }

SystemConfig with_capacity(SystemConfig c, double bps) {
  for (auto& link : c.links) {
    if (auto* e = std::get_if<ExponentialLink>(&link)) e->capacity_bps = bps;
  }
  return c;
}

double optimal_gain(const SystemConfig& c) { return relative_value_iteration(build_mdp(c)).gain; }

int action_index(const TabularMdp& mdp, const ActionVector& a) {
  return static_cast<int>(detail::find_action(mdp.actions, a));
}

Outcome pure_mmwave() {
  Outcome o;
  const auto config = reference("pure-mmwave.cfg");
  auto spec = default_sweep(SweepParameter::OnOffOutage);
  spec.workers = 0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_sweep(config, spec);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  bool all_ok = true;
  for (const auto& row : rows) {
    all_ok = all_ok && row.ok;
    if (row.value > 0.0) worst = std::max(worst, std::abs(row.gain - (1 - row.value * row.value)));
  }
  o.check(all_ok && rows.size() == 21, "all 21 grid points solved");
  o.check(worst <= 1e-6, fmt("max |gain - (1 - p_out^2)| = %.2e over p_out 0.025..0.5 (limit 1e-6)", worst));
  for (const auto& row : rows) {
    if (row.value == 0.1 || row.value == 0.2 || row.value == 0.5) {
      o.note(fmt("p_out %.2f -> %.6f", row.value, row.gain));
    }
  }
  o.check(elapsed < 60.0, fmt("sweep wall time %.1f s (limit 60 s)", elapsed));
  return o;
}

Outcome pure_sub6() {
  Outcome o;
  const auto config = reference("pure-sub6.cfg");
  const double gain = optimal_gain(config);
  o.check(std::abs(gain - 0.9637) <= 0.02, fmt("gain at 36 Mb/s = %.6f, target 0.9637 +/- 0.02", gain));

  auto spec = default_sweep(SweepParameter::ExponentialCapacity);
  spec.workers = 0;
  const auto rows = run_sweep(config, spec);
  bool increasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) increasing = increasing && rows[i].ok && rows[i].gain > rows[i - 1].gain;
  o.check(increasing, "gain strictly increasing over 24..72 Mb/s");
  o.check(rows.back().gain >= 0.999, fmt("gain at 72 Mb/s = %.10f (>= 0.999)", rows.back().gain));
  for (const auto& row : rows) {
    if (row.value == 24e6 || row.value == 28.8e6 || row.value == 38.4e6) {
      o.note(fmt("%.1f Mb/s -> %.8f", row.value / 1e6, row.gain));
    }
  }
  o.note("buffer sensitivity of the 36 Mb/s gain:");
  for (int q : {4, 6, 8, 10, 16}) {
    auto c = config;
    c.q_max = q;
    o.note(fmt("  q_max %2d -> %.8f", q, optimal_gain(c)));
  }
  return o;
}

Outcome mixed_ordering() {
  Outcome o;
  const auto mixed = reference("mixed.cfg");
  const auto sub6 = reference("pure-sub6.cfg");
  const double g_mixed = optimal_gain(mixed);
  const double g_mm = optimal_gain(reference("pure-mmwave.cfg"));
  const double g_sub6 = optimal_gain(sub6);
  o.check(std::abs(g_mixed - 0.9258) <= 0.02,
          fmt("mixed gain at p_out 0.2, 36 Mb/s = %.6f, target 0.9258 +/- 0.02", g_mixed));
  o.check(g_mixed < g_mm && g_mm < g_sub6,
          fmt("mixed %.6f < pure mmWave %.6f < pure sub-6 %.6f", g_mixed, g_mm, g_sub6));
  const double m288 = optimal_gain(with_capacity(mixed, 28.8e6));
  const double s288 = optimal_gain(with_capacity(sub6, 28.8e6));
  o.check(m288 > s288, fmt("28.8 Mb/s: mixed %.6f > pure sub-6 %.6f", m288, s288));
  const double m384 = optimal_gain(with_capacity(mixed, 38.4e6));
  const double s384 = optimal_gain(with_capacity(sub6, 38.4e6));
  o.check(m384 < s384, fmt("38.4 Mb/s: mixed %.6f < pure sub-6 %.6f", m384, s384));
  o.note("buffer sensitivity of the mixed gain:");
  for (int q : {4, 8, 16}) {
    auto c = mixed;
    c.q_max = q;
    o.note(fmt("  q_max %2d -> %.6f", q, optimal_gain(c)));
  }
  return o;
}

Outcome policy_structure() {
  Outcome o;
  const int display = 4;
  {
    const auto mdp = build_mdp(reference("pure-sub6.cfg"));
    const auto result = relative_value_iteration(mdp);
    const StateSpace space(mdp.config);
    const auto q = detail::action_values(mdp, result.bias);
    double asym = 0.0;
    int mirrored = 0, exact = 0;
    for (std::size_t s = 0; s < space.size(); ++s) {
      auto st = space.state(s);
      std::swap(st.queues[0], st.queues[1]);
      const auto m = static_cast<Eigen::Index>(space.index(st));
      asym = std::max(asym, std::abs(result.bias(static_cast<Eigen::Index>(s)) - result.bias(m)));
      auto a = result.policy[s];
      std::reverse(a.counts.begin(), a.counts.end());
      const int ai = action_index(mdp, a);
      mirrored += q(m, ai) >= q.row(m).maxCoeff() - 1e-9;
      exact += a == result.policy[static_cast<std::size_t>(m)];
    }
    o.check(asym <= 1e-9, fmt("(a) max |h(q1,q2) - h(q2,q1)| = %.2e", asym));
    o.check(mirrored == static_cast<int>(space.size()),
            fmt("(a) mirrored action optimal in %d/%zu states (%d identical after tie-break)", mirrored,
                space.size(), exact));
    const auto& cell = result.policy[space.index(MdpState{{4, 4}, {}})];
    o.check(!cell.drop && cell.total() == block_packet_count(mdp.config),
            "(b) state (4,4) sends " + to_string(cell) + ", redundancy " +
                fmt("%.1f", cell.total() / 10.0 - 1.0));

    const int k = block_packet_count(mdp.config);
    int lo = 100, hi = -100;
    for (int q1 = 0; q1 <= 1; ++q1) {
      for (int q2 = 0; q2 <= 1; ++q2) {
        const auto& a = result.policy[space.index(MdpState{{q1, q2}, {}})];
        lo = std::min(lo, a.total() - k);
        hi = std::max(hi, a.total() - k);
      }
    }
    o.check(lo >= 0 && hi <= 3, fmt("(d) redundancy over queues <= 1 spans %.1f..%.1f (window 0.1..0.2 +/- 0.1)",
                                     lo / 10.0, hi / 10.0));
  }
  {
    const auto mdp = build_mdp(reference("mixed.cfg"));
    const auto result = relative_value_iteration(mdp);
    const StateSpace space(mdp.config);
    const int k = block_packet_count(mdp.config);
    bool full = true, small = true;
    for (int q1 = 0; q1 <= display; ++q1) {
      for (int q2 = 0; q2 <= display; ++q2) {
        const auto& a = result.policy[space.index(MdpState{{q1, q2}, {Availability::Available}})];
        full = full && !a.drop && a.counts[0] == k;
        small = small && !a.drop && a.counts[1] * 10 <= 4 * k;
      }
    }
    o.check(full && small, "(c) mmWave Available: mmWave fraction 1.0 and sub-6 <= 0.4 in all 25 displayed states");
    const auto& origin = result.policy[space.index(MdpState{{0, 0}, {Availability::Available}})];
    o.note("(c) origin cell sends " + to_string(origin) +
           "; the reference table lists 1\\0.2 (extra sub-6 packets cannot help a block the "
           "available mmWave link already delivers, so they only add queueing)");
  }
  return o;
}

Outcome oracle_agreement() {
  Outcome o;
  struct Pair {
    std::string label;
    SystemConfig config;
    std::function<Policy(const TabularMdp&)> policy;
  };
  auto optimal = [](const TabularMdp& m) { return relative_value_iteration(m).policy; };
  const std::vector<Pair> pairs = {
      {"pure mmWave, optimal", reference("pure-mmwave.cfg"), optimal},
      {"pure sub-6, optimal", reference("pure-sub6.cfg"), optimal},
      {"mixed, optimal", reference("mixed.cfg"), optimal},
      {"mixed, full replication", reference("mixed.cfg"),
       [](const TabularMdp& m) { return heuristic_policy(m, Heuristic::FullReplication); }},
      {"pure sub-6, proportional split", reference("pure-sub6.cfg"),
       [](const TabularMdp& m) { return heuristic_policy(m, Heuristic::ProportionalSplit); }},
      {"pure mmWave, link 1 only", reference("pure-mmwave.cfg"),
       [](const TabularMdp& m) { return heuristic_policy(m, Heuristic::SingleLink, 0); }},
  };
  constexpr int seeds = 20;
  constexpr std::uint64_t blocks = 1'000'000;
  int runs = 0, wilson_in = 0, batch_in = 0;
  double sim_seconds = 0.0;
  for (const auto& pair : pairs) {
    const auto mdp = build_mdp(pair.config);
    const auto policy = pair.policy(mdp);
    const double gain = policy_gain(mdp, policy).gain;
    int w = 0, b = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int seed = 1; seed <= seeds; ++seed) {
      const auto r = simulate(pair.config, policy, blocks, static_cast<std::uint64_t>(seed));
      w += r.ci_low <= gain && gain <= r.ci_high;
      b += r.batch_ci_low <= gain && gain <= r.batch_ci_high;
    }
    sim_seconds += seconds_since(t0);
    runs += seeds;
    wilson_in += w;
    batch_in += b;
    o.note(fmt("%-32s gain %.6f  Wilson %2d/%d  batch-means %2d/%d", pair.label.c_str(), gain, w, seeds, b, seeds));
  }
  const double coverage = static_cast<double>(wilson_in) / runs;
  o.check(coverage >= 0.95, fmt("analytic gain inside the 99%% Wilson interval in %d/%d runs (%.1f%%, need 95%%)",
                                wilson_in, runs, 100.0 * coverage));
  o.note(fmt("batch-means 99%% interval covers it in %d/%d runs (%.1f%%)", batch_in, runs, 100.0 * batch_in / runs));
  o.note("consecutive blocks share queue and channel state; the i.i.d. Wilson width is too narrow for");
  o.note("trajectories with long outage runs or persistent backlog");
  o.check(sim_seconds < 300.0, fmt("%d simulations of 10^6 blocks in %.1f s (limit 300 s)", runs, sim_seconds));
  return o;
}

Outcome toy_brute_force() {
  Outcome o;
  SystemConfig c;
  c.frame_bits = c.packet_bits = 40'000;
  c.q_max = 0;
  c.links = {OnOffLink{1.0 / 6.0, 2.0}, OnOffLink{2.0 / 7.0, 2.0}};  // good->good 0.9 and 0.8
  const auto result = relative_value_iteration(build_mdp(c));

  Eigen::Matrix2d a, b;
  a << 0.9, 0.1, 0.5, 0.5;
  b << 0.8, 0.2, 0.5, 0.5;
  Eigen::Matrix4d joint;
  for (int s = 0; s < 4; ++s)
    for (int t = 0; t < 4; ++t) joint(s, t) = a(s / 2, t / 2) * b(s % 2, t % 2);
  Eigen::Matrix4d system = joint.transpose() - Eigen::Matrix4d::Identity();
  system.row(3).setOnes();
  const Eigen::Vector4d pi = system.fullPivLu().solve(Eigen::Vector4d(0, 0, 0, 1));
  const double oracle = 1.0 - pi(3);
  o.check(std::abs(result.gain - oracle) <= 1e-10,
          fmt("RVI %.15f vs stationary solve %.15f (|diff| %.1e)", result.gain, oracle, std::abs(result.gain - oracle)));
  return o;
}

Outcome kernel_rows() {
  Outcome o;
  for (const char* name : {"pure-mmwave.cfg", "pure-sub6.cfg", "mixed.cfg"}) {
    const auto mdp = build_mdp(reference(name));
    double worst = 0.0;
    const TabularMdp::Vector sums = mdp.kernel * TabularMdp::Vector::Ones(mdp.num_states());
    worst = (sums.array() - 1.0).abs().maxCoeff();
    bool nonneg = true;
    for (Eigen::Index i = 0; i < mdp.kernel.nonZeros(); ++i) nonneg = nonneg && mdp.kernel.valuePtr()[i] >= 0.0;
    o.check(worst <= 1e-12 && nonneg, fmt("%-16s %8ld rows, max |row sum - 1| = %.1e", name,
                                          static_cast<long>(mdp.kernel.rows()), worst));
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto mixed = reference("mixed.cfg");
  auto policy_json = [&](unsigned workers) {
    const auto mdp = build_mdp(mixed, {workers});
    return solve_result_to_json(mdp, relative_value_iteration(mdp)).dump();
  };
  const auto p1 = policy_json(1);
  o.check(p1 == policy_json(1) && p1 == policy_json(4), "policy JSON identical across runs and 1/4 build workers");

  auto spec = default_sweep(SweepParameter::OnOffOutage);
  spec.from = 0.1;
  spec.to = 0.3;
  spec.step = 0.05;
  spec.sim_blocks = 100'000;
  spec.seed = 7;
  spec.workers = 1;
  const auto csv1 = sweep_csv(run_sweep(mixed, spec));
  const auto csv1b = sweep_csv(run_sweep(mixed, spec));
  spec.workers = 4;
  const auto csv4 = sweep_csv(run_sweep(mixed, spec));
  o.check(csv1 == csv1b && csv1 == csv4, "sweep CSV identical across runs and 1/4 workers");

  const auto policy = policy_from_json(nlohmann::json::parse(p1), mixed);
  const auto r1 = report_to_json(simulate(mixed, policy, 200'000, 99), mixed).dump();
  const auto r2 = report_to_json(simulate(mixed, policy, 200'000, 99), mixed).dump();
  o.check(r1 == r2, "simulation report identical for a repeated seed");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "pure mmWave reliability equals 1 - p_out^2", pure_mmwave},
      {2, "pure sub-6 reliability, monotone in capacity", pure_sub6},
      {3, "mixed scenario level and orderings", mixed_ordering},
      {4, "policy structure", policy_structure},
      {5, "simulator agrees with analytic gain", oracle_agreement},
      {6, "toy chain brute force", toy_brute_force},
      {7, "kernel rows are distributions", kernel_rows},
      {8, "bit-identical outputs", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details.push_back(std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, seconds_since(t0));
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
