// mpsched: solve, simulate and sweep joint coding/scheduling policies for
// periodic blocks over parallel unreliable links.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mpsched/config_io.hpp"
#include "mpsched/mdp.hpp"
#include "mpsched/policy_table.hpp"
#include "mpsched/serialization.hpp"
#include "mpsched/sim.hpp"
#include "mpsched/solver.hpp"
#include "mpsched/sweep.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kInvalidInput = 2,
  kNonConvergence = 3,
  kMismatch = 4,
  kSweepPointFailed = 5,
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string pretty(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

double parse_sweep_value(const std::string& text, mpsched::SweepParameter parameter) {
  if (parameter == mpsched::SweepParameter::ExponentialCapacity) return mpsched::parse_rate(text);
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw mpsched::ContractError("cannot parse sweep value '" + text + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal joint packet-level coding and scheduling over parallel wireless links"};
  app.require_subcommand(1);

  std::string config_path, policy_path, out_path, format = "text", histogram_path, mdp_path;
  std::uint64_t blocks = 0, seed = 0;
  unsigned workers = 0;
  double tol = 1e-10;
  std::size_t max_iter = 1'000'000;

  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration file");
  validate_cmd->add_option("--config", config_path, "Configuration file")->required();

  auto* solve_cmd = app.add_subcommand("solve", "Compute the optimal policy and its reliability");
  solve_cmd->add_option("--config", config_path, "Configuration file")->required();
  solve_cmd->add_option("--out", out_path, "Policy JSON output (default: not written)");
  solve_cmd->add_option("--mdp-out", mdp_path, "Also dump the tabular MDP as JSON");
  solve_cmd->add_option("--tol", tol, "Span tolerance")->capture_default_str();
  solve_cmd->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
  solve_cmd->add_option("--workers", workers, "Threads for building the MDP (0 = all cores)");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of a policy's reliability");
  sim_cmd->add_option("--config", config_path, "Configuration file")->required();
  sim_cmd->add_option("--policy", policy_path, "Policy JSON from `solve --out`")->required();
  sim_cmd->add_option("--blocks", blocks, "Number of blocks to simulate")->required();
  sim_cmd->add_option("--seed", seed, "Random seed")->required();
  sim_cmd->add_option("--out", out_path, "Report JSON output (default: stdout)");
  sim_cmd->add_option("--histogram", histogram_path, "State-visit histogram CSV output");

  std::string param_name, from_text, to_text, links_text;
  auto* sweep_cmd = app.add_subcommand("sweep", "Solve the optimal policy over a parameter grid");
  sweep_cmd->add_option("--config", config_path, "Configuration file")->required();
  sweep_cmd->add_option("--param", param_name, "onoff.p_out or exponential.capacity_bps")->required();
  sweep_cmd->add_option("--from", from_text, "First grid value (rates accept Mb/s)");
  sweep_cmd->add_option("--to", to_text, "Last grid value");
  std::string step_text;
  sweep_cmd->add_option("--step", step_text, "Grid step (rates accept Mb/s)");
  sweep_cmd->add_option("--links", links_text, "Comma-separated link indices (default: all matching links)");
  sweep_cmd->add_option("--blocks", blocks, "Also simulate each point with this many blocks");
  auto* sweep_seed = sweep_cmd->add_option("--seed", seed, "Seed for the simulation columns");
  sweep_cmd->add_option("--workers", workers, "Grid points solved concurrently (0 = all cores)");
  sweep_cmd->add_option("--tol", tol, "Span tolerance")->capture_default_str();
  sweep_cmd->add_option("--max-iter", max_iter, "Iteration cap per point")->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "CSV output (default: stdout)");

  auto* table_cmd = app.add_subcommand("policy-table", "Render a two-link policy as fraction grids");
  table_cmd->add_option("--config", config_path, "Configuration file")->required();
  table_cmd->add_option("--policy", policy_path, "Policy JSON from `solve --out`")->required();
  table_cmd->add_option("--format", format, "csv, text or json")->check(CLI::IsMember({"csv", "text", "json"}));
  table_cmd->add_option("--out", out_path, "Output file (default: stdout)");
  int max_queue = -1;
  table_cmd->add_option("--max-queue", max_queue, "Show queue levels 0..N only (default: all)")
      ->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const mpsched::SystemConfig config = mpsched::load_config(config_path);

    if (validate_cmd->parsed()) {
      const mpsched::StateSpace space(config);
      std::cout << "ok: K=" << mpsched::block_packet_count(config) << " links=" << config.links.size()
                << " states=" << space.size() << " actions=" << mpsched::enumerate_actions(config).size() << "\n";
      return kOk;
    }

    if (solve_cmd->parsed()) {
      const auto mdp = mpsched::build_mdp(config, mpsched::BuildOptions{workers});
      const auto result = mpsched::relative_value_iteration(mdp, tol, max_iter);
      if (!out_path.empty()) write_text(out_path, pretty(mpsched::solve_result_to_json(mdp, result)));
      if (!mdp_path.empty()) write_text(mdp_path, pretty(mpsched::mdp_to_json(mdp)));
      std::printf("gain=%.6f iterations=%zu residual=%.3g\n", result.gain, result.iterations,
                  static_cast<double>(result.span_residual));
      return kOk;
    }

    if (sim_cmd->parsed()) {
      if (blocks == 0) throw mpsched::ContractError("--blocks must be positive");
      const auto policy = mpsched::load_policy(policy_path, config);
      const auto report = mpsched::simulate(config, policy, blocks, seed);
      const std::string json = pretty(mpsched::report_to_json(report, config));
      if (!histogram_path.empty()) write_text(histogram_path, mpsched::histogram_csv(report, config));
      if (out_path.empty()) {
        std::cout << json;
      } else {
        write_text(out_path, json);
      }
      std::fprintf(stderr, "estimate=%.6f ci99=[%.6f, %.6f] batch_ci99=[%.6f, %.6f]\n", report.estimate,
                   report.ci_low, report.ci_high, report.batch_ci_low, report.batch_ci_high);
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const auto parameter = mpsched::parse_sweep_parameter(param_name);
      auto spec = mpsched::default_sweep(parameter);
      if (!from_text.empty()) spec.from = parse_sweep_value(from_text, parameter);
      if (!to_text.empty()) spec.to = parse_sweep_value(to_text, parameter);
      if (!step_text.empty()) spec.step = parse_sweep_value(step_text, parameter);
      if (!links_text.empty()) {
        std::stringstream ss(links_text);
        for (std::string item; std::getline(ss, item, ',');) spec.links.push_back(std::stoul(item));
      }
      if (blocks > 0 && sweep_seed->count() == 0) {
        throw mpsched::ContractError("--seed is required when --blocks is given");
      }
      spec.sim_blocks = blocks;
      spec.seed = seed;
      spec.workers = workers;
      spec.rvi.tol = tol;
      spec.rvi.max_iter = max_iter;
      const auto rows = mpsched::run_sweep(config, spec);
      write_text(out_path, mpsched::sweep_csv(rows));
      for (const auto& row : rows) {
        if (!row.ok) {
          std::fprintf(stderr, "sweep point %g failed: %s\n", row.value, row.error.c_str());
        }
      }
      for (const auto& row : rows) {
        if (!row.ok) return kSweepPointFailed;
      }
      return kOk;
    }

    if (table_cmd->parsed()) {
      if (config.links.size() > 2) {
        throw mpsched::UnsupportedRenderingError(
            "policy-table renders at most two links; use the policy JSON from `solve --out` for a full dump");
      }
      const auto policy = mpsched::load_policy(policy_path, config);
      const auto fmt = format == "csv"    ? mpsched::TableFormat::Csv
                       : format == "json" ? mpsched::TableFormat::Json
                                          : mpsched::TableFormat::Text;
      write_text(out_path, mpsched::render_policy_table(config, policy, fmt, max_queue));
      return kOk;
    }
  } catch (const mpsched::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kInvalidInput;
  } catch (const mpsched::NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << " after " << e.iterations() << " iterations\n";
    return kNonConvergence;
  } catch (const mpsched::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  } catch (const mpsched::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
