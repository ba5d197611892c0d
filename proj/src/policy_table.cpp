#include "mpsched/policy_table.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "mpsched/mdp.hpp"

namespace mpsched {

namespace {

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return std::string(buf) == "-0.0" ? "0.0" : buf;
}

std::string fractions(const ActionVector& a, int k, char sep) {
  if (a.drop) return "drop";
  std::string out;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    if (i) out += sep;
    out += one_decimal(static_cast<double>(a.counts[i]) / k);
  }
  return out;
}

std::string redundancy(const ActionVector& a, int k) {
  if (a.drop) return "drop";
  return one_decimal(static_cast<double>(a.total()) / k - 1.0);
}

std::string availability_label(const std::vector<Availability>& flags) {
  std::string out;
  for (const auto f : flags) out += f == Availability::Available ? 'A' : 'O';
  return out;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string render_policy_table(const SystemConfig& config, const Policy& policy, TableFormat format,
                                int max_queue) {
  const std::size_t links = config.links.size();
  if (links > 2) {
    throw UnsupportedRenderingError("policy-table renders at most two links; use the policy JSON from `solve --out` "
                                    "for a full per-state dump");
  }
  const StateSpace space(config);
  if (policy.size() != space.size()) throw ContractError("policy does not cover the configuration's state space");
  const int k = block_packet_count(config);
  const int side = (max_queue < 0 ? config.q_max : std::min(max_queue, config.q_max)) + 1;
  const int rows = links == 2 ? side : 1;
  const std::size_t combos = std::size_t{1} << space.onoff_count();

  std::string out;
  nlohmann::json cells_json = nlohmann::json::array();
  if (format == TableFormat::Csv) {
    out = links == 2 ? "availability,q1,q2,frac1,frac2,redundancy\n" : "availability,q1,frac1,redundancy\n";
  }
  for (std::size_t combo = 0; combo < combos; ++combo) {
    MdpState state;
    state.queues.assign(links, 0);
    for (std::size_t j = 0; j < space.onoff_count(); ++j) {
      state.availability.push_back((combo >> (space.onoff_count() - 1 - j)) & 1 ? Availability::Outage
                                                                                 : Availability::Available);
    }
    const std::string label = availability_label(state.availability);

    if (format == TableFormat::Json) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < side; ++c) {
          state.queues[0] = c;
          if (links == 2) state.queues[1] = r;
          const auto& a = policy[space.index(state)];
          nlohmann::json cell = {{"availability", label}, {"queues", state.queues}};
          if (a.drop) {
            cell["action"] = "drop";
          } else {
            std::vector<double> frac;
            for (const int n : a.counts) frac.push_back(std::stod(one_decimal(static_cast<double>(n) / k)));
            cell["action"] = a.counts;
            cell["fractions"] = frac;
            cell["redundancy"] = std::stod(redundancy(a, k));
          }
          cells_json.push_back(std::move(cell));
        }
      }
      continue;
    }

    if (format == TableFormat::Csv) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < side; ++c) {
          state.queues[0] = c;
          if (links == 2) state.queues[1] = r;
          const auto& a = policy[space.index(state)];
          out += label + ',' + std::to_string(c) + (links == 2 ? ',' + std::to_string(r) : "") + ',' +
                 (a.drop ? (links == 2 ? "drop,drop" : "drop") : fractions(a, k, ',')) + ',' + redundancy(a, k) +
                 '\n';
        }
      }
      continue;
    }

    // Text: a fractions grid and a redundancy grid side by side.
    std::vector<std::vector<std::string>> cells(rows, std::vector<std::string>(side));
    std::vector<std::vector<std::string>> red(rows, std::vector<std::string>(side));
    std::size_t width = 4;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < side; ++c) {
        state.queues[0] = c;
        if (links == 2) state.queues[1] = r;
        const auto& a = policy[space.index(state)];
        cells[r][c] = fractions(a, k, '\\');
        red[r][c] = redundancy(a, k);
        width = std::max({width, cells[r][c].size(), red[r][c].size()});
      }
    }
    if (!label.empty()) out += "availability " + label + "\n";
    out += pad(links == 2 ? "q2\\q1" : "q1", 6) + " |";
    for (int c = 0; c < side; ++c) out += ' ' + pad(std::to_string(c), width);
    out += "   redundancy\n";
    for (int r = 0; r < rows; ++r) {
      out += pad(links == 2 ? std::to_string(r) : "", 6) + " |";
      for (int c = 0; c < side; ++c) out += ' ' + pad(cells[r][c], width);
      out += "  ";
      for (int c = 0; c < side; ++c) out += ' ' + pad(red[r][c], width);
      out += '\n';
    }
    out += '\n';
  }
  if (format == TableFormat::Json) {
    return nlohmann::json{{"block_packets", k}, {"cells", cells_json}}.dump(2) + '\n';
  }
  return out;
}

}  // namespace mpsched
