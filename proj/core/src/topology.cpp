#include "ldso/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "ldso/rng.hpp"

namespace ldso {

namespace {

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

TopologyFragment generate_topology(const TopologyParams& p) {
  if (!(p.width_m > 0.0) || !(p.height_m > 0.0)) {
    throw PreconditionError("topology area must be positive");
  }
  if (!(p.server_intensity > 0.0) || !(p.user_intensity > 0.0)) {
    throw PreconditionError("topology intensities must be positive");
  }
  const double area = p.width_m * p.height_m;
  Rng rng = make_rng(p.seed, Stream::topology);
  std::uniform_real_distribution<double> ux(0.0, p.width_m);
  std::uniform_real_distribution<double> uy(0.0, p.height_m);

  TopologyFragment out;
  if (!p.fixed_positions.empty()) {
    out.positions = p.fixed_positions;
  } else {
    std::size_t n = 0;
    if (p.server_count) {
      n = *p.server_count;
    } else {
      std::poisson_distribution<std::int64_t> count(p.server_intensity * area);
      n = static_cast<std::size_t>(count(rng));
    }
    out.positions.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = ux(rng);
      const double y = uy(rng);
      out.positions.push_back({x, y});
    }
  }
  if (out.positions.empty()) {
    throw TopologyError("PPP draw produced zero servers (expected " +
                        std::to_string(p.server_intensity * area) +
                        "); resample with a different seed or raise the intensity");
  }

  const std::size_t m = out.positions.size();
  out.covered_users.assign(m, 0);
  if (p.users_per_server) {
    std::fill(out.covered_users.begin(), out.covered_users.end(), *p.users_per_server);
  } else {
    std::poisson_distribution<std::int64_t> count(p.user_intensity * area);
    const std::int64_t users = count(rng);
    for (std::int64_t u = 0; u < users; ++u) {
      const Position pos{ux(rng), uy(rng)};
      std::size_t best = m;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double d = distance(pos, out.positions[i]);
        if (d <= p.user_range_m && d < best_d) {
          best = i;
          best_d = d;
        }
      }
      if (best == m) {
        ++out.orphan_users;
      } else {
        ++out.covered_users[best];
      }
    }
  }
  out.adjacency = adjacency_within(out.positions, p.server_range_m);
  return out;
}

std::vector<std::vector<std::size_t>> adjacency_within(const std::vector<Position>& positions,
                                                       double range_m) {
  std::vector<std::vector<std::size_t>> adj(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (distance(positions[i], positions[j]) <= range_m) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  return adj;
}

Matrix<int> hop_matrix(const std::vector<std::vector<std::size_t>>& adjacency) {
  const std::size_t m = adjacency.size();
  Matrix<int> hops(m, m, -1);
  for (std::size_t src = 0; src < m; ++src) {
    std::deque<std::size_t> frontier{src};
    hops(src, src) = 0;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      for (std::size_t v : adjacency[u]) {
        if (hops(src, v) < 0) {
          hops(src, v) = hops(src, u) + 1;
          frontier.push_back(v);
        }
      }
    }
  }
  return hops;
}

Matrix<std::uint8_t> place_services(std::uint64_t seed, const std::vector<Bits>& sizes,
                                    const std::vector<Bits>& capacities) {
  const std::size_t m = capacities.size();
  const std::size_t k_count = sizes.size();
  Matrix<std::uint8_t> placed(m, k_count, 0);
  std::vector<Bits> room = capacities;
  Rng rng = make_rng(seed, Stream::placement);

  std::vector<std::size_t> order(k_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  // Coverage first: each service goes to the server with the most room.
  for (std::size_t k : order) {
    std::size_t best = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (sizes[k] <= room[i] && (best == m || room[i] > room[best])) best = i;
    }
    if (best < m) {
      placed(best, k) = 1;
      room[best] -= sizes[k];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k : order) {
      if (!placed(i, k) && sizes[k] <= room[i]) {
        placed(i, k) = 1;
        room[i] -= sizes[k];
      }
    }
  }
  return placed;
}

std::vector<Position> load_positions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open positions file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("positions file is empty");
  if (line.rfind("id,x,y", 0) != 0) {
    throw std::runtime_error("positions file must start with header id,x,y");
  }
  std::vector<std::pair<std::size_t, Position>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, x, y;
    if (!std::getline(row, id, ',') || !std::getline(row, x, ',') || !std::getline(row, y)) {
      throw std::runtime_error("malformed positions row: " + line);
    }
    rows.push_back({std::stoul(id), {std::stod(x), std::stod(y)}});
  }
  std::vector<Position> out(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [id, pos] : rows) {
    if (id >= rows.size() || seen[id]) {
      throw std::runtime_error("positions ids must be a permutation of 0..n-1");
    }
    seen[id] = true;
    out[id] = pos;
  }
  return out;
}

}  // namespace ldso
