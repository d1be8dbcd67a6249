#pragma once

// Synthetic SBS/user placement on a rectangle, SBS adjacency, and service
// placement under cache capacity.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ldso/domain.hpp"

namespace ldso {

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TopologyParams {
  std::uint64_t seed = 1;
  double width_m = 100.0;
  double height_m = 100.0;
  double server_intensity = 1e-3;  // SBS per square meter
  double user_intensity = 5e-2;    // users per square meter
  double user_range_m = 15.0;
  double server_range_m = 30.0;
  /// When set, the server count is fixed (a PPP conditioned on its count).
  std::optional<std::size_t> server_count;
  /// When set, every SBS covers exactly this many users and no user PPP is drawn.
  std::optional<std::int64_t> users_per_server;
  /// When non-empty, server positions are taken from here instead of sampled.
  std::vector<Position> fixed_positions;
};

struct TopologyFragment {
  std::vector<Position> positions;
  std::vector<std::int64_t> covered_users;
  std::vector<std::vector<std::size_t>> adjacency;
  std::int64_t orphan_users = 0;
};

/// Pure in (params). Throws TopologyError when the draw has no servers.
TopologyFragment generate_topology(const TopologyParams& params);

/// Neighbors are servers within `range_m` of each other (Euclidean).
std::vector<std::vector<std::size_t>> adjacency_within(const std::vector<Position>& positions,
                                                       double range_m);

/// All-pairs unweighted shortest-path hop counts; -1 marks unreachable pairs.
Matrix<int> hop_matrix(const std::vector<std::vector<std::size_t>>& adjacency);

/// Random cache fill. Services in shuffled order are first placed once each
/// on the server with the most spare room, then every server packs a
/// shuffled list of the rest into what is left. Result is servers x services.
Matrix<std::uint8_t> place_services(std::uint64_t seed, const std::vector<Bits>& sizes,
                                    const std::vector<Bits>& capacities);

/// Reads `id,x,y` rows (header required). Ids must be 0..n-1 in any order.
std::vector<Position> load_positions_csv(const std::filesystem::path& path);

}  // namespace ldso
