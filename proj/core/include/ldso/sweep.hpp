#pragma once

// Cartesian parameter sweeps over (axis value, policy, seed).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldso/engine.hpp"

namespace ldso {

enum class SweepAxis { control_v, poisson_mean, weight_theta, max_queue };

std::optional<SweepAxis> parse_axis(std::string_view name);
std::string_view axis_name(SweepAxis axis);

/// Copy of `base` with the axis parameter set (max_queue applies to every
/// server).
SystemConfig with_axis_value(const SystemConfig& base, SweepAxis axis, double value);

/// Seed of one sweep cell; independent of how many values or policies the
/// sweep holds, so sweeps can be extended without reshuffling old cells.
std::uint64_t sweep_run_seed(std::uint64_t base_seed, std::size_t value_index,
                             std::size_t policy_index);

struct SweepCell {
  std::size_t value_index = 0;
  double value = 0.0;
  std::size_t policy_index = 0;
  PolicyKind policy = PolicyKind::ldso;
  std::size_t seed_index = 0;
  std::uint64_t base_seed = 0;
  std::uint64_t run_seed = 0;
  std::optional<RunRecord> record;
  std::string error;  // non-empty when the run failed
};

struct SweepOptions {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned jobs = 0;
  RunOptions run;
  /// Called once per finished cell, never concurrently.
  std::function<void(const SweepCell&)> on_complete;
};

/// Runs every cell; a failing cell records its error and the rest continue.
/// Results come back ordered by (value, policy, seed) index.
std::vector<SweepCell> sweep(const SystemConfig& base, SweepAxis axis,
                             std::span<const double> values,
                             std::span<const PolicyKind> policies,
                             std::span<const std::uint64_t> seeds,
                             const SweepOptions& options = {});

}  // namespace ldso
