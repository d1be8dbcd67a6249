#pragma once

// Slot loop: demand -> decision -> cost -> queue update -> Lyapunov snapshot.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldso/cost.hpp"
#include "ldso/domain.hpp"
#include "ldso/lyapunov.hpp"
#include "ldso/policies.hpp"

namespace ldso {

inline constexpr std::string_view kEngineVersion = "ldso-engine/1";

struct ConstraintFlags {
  bool queue_cap = false;         // Q_i(t+1) > Q_i^max somewhere
  bool headroom = false;          // admitted_i > Q_i^max - Q_i(t)
  bool headroom_service = false;  // Q_i^max - Q_i(t) > mu_i(t)
  bool service_cap = false;       // mu_i(t) > mu_i^max
  bool energy_cap = false;
  bool delay_cap = false;
  bool single_host = false;       // some demanded service has no host
};

struct SlotMetrics {
  std::int64_t t = 0;
  CostBreakdown cost;
  std::vector<Bits> queue;  // Q_i at the end of the slot
  Bits queue_total = 0;
  LyapunovSnapshot lyapunov;
  double rate_bps = 0.0;
  Bits arrivals = 0;   // bits enqueued at hosts
  Bits served = 0;     // bits drained from backlogs
  Bits offloaded = 0;  // bits of demand assigned a host (same as arrivals)
  Bits deferred = 0;   // bits of demand whose service got no host
  Bits rejected = 0;   // bits cut by the A_i^max cap
  std::size_t assigned_services = 0;
  std::size_t unassigned_services = 0;
  ConstraintFlags flags;
};

// The default window equals the default popularity rotation period, so one
// full demand cycle is averaged out.
struct StabilizationParams {
  std::size_t window = 200;
  double tolerance = 0.10;
};

struct RunSummary {
  double mean_cost = 0.0;
  double mean_queue_total = 0.0;
  Bits total_offloaded = 0;
  std::optional<std::int64_t> stabilization_slot;
};

/// Whether the link can carry a slot's demand within one slot.
struct PhysicsReport {
  double min_rate_bps = 0.0;
  double min_link_bits_per_slot = 0.0;
  Bits peak_slot_volume = 0;
  bool feasible = true;
};

struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::ldso;
  std::vector<SlotMetrics> rows;
  RunSummary summary;
  PhysicsReport physics;
};

struct RunOptions {
  StabilizationParams stabilization;
  /// Called after each slot is recorded.
  std::function<void(const SlotMetrics&)> on_slot;
};

/// Executes cfg.slot_count slots. Bit-for-bit reproducible in (cfg, policy,
/// seed). Throws PreconditionError for an invalid config and
/// InvariantViolation if a per-slot check fails.
RunRecord run(const SystemConfig& cfg, PolicyKind policy, std::uint64_t seed,
              const RunOptions& options = {});

/// First slot s (counted so a constant series gives s == window) after which
/// the trailing-window mean stays within `tolerance` (relative) of its value
/// at s until the end, with at least `window` slots left to observe.
std::optional<std::int64_t> stabilization_slot(std::span<const double> series,
                                               std::size_t window, double tolerance);

/// Summary statistics recomputed from rows.
RunSummary summarize(std::span<const SlotMetrics> rows, const StabilizationParams& params);

/// Series of end-of-slot total backlog.
std::vector<double> queue_total_series(std::span<const SlotMetrics> rows);

}  // namespace ldso
