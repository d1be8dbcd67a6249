#pragma once

// Per-slot service demand: request probabilities P_k(t), request counts
// n_i^k(t) and arrival volumes A_i^k(t), A_i(t).

#include <cstdint>
#include <vector>

#include "ldso/domain.hpp"

namespace ldso {

struct SlotDemand {
  std::int64_t t = 0;
  std::vector<double> probabilities;   // P_k(t)
  Matrix<std::int64_t> requests;       // n_i^k(t)
  Matrix<Bits> bits;                   // A_i^k(t) = n_i^k(t) * b_k
  std::vector<Bits> totals;            // A_i(t)
  std::vector<Bits> rejected;          // bits dropped by the A_i^max cap

  std::size_t server_count() const noexcept { return totals.size(); }
  std::size_t service_count() const noexcept { return probabilities.size(); }

  /// Sum over servers of A_i^k(t).
  Bits service_volume(std::size_t k) const;
  Bits total_volume() const;

  /// Recomputes `bits` and `totals` from `requests` and the size vector.
  void refresh(const std::vector<Bits>& sizes);
};

/// Nonnegative, sums to 1, deterministic in (model, t).
std::vector<double> request_probabilities(const RequestModel& model, std::size_t service_count,
                                          std::int64_t t);

/// Expectation mode rounds n_i * P_k(t) half-to-even and ignores the seed.
/// Stochastic mode draws Poisson counts from a stream keyed on (seed, t).
/// Volumes above A_i^max are cut back by scaling every service's count by the
/// same factor (floored); the cut is reported in `rejected`.
SlotDemand slot_demand(const SystemConfig& cfg, const RequestModel& model, std::int64_t t,
                       std::uint64_t seed);

/// Enforces A_i(t) <= A_i^max by scaling server i's counts down (floored)
/// and adds the cut to `rejected`.
void apply_arrival_cap(const SystemConfig& cfg, SlotDemand& demand);

/// An all-zero demand of the right shape.
SlotDemand empty_demand(std::size_t servers, std::size_t services, std::int64_t t);

}  // namespace ldso
