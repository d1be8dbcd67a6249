#pragma once

// Per-server, per-service buffer backlogs and the slot update law
//   Q(t+1) = max{Q(t) - mu(t), 0} + A(t).
// Arrivals are added after service, so a slot's service only drains the
// backlog present at the start of the slot.

#include <span>
#include <vector>

#include "ldso/domain.hpp"

namespace ldso {

/// Aggregate update. Throws PreconditionError on negative inputs or when
/// `service` exceeds `max_service`.
Bits queue_update(Bits backlog, Bits service, Bits arrivals, Bits max_service);

/// Amount a server processes this slot: as much as capacity permits.
Bits service_amount(Bits max_service, Bits backlog, Bits arrivals);

/// Splits min(service, sum(backlog)) across services in proportion to their
/// backlog share. Floors each share and hands the leftover bits to the
/// largest remainders (ties to the lowest index), so the split is exact.
std::vector<Bits> proportional_service(std::span<const Bits> backlog, Bits service);

/// Per-service form of the update law. Throws PreconditionError when a
/// service is served more than its backlog plus arrivals.
std::vector<Bits> per_service_update(std::span<const Bits> backlog, std::span<const Bits> served,
                                     std::span<const Bits> arrivals);

class QueueState {
 public:
  QueueState() = default;
  QueueState(std::size_t servers, std::size_t services)
      : backlog_(servers, services, 0), totals_(servers, 0) {}

  std::size_t server_count() const noexcept { return totals_.size(); }
  std::size_t service_count() const noexcept { return backlog_.cols(); }

  Bits at(std::size_t i, std::size_t k) const { return backlog_(i, k); }
  Bits total(std::size_t i) const { return totals_[i]; }
  const std::vector<Bits>& totals() const noexcept { return totals_; }
  const Matrix<Bits>& per_service() const noexcept { return backlog_; }
  std::span<const Bits> row(std::size_t i) const {
    return {backlog_.data().data() + i * backlog_.cols(), backlog_.cols()};
  }

  /// Serves `service` bits at server i proportionally, then enqueues the
  /// per-service `arrivals`. Returns the bits actually served.
  Bits advance(std::size_t i, Bits service, std::span<const Bits> arrivals);

 private:
  Matrix<Bits> backlog_;
  std::vector<Bits> totals_;
};

}  // namespace ldso
