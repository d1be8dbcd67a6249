#include "ldso/queueing.hpp"

#include <algorithm>
#include <numeric>

namespace ldso {

Bits queue_update(Bits backlog, Bits service, Bits arrivals, Bits max_service) {
  if (backlog < 0 || service < 0 || arrivals < 0) {
    throw PreconditionError("queue_update: inputs must be nonnegative");
  }
  if (service > max_service) {
    throw PreconditionError("queue_update: service " + std::to_string(service) +
                            " exceeds max service rate " + std::to_string(max_service));
  }
  return std::max<Bits>(backlog - service, 0) + arrivals;
}

Bits service_amount(Bits max_service, Bits backlog, Bits arrivals) {
  return std::min(max_service, backlog + arrivals);
}

std::vector<Bits> proportional_service(std::span<const Bits> backlog, Bits service) {
  std::vector<Bits> served(backlog.size(), 0);
  const Bits total = std::accumulate(backlog.begin(), backlog.end(), Bits{0});
  const Bits budget = std::min(std::max<Bits>(service, 0), total);
  if (budget == 0) return served;

  std::vector<Bits> remainder(backlog.size(), 0);
  Bits assigned = 0;
  for (std::size_t k = 0; k < backlog.size(); ++k) {
    const auto scaled = static_cast<__int128>(budget) * backlog[k];
    served[k] = static_cast<Bits>(scaled / total);
    remainder[k] = static_cast<Bits>(scaled % total);
    assigned += served[k];
  }
  std::vector<std::size_t> order(backlog.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t j = 0; assigned < budget; ++j) {
    ++served[order[j]];
    ++assigned;
  }
  return served;
}

std::vector<Bits> per_service_update(std::span<const Bits> backlog, std::span<const Bits> served,
                                     std::span<const Bits> arrivals) {
  if (backlog.size() != served.size() || backlog.size() != arrivals.size()) {
    throw PreconditionError("per_service_update: length mismatch");
  }
  std::vector<Bits> next(backlog.size());
  for (std::size_t k = 0; k < backlog.size(); ++k) {
    if (backlog[k] < 0 || served[k] < 0 || arrivals[k] < 0) {
      throw PreconditionError("per_service_update: inputs must be nonnegative");
    }
    if (served[k] > backlog[k] + arrivals[k]) {
      throw PreconditionError("per_service_update: service " + std::to_string(k) +
                              " over-served");
    }
    next[k] = std::max<Bits>(backlog[k] - served[k], 0) + arrivals[k];
  }
  return next;
}

Bits QueueState::advance(std::size_t i, Bits service, std::span<const Bits> arrivals) {
  const std::span<const Bits> current = row(i);
  const std::vector<Bits> served = proportional_service(current, service);
  const std::vector<Bits> next = per_service_update(current, served, arrivals);
  Bits total = 0;
  for (std::size_t k = 0; k < next.size(); ++k) {
    backlog_(i, k) = next[k];
    total += next[k];
  }
  totals_[i] = total;
  return std::accumulate(served.begin(), served.end(), Bits{0});
}

}  // namespace ldso
