#include "ldso/lyapunov.hpp"

#include <algorithm>
#include <cmath>

namespace ldso {

namespace {

// Squares of bit counts overflow int64 quickly; accumulate in long double.
long double half_sum_squares(std::span<const Bits> v) {
  long double sum = 0.0L;
  for (Bits q : v) sum += static_cast<long double>(q) * static_cast<long double>(q);
  return sum / 2.0L;
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw PreconditionError(std::string(what) + ": length mismatch");
}

}  // namespace

double lyapunov_value(std::span<const Bits> backlog) {
  for (Bits q : backlog) {
    if (q < 0) throw PreconditionError("lyapunov_value: negative backlog");
  }
  return static_cast<double>(half_sum_squares(backlog));
}

double drift(std::span<const Bits> current, std::span<const Bits> next) {
  require_same_length(current.size(), next.size(), "drift");
  return static_cast<double>(half_sum_squares(next) - half_sum_squares(current));
}

double drift_bound(std::span<const Bits> max_service, std::span<const Bits> max_arrival) {
  require_same_length(max_service.size(), max_arrival.size(), "drift_bound");
  return static_cast<double>(half_sum_squares(max_service) + half_sum_squares(max_arrival));
}

double decision_cost(double control_v, double theta, double energy, double delay, Bits backlog,
                     Bits arrivals) {
  return control_v * theta * energy + control_v * (1.0 - theta) * delay +
         static_cast<double>(backlog) * static_cast<double>(arrivals);
}

double drift_plus_penalty(double drift_value, double control_v, double cost) {
  return drift_value + control_v * cost;
}

double drift_upper_bound(double bound_b, std::span<const Bits> backlog,
                         std::span<const Bits> arrivals, std::span<const Bits> service) {
  require_same_length(backlog.size(), arrivals.size(), "drift_upper_bound");
  require_same_length(backlog.size(), service.size(), "drift_upper_bound");
  long double sum = bound_b;
  for (std::size_t i = 0; i < backlog.size(); ++i) {
    sum += static_cast<long double>(backlog[i]) *
           static_cast<long double>(arrivals[i] - service[i]);
  }
  return static_cast<double>(sum);
}

double penalty_upper_bound(double bound_b, double control_v, double cost,
                           std::span<const Bits> backlog, std::span<const Bits> arrivals) {
  require_same_length(backlog.size(), arrivals.size(), "penalty_upper_bound");
  long double sum = static_cast<long double>(bound_b) + static_cast<long double>(control_v) * cost;
  for (std::size_t i = 0; i < backlog.size(); ++i) {
    sum += static_cast<long double>(backlog[i]) * static_cast<long double>(arrivals[i]);
  }
  return static_cast<double>(sum);
}

bool within_bound(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return a <= b + rel * scale;
}

}  // namespace ldso
