#pragma once

// Quadratic Lyapunov function over server backlogs, its one-slot drift, the
// constant drift bound B, and the drift-plus-penalty quantities used by the
// LDSO scheduler.

#include <span>

#include "ldso/domain.hpp"

namespace ldso {

/// L = 1/2 * sum_i Q_i^2.
double lyapunov_value(std::span<const Bits> backlog);

/// L(next) - L(current). Throws PreconditionError on length mismatch.
double drift(std::span<const Bits> current, std::span<const Bits> next);

/// B = sum_i (mu_i^max^2 + A_i^max^2) / 2.
double drift_bound(std::span<const Bits> max_service, std::span<const Bits> max_arrival);

/// C_i^k = V*theta*E + V*(1-theta)*T + Q*A.
double decision_cost(double control_v, double theta, double energy, double delay,
                     Bits backlog, Bits arrivals);

/// Delta L + V * Cost.
double drift_plus_penalty(double drift_value, double control_v, double cost);

/// B + sum_i Q_i (A_i - mu_i): the one-slot drift never exceeds this.
double drift_upper_bound(double bound_b, std::span<const Bits> backlog,
                         std::span<const Bits> arrivals, std::span<const Bits> service);

/// B + V * Cost + sum_i Q_i A_i: the drift-plus-penalty never exceeds this.
double penalty_upper_bound(double bound_b, double control_v, double cost,
                           std::span<const Bits> backlog, std::span<const Bits> arrivals);

/// a <= b allowing `rel` relative slack on the larger magnitude.
bool within_bound(double a, double b, double rel = 1e-9);

struct LyapunovSnapshot {
  double value = 0.0;          // L at end of slot
  double drift = 0.0;          // Delta L over the slot
  double bound_b = 0.0;
  double drift_plus_penalty = 0.0;
  double drift_bound = 0.0;    // B + sum Q_i (A_i - mu_i)
  double penalty_bound = 0.0;  // B + V*Cost + sum Q_i A_i
};

}  // namespace ldso
