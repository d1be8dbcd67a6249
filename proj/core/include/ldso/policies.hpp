#pragma once

// Offloading decision policies. Every policy picks at most one host per
// demanded service (the host then queues all of that service's demand for
// the slot) subject to the headroom guard
//   Q_i(t) + admitted_i + load_k <= Q_i^max   and   admitted_i + load_k <= A_i^max
// where admitted_i is what the same decision already placed on server i.

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ldso/cost.hpp"
#include "ldso/domain.hpp"
#include "ldso/queueing.hpp"
#include "ldso/rng.hpp"

namespace ldso {

enum class PolicyKind { ldso, oracle, random, nearest_capable, local_first, cost_only };

std::string_view policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);
const std::vector<PolicyKind>& all_policies();

class OracleTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One slot's assignment problem, already priced.
struct MatchingProblem {
  std::size_t servers = 0;
  std::size_t services = 0;
  Matrix<double> key;              // per-candidate selection cost
  Matrix<std::uint8_t> eligible;   // caches k, k demanded, M/M/1 stable
  std::vector<Bits> load;          // bits a host of k enqueues this slot
  std::vector<std::size_t> requester;  // server receiving the most demand for k
  std::vector<Bits> backlog;       // Q_i(t)
  std::vector<Bits> max_queue;
  std::vector<Bits> max_arrival;

  bool demanded(std::size_t k) const { return load[k] > 0; }
};

enum class KeyKind {
  drift_plus_penalty,  // V*theta*E + V*(1-theta)*T + Q_i^k * load_k
  penalty_only,        // same without the backlog term
};

/// Prices every candidate with the local-processing summands of the cost
/// model.
MatchingProblem build_problem(const CostInputs& in, const QueueState& queues, KeyKind kind);

/// Lexicographic: fewer unassigned services first, then lower total key.
struct Objective {
  std::size_t unassigned = 0;
  double total = 0.0;
  friend auto operator<=>(const Objective&, const Objective&) = default;
};

struct OffloadDecision {
  Matrix<std::uint8_t> x;  // 1 where server i hosts service k
  std::vector<std::optional<std::size_t>> host;
  std::vector<std::size_t> unassigned;
  /// Keys in the order the greedy matcher examined them.
  std::vector<double> examined;

  DecisionMatrix binary() const { return x; }
  Objective objective(const MatchingProblem& p) const;
};

/// Tracks bits a decision has already placed on each server.
class Admission {
 public:
  explicit Admission(const MatchingProblem& p) : p_(p), admitted_(p.servers, 0) {}
  bool fits(std::size_t i, std::size_t k) const;
  void admit(std::size_t i, std::size_t k) { admitted_[i] += p_.load[k]; }

 private:
  const MatchingProblem& p_;
  std::vector<Bits> admitted_;
};

/// Greedy matching: repeatedly takes the globally cheapest remaining
/// candidate (ties: lowest server, then lowest service), assigns it when the
/// service is still open and the guard passes, otherwise discards it.
OffloadDecision ldso_match(const MatchingProblem& p);

/// Exhaustive minimizer of the lexicographic objective. Refuses when
/// M^K > 10^6.
OffloadDecision oracle_match(const MatchingProblem& p);

OffloadDecision random_match(const MatchingProblem& p, Rng& rng);
OffloadDecision nearest_capable_match(const MatchingProblem& p, const Matrix<int>& hops);
OffloadDecision local_first_match(const MatchingProblem& p, const Matrix<int>& hops);

/// Prices the problem with the key each policy needs and runs it.
OffloadDecision decide(PolicyKind kind, const CostInputs& in, const QueueState& queues,
                       const Matrix<int>& hops, Rng& rng);

}  // namespace ldso
