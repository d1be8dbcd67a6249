#include "ldso/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "ldso/lyapunov.hpp"

namespace ldso {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 6> kPolicyNames{{
    {PolicyKind::ldso, "ldso"},
    {PolicyKind::oracle, "oracle"},
    {PolicyKind::random, "random"},
    {PolicyKind::nearest_capable, "nearest-capable"},
    {PolicyKind::local_first, "local-first"},
    {PolicyKind::cost_only, "cost-only"},
}};

OffloadDecision empty_decision(const MatchingProblem& p) {
  OffloadDecision d;
  d.x = Matrix<std::uint8_t>(p.servers, p.services, 0);
  d.host.assign(p.services, std::nullopt);
  return d;
}

void assign(OffloadDecision& d, std::size_t i, std::size_t k) {
  d.x(i, k) = 1;
  d.host[k] = i;
}

void collect_unassigned(const MatchingProblem& p, OffloadDecision& d) {
  d.unassigned.clear();
  for (std::size_t k = 0; k < p.services; ++k) {
    if (p.demanded(k) && !d.host[k]) d.unassigned.push_back(k);
  }
}

std::size_t hop_distance(const Matrix<int>& hops, std::size_t a, std::size_t b) {
  const int h = hops(a, b);
  return h < 0 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(h);
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  for (const auto& [k, name] : kPolicyNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (const auto& [k, n] : kPolicyNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> kinds = [] {
    std::vector<PolicyKind> v;
    for (const auto& entry : kPolicyNames) v.push_back(entry.first);
    return v;
  }();
  return kinds;
}

MatchingProblem build_problem(const CostInputs& in, const QueueState& queues, KeyKind kind) {
  const SystemConfig& cfg = in.cfg;
  MatchingProblem p;
  p.servers = cfg.server_count();
  p.services = cfg.service_count();
  p.key = Matrix<double>(p.servers, p.services, std::numeric_limits<double>::infinity());
  p.eligible = Matrix<std::uint8_t>(p.servers, p.services, 0);
  p.load.assign(p.services, 0);
  p.requester.assign(p.services, 0);
  p.backlog = queues.totals();
  for (const auto& s : cfg.servers) {
    p.max_queue.push_back(s.max_queue);
    p.max_arrival.push_back(s.max_arrival);
  }

  for (std::size_t k = 0; k < p.services; ++k) {
    p.load[k] = in.demand.service_volume(k);
    Bits most = -1;
    for (std::size_t i = 0; i < p.servers; ++i) {
      if (in.demand.bits(i, k) > most) {
        most = in.demand.bits(i, k);
        p.requester[k] = i;
      }
    }
  }

  for (std::size_t i = 0; i < p.servers; ++i) {
    for (std::size_t k = 0; k < p.services; ++k) {
      if (!cfg.servers[i].cached[k] || !p.demanded(k)) continue;
      // M/M/1 overload: this server cannot stably host the service.
      if (std::isinf(in.waits(i, k))) continue;
      const double energy = local_energy_term(in, i, k);
      const double delay = local_delay_term(in, i, k);
      const Bits backlog = kind == KeyKind::drift_plus_penalty ? queues.at(i, k) : 0;
      const double key =
          decision_cost(cfg.control_v, cfg.weight_theta, energy, delay, backlog, p.load[k]);
      if (!std::isfinite(key)) continue;
      p.key(i, k) = key;
      p.eligible(i, k) = 1;
    }
  }
  return p;
}

Objective OffloadDecision::objective(const MatchingProblem& p) const {
  Objective o;
  for (std::size_t k = 0; k < p.services; ++k) {
    if (!p.demanded(k)) continue;
    if (host[k]) {
      o.total += p.key(*host[k], k);
    } else {
      ++o.unassigned;
    }
  }
  return o;
}

bool Admission::fits(std::size_t i, std::size_t k) const {
  const Bits after = admitted_[i] + p_.load[k];
  return p_.backlog[i] + after <= p_.max_queue[i] && after <= p_.max_arrival[i];
}

OffloadDecision ldso_match(const MatchingProblem& p) {
  struct Candidate {
    double key;
    std::size_t i;
    std::size_t k;
  };
  std::vector<Candidate> pool;
  for (std::size_t i = 0; i < p.servers; ++i) {
    for (std::size_t k = 0; k < p.services; ++k) {
      if (p.eligible(i, k) && p.demanded(k)) pool.push_back({p.key(i, k), i, k});
    }
  }
  // Keys are fixed for the slot, so popping the minimum repeatedly is the
  // same as one pass over the sorted pool.
  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.i != b.i) return a.i < b.i;
    return a.k < b.k;
  });

  std::vector<bool> open(p.services, true);
  OffloadDecision d = empty_decision(p);
  Admission admission(p);
  for (const Candidate& c : pool) {
    if (!open[c.k]) continue;  // removed when its service was assigned
    d.examined.push_back(c.key);
    if (admission.fits(c.i, c.k)) {
      admission.admit(c.i, c.k);
      assign(d, c.i, c.k);
      open[c.k] = false;
    }
  }
  collect_unassigned(p, d);
  return d;
}

OffloadDecision oracle_match(const MatchingProblem& p) {
  double space = 1.0;
  for (std::size_t k = 0; k < p.services; ++k) space *= static_cast<double>(p.servers);
  if (space > 1e6) {
    throw OracleTooLarge("oracle_match: M^K = " + std::to_string(space) + " exceeds 10^6");
  }

  std::vector<std::size_t> open;
  for (std::size_t k = 0; k < p.services; ++k) {
    if (p.demanded(k)) open.push_back(k);
  }

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> choice(p.services, kNone);
  std::vector<std::size_t> best_choice = choice;
  Objective best{std::numeric_limits<std::size_t>::max(), 0.0};
  std::vector<Bits> admitted(p.servers, 0);

  // Services are visited in increasing k so partial sums accumulate in the
  // same order as OffloadDecision::objective.
  auto search = [&](auto&& self, std::size_t depth, Objective acc) -> void {
    if (depth == open.size()) {
      if (acc < best) {
        best = acc;
        best_choice = choice;
      }
      return;
    }
    const std::size_t k = open[depth];
    for (std::size_t i = 0; i < p.servers; ++i) {
      if (!p.eligible(i, k)) continue;
      const Bits after = admitted[i] + p.load[k];
      if (p.backlog[i] + after > p.max_queue[i] || after > p.max_arrival[i]) continue;
      admitted[i] = after;
      choice[k] = i;
      self(self, depth + 1, Objective{acc.unassigned, acc.total + p.key(i, k)});
      admitted[i] -= p.load[k];
      choice[k] = kNone;
    }
    self(self, depth + 1, Objective{acc.unassigned + 1, acc.total});
  };
  search(search, 0, Objective{});

  OffloadDecision d = empty_decision(p);
  for (std::size_t k : open) {
    if (best_choice[k] != kNone) assign(d, best_choice[k], k);
  }
  collect_unassigned(p, d);
  return d;
}

OffloadDecision random_match(const MatchingProblem& p, Rng& rng) {
  OffloadDecision d = empty_decision(p);
  Admission admission(p);
  std::vector<std::size_t> feasible;
  for (std::size_t k = 0; k < p.services; ++k) {
    if (!p.demanded(k)) continue;
    feasible.clear();
    for (std::size_t i = 0; i < p.servers; ++i) {
      if (p.eligible(i, k) && admission.fits(i, k)) feasible.push_back(i);
    }
    if (feasible.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
    const std::size_t i = feasible[pick(rng)];
    admission.admit(i, k);
    assign(d, i, k);
  }
  collect_unassigned(p, d);
  return d;
}

namespace {

std::optional<std::size_t> nearest_feasible(const MatchingProblem& p, const Matrix<int>& hops,
                                            const Admission& admission, std::size_t k) {
  const std::size_t origin = p.requester[k];
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < p.servers; ++i) {
    if (!p.eligible(i, k) || !admission.fits(i, k)) continue;
    if (!best || hop_distance(hops, origin, i) < hop_distance(hops, origin, *best)) best = i;
  }
  return best;
}

}  // namespace

OffloadDecision nearest_capable_match(const MatchingProblem& p, const Matrix<int>& hops) {
  OffloadDecision d = empty_decision(p);
  Admission admission(p);
  for (std::size_t k = 0; k < p.services; ++k) {
    if (!p.demanded(k)) continue;
    if (auto i = nearest_feasible(p, hops, admission, k)) {
      admission.admit(*i, k);
      assign(d, *i, k);
    }
  }
  collect_unassigned(p, d);
  return d;
}

OffloadDecision local_first_match(const MatchingProblem& p, const Matrix<int>& hops) {
  OffloadDecision d = empty_decision(p);
  Admission admission(p);
  for (std::size_t k = 0; k < p.services; ++k) {
    if (!p.demanded(k)) continue;
    std::optional<std::size_t> host;
    const std::size_t local = p.requester[k];
    if (p.eligible(local, k) && admission.fits(local, k)) {
      host = local;
    } else {
      host = nearest_feasible(p, hops, admission, k);
    }
    if (host) {
      admission.admit(*host, k);
      assign(d, *host, k);
    }
  }
  collect_unassigned(p, d);
  return d;
}

OffloadDecision decide(PolicyKind kind, const CostInputs& in, const QueueState& queues,
                       const Matrix<int>& hops, Rng& rng) {
  const KeyKind key = kind == PolicyKind::cost_only ? KeyKind::penalty_only
                                                    : KeyKind::drift_plus_penalty;
  const MatchingProblem p = build_problem(in, queues, key);
  switch (kind) {
    case PolicyKind::ldso:
    case PolicyKind::cost_only:
      return ldso_match(p);
    case PolicyKind::oracle:
      return oracle_match(p);
    case PolicyKind::random:
      return random_match(p, rng);
    case PolicyKind::nearest_capable:
      return nearest_capable_match(p, hops);
    case PolicyKind::local_first:
      return local_first_match(p, hops);
  }
  throw PreconditionError("unknown policy");
}

}  // namespace ldso
