#include "ldso/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ldso/config_io.hpp"
#include "ldso/queueing.hpp"
#include "ldso/rng.hpp"
#include "ldso/topology.hpp"
#include "ldso/workload.hpp"

namespace ldso {

namespace {

void require(bool ok, std::int64_t t, const std::string& what) {
  if (!ok) throw InvariantViolation(t, what);
}

double sample_rate(const RadioConfig& radio, Rng& rng) {
  std::uniform_real_distribution<double> power(radio.tx_power_min_w, radio.tx_power_max_w);
  const double p_u = radio.tx_power_min_w == radio.tx_power_max_w ? radio.tx_power_min_w
                                                                   : power(rng);
  double gain_db = radio.channel_gain_db;
  if (radio.fading_sigma_db > 0.0) {
    gain_db += std::normal_distribution<double>(0.0, radio.fading_sigma_db)(rng);
  }
  const double gain = std::pow(10.0, gain_db / 10.0);
  return channel_rate(radio.bandwidth_hz, signal_to_noise(p_u, gain, radio.noise_power_w));
}

// A service that found no host re-enters the next slot with the request
// counts it had, replacing that slot's fresh draw.
void carry_deferred(const SystemConfig& cfg, const Matrix<std::int64_t>& previous,
                    const std::vector<std::size_t>& deferred, SlotDemand& demand) {
  if (deferred.empty()) return;
  for (std::size_t k : deferred) {
    for (std::size_t i = 0; i < demand.server_count(); ++i) {
      demand.requests(i, k) = previous(i, k);
    }
  }
  demand.refresh(cfg.catalog.sizes);
  apply_arrival_cap(cfg, demand);
}

SlotDemand without_services(const SystemConfig& cfg, const SlotDemand& demand,
                            const std::vector<std::size_t>& dropped) {
  SlotDemand out = demand;
  for (std::size_t k : dropped) {
    for (std::size_t i = 0; i < out.server_count(); ++i) out.requests(i, k) = 0;
  }
  out.refresh(cfg.catalog.sizes);
  return out;
}

}  // namespace

RunRecord run(const SystemConfig& cfg, PolicyKind policy, std::uint64_t seed,
              const RunOptions& options) {
  if (const auto report = validate_config(cfg); !report.ok()) {
    throw PreconditionError("invalid config:\n" + report.to_string());
  }
  const std::size_t m = cfg.server_count();
  const std::size_t k_count = cfg.service_count();

  std::vector<Position> positions;
  for (const auto& s : cfg.servers) positions.push_back(s.position);
  const Matrix<int> hops = hop_matrix(adjacency_within(positions, cfg.server_range_m));
  const CollaborationContext ctx = make_collaboration_context(cfg, hops);

  std::vector<Bits> max_service, max_arrival;
  for (const auto& s : cfg.servers) {
    max_service.push_back(s.max_service_rate);
    max_arrival.push_back(s.max_arrival);
  }
  const double bound_b = drift_bound(max_service, max_arrival);

  Rng channel_rng = make_rng(seed, Stream::channel);
  Rng policy_rng = make_rng(seed, Stream::policy);

  RunRecord record;
  record.config_hash = config_hash(cfg);
  record.seed = seed;
  record.policy = policy;
  record.rows.reserve(static_cast<std::size_t>(cfg.slot_count));
  record.physics.min_rate_bps = std::numeric_limits<double>::infinity();

  QueueState queues(m, k_count);
  Matrix<std::int64_t> previous_requests(m, k_count, 0);
  std::vector<std::size_t> deferred;

  for (std::int64_t t = 0; t < cfg.slot_count; ++t) {
    SlotDemand demand = slot_demand(cfg, cfg.request_model, t, seed);
    carry_deferred(cfg, previous_requests, deferred, demand);

    const double rate = sample_rate(cfg.radio, channel_rng);
    const Matrix<double> waits = mm1_waits(cfg, demand);
    const CostInputs priced{cfg, demand, ctx, rate, waits};
    const OffloadDecision decision = decide(policy, priced, queues, hops, policy_rng);

    SlotMetrics row;
    row.t = t;
    row.rate_bps = rate;

    // Host arrivals: each assigned service's whole demand lands at its host.
    Matrix<Bits> arrivals(m, k_count, 0);
    std::vector<Bits> host_arrivals(m, 0);
    for (std::size_t k = 0; k < k_count; ++k) {
      const Bits volume = demand.service_volume(k);
      std::size_t hosts = 0;
      for (std::size_t i = 0; i < m; ++i) hosts += decision.x(i, k);
      require(hosts <= 1, t, "service " + std::to_string(k) + " has more than one host");
      require((hosts == 1) == decision.host[k].has_value(), t, "decision matrix/host mismatch");
      if (!decision.host[k]) continue;
      const std::size_t h = *decision.host[k];
      require(cfg.servers[h].cached[k] != 0, t,
              "service " + std::to_string(k) + " hosted on non-caching server");
      arrivals(h, k) = volume;
      host_arrivals[h] += volume;
      row.offloaded += volume;
      ++row.assigned_services;
    }
    for (std::size_t k : decision.unassigned) row.deferred += demand.service_volume(k);
    row.unassigned_services = decision.unassigned.size();
    row.rejected = std::accumulate(demand.rejected.begin(), demand.rejected.end(), Bits{0});
    row.flags.single_host = !decision.unassigned.empty();

    // Unassigned demand is neither moved nor processed this slot.
    const SlotDemand handled = without_services(cfg, demand, decision.unassigned);
    row.cost = evaluate_cost(CostInputs{cfg, handled, ctx, rate, waits}, decision.binary());
    row.flags.energy_cap = row.cost.energy_cap_violated;
    row.flags.delay_cap = row.cost.delay_cap_violated;

    const std::vector<Bits> before = queues.totals();
    std::vector<Bits> service(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& spec = cfg.servers[i];
      require(before[i] + host_arrivals[i] <= spec.max_queue, t,
              "headroom guard broken at server " + std::to_string(i));
      require(host_arrivals[i] <= spec.max_arrival, t,
              "arrival cap broken at server " + std::to_string(i));
      service[i] = service_amount(spec.max_service_rate, before[i], host_arrivals[i]);
      row.flags.headroom |= host_arrivals[i] > spec.max_queue - before[i];
      row.flags.headroom_service |= spec.max_queue - before[i] > service[i];
      row.flags.service_cap |= service[i] > spec.max_service_rate;

      std::vector<Bits> incoming(k_count);
      for (std::size_t k = 0; k < k_count; ++k) incoming[k] = arrivals(i, k);
      row.served += queues.advance(i, service[i], incoming);
      row.arrivals += host_arrivals[i];

      const Bits expected =
          queue_update(before[i], service[i], host_arrivals[i], spec.max_service_rate);
      require(queues.total(i) == expected, t,
              "per-service update disagrees with aggregate law at server " + std::to_string(i));
      require(queues.total(i) >= before[i] + host_arrivals[i] - service[i], t,
              "telescoping inequality broken at server " + std::to_string(i));
      for (std::size_t k = 0; k < k_count; ++k) {
        require(queues.at(i, k) >= 0, t, "negative backlog");
      }
      row.flags.queue_cap |= queues.total(i) > spec.max_queue;
    }

    row.queue = queues.totals();
    row.queue_total = std::accumulate(row.queue.begin(), row.queue.end(), Bits{0});

    auto& ly = row.lyapunov;
    ly.value = lyapunov_value(row.queue);
    ly.drift = drift(before, row.queue);
    ly.bound_b = bound_b;
    ly.drift_plus_penalty = drift_plus_penalty(ly.drift, cfg.control_v, row.cost.cost);
    ly.drift_bound = drift_upper_bound(bound_b, before, host_arrivals, service);
    ly.penalty_bound =
        penalty_upper_bound(bound_b, cfg.control_v, row.cost.cost, before, host_arrivals);
    require(within_bound(ly.drift, ly.drift_bound), t, "drift exceeds B + sum Q(A - mu)");
    require(within_bound(ly.drift_plus_penalty, ly.penalty_bound), t,
            "drift-plus-penalty exceeds B + V*Cost + sum Q*A");

    record.physics.min_rate_bps = std::min(record.physics.min_rate_bps, rate);
    record.physics.peak_slot_volume =
        std::max(record.physics.peak_slot_volume, demand.total_volume());

    previous_requests = demand.requests;
    deferred = decision.unassigned;

    if (options.on_slot) options.on_slot(row);
    record.rows.push_back(std::move(row));
  }

  record.physics.min_link_bits_per_slot = record.physics.min_rate_bps * cfg.slot_duration_s;
  record.physics.feasible = static_cast<double>(record.physics.peak_slot_volume) <=
                            record.physics.min_link_bits_per_slot;
  record.summary = summarize(record.rows, options.stabilization);
  return record;
}

std::optional<std::int64_t> stabilization_slot(std::span<const double> series,
                                               std::size_t window, double tolerance) {
  if (window < 2) throw PreconditionError("stabilization window must be >= 2");
  const std::size_t n = series.size();
  if (n < 2 * window) return std::nullopt;

  // avg[j] is the mean of series[j, j + window), i.e. the moving average at
  // slot j + window.
  std::vector<double> avg(n - window + 1);
  double sum = std::accumulate(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(window), 0.0);
  avg[0] = sum / static_cast<double>(window);
  for (std::size_t j = 1; j < avg.size(); ++j) {
    sum += series[j + window - 1] - series[j - 1];
    avg[j] = sum / static_cast<double>(window);
  }

  std::vector<double> tail_max(avg.size()), tail_min(avg.size());
  tail_max.back() = tail_min.back() = avg.back();
  for (std::size_t j = avg.size() - 1; j-- > 0;) {
    tail_max[j] = std::max(avg[j], tail_max[j + 1]);
    tail_min[j] = std::min(avg[j], tail_min[j + 1]);
  }

  // At least `window` further slots must remain after the candidate.
  for (std::size_t j = 0; j + window < avg.size(); ++j) {
    const double band = tolerance * std::max(std::abs(avg[j]), 1e-12);
    if (tail_max[j] - avg[j] <= band && avg[j] - tail_min[j] <= band) {
      return static_cast<std::int64_t>(j + window);
    }
  }
  return std::nullopt;
}

std::vector<double> queue_total_series(std::span<const SlotMetrics> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(static_cast<double>(r.queue_total));
  return out;
}

RunSummary summarize(std::span<const SlotMetrics> rows, const StabilizationParams& params) {
  RunSummary s;
  if (rows.empty()) return s;
  double cost = 0.0;
  double queue = 0.0;
  for (const auto& r : rows) {
    cost += r.cost.cost;
    queue += static_cast<double>(r.queue_total);
    s.total_offloaded += r.offloaded;
  }
  const auto n = static_cast<double>(rows.size());
  s.mean_cost = cost / n;
  s.mean_queue_total = queue / n;
  const std::vector<double> series = queue_total_series(rows);
  s.stabilization_slot = stabilization_slot(series, params.window, params.tolerance);
  return s;
}

}  // namespace ldso
