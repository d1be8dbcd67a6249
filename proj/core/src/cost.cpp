#include "ldso/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ldso {

CollaborationContext make_collaboration_context(const SystemConfig& cfg,
                                                const Matrix<int>& server_hops) {
  const std::size_t m = cfg.server_count();
  const std::size_t k_count = cfg.service_count();
  CollaborationContext ctx;
  ctx.providers.assign(k_count, 0);
  ctx.hops.assign(k_count, 0);
  ctx.hit_probability.assign(m, 0.0);

  for (std::size_t i = 0; i < m; ++i) {
    ctx.hit_probability[i] =
        static_cast<double>(cfg.servers[i].cached_count()) / static_cast<double>(k_count);
    for (std::size_t k = 0; k < k_count; ++k) ctx.providers[k] += cfg.servers[i].cached[k];
  }

  for (std::size_t k = 0; k < k_count; ++k) {
    if (cfg.hop_model == HopModel::provider_count || ctx.providers[k] == 0) {
      ctx.hops[k] = std::max<std::int64_t>(ctx.providers[k] - 1, 0);
      continue;
    }
    std::int64_t worst = 0;
    for (std::size_t i = 0; i < m; ++i) {
      std::int64_t nearest = std::numeric_limits<std::int64_t>::max();
      for (std::size_t p = 0; p < m; ++p) {
        if (!cfg.servers[p].cached[k]) continue;
        const int h = server_hops(i, p);
        nearest = std::min<std::int64_t>(nearest, h < 0 ? 2 : h);
      }
      worst = std::max(worst, nearest);
    }
    ctx.hops[k] = worst;
  }
  return ctx;
}

double energy_device_to_server(const SlotDemand& demand, double e_u) {
  double sum = 0.0;
  for (std::size_t i = 0; i < demand.bits.rows(); ++i) {
    for (std::size_t k = 0; k < demand.bits.cols(); ++k) {
      sum += static_cast<double>(demand.bits(i, k)) * e_u;
    }
  }
  return sum;
}

double energy_server_to_server(const SlotDemand& demand, const DecisionMatrix& x,
                               const CollaborationContext& ctx, double e_s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < demand.bits.rows(); ++i) {
    for (std::size_t k = 0; k < demand.bits.cols(); ++k) {
      if (x(i, k)) continue;
      sum += static_cast<double>(demand.bits(i, k)) * e_s * static_cast<double>(ctx.hops[k]);
    }
  }
  return sum;
}

double energy_processing(const SlotDemand& demand, const DecisionMatrix& x,
                         const CollaborationContext& ctx, double e_p,
                         ProcessingEnergyModel model) {
  double sum = 0.0;
  for (std::size_t i = 0; i < demand.bits.rows(); ++i) {
    const double p_c = ctx.hit_probability[i];
    const double p_nc = ctx.miss_probability(i);
    for (std::size_t k = 0; k < demand.bits.cols(); ++k) {
      const double volume = model == ProcessingEnergyModel::total_arrival
                                ? static_cast<double>(demand.totals[i])
                                : static_cast<double>(demand.bits(i, k));
      const double share = x(i, k) ? p_c : p_nc * static_cast<double>(ctx.hops[k]);
      sum += e_p * volume * share;
    }
  }
  return sum;
}

double signal_to_noise(double tx_power_w, double gain_linear, double noise_power_w) {
  if (!(noise_power_w > 0.0)) throw PreconditionError("noise power must be positive");
  return tx_power_w * gain_linear / noise_power_w;
}

double channel_rate(double bandwidth_hz, double snr) {
  if (snr < 0.0 || std::isnan(snr)) throw PreconditionError("SNR must be nonnegative");
  return bandwidth_hz * std::log2(1.0 + snr);
}

double delay_communication(const SlotDemand& demand, double rate_bps) {
  const Bits volume = demand.total_volume();
  if (volume == 0) return 0.0;
  if (!(rate_bps > 0.0)) {
    throw LinkOutage("link outage: rate is zero with " + std::to_string(volume) +
                     " bits pending");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < demand.bits.rows(); ++i) {
    for (std::size_t k = 0; k < demand.bits.cols(); ++k) {
      sum += static_cast<double>(demand.bits(i, k)) / rate_bps;
    }
  }
  return sum;
}

double mm1_wait(double service_bps, double arrival_bps) {
  if (service_bps < 0.0 || arrival_bps < 0.0) {
    throw PreconditionError("M/M/1 rates must be nonnegative");
  }
  if (arrival_bps >= service_bps) {
    throw Mm1Overload("M/M/1 overload: arrivals " + std::to_string(arrival_bps) +
                      " >= service " + std::to_string(service_bps));
  }
  return 1.0 / (service_bps - arrival_bps);
}

double mm1_arrival_bps(const SystemConfig& cfg, const SlotDemand& demand, std::size_t i,
                       std::size_t k) {
  const double per_slot = static_cast<double>(demand.requests(i, k)) *
                          cfg.catalog.per_user_intensity[k] *
                          static_cast<double>(cfg.catalog.sizes[k]);
  return per_slot / cfg.slot_duration_s;
}

Matrix<double> mm1_waits(const SystemConfig& cfg, const SlotDemand& demand) {
  const std::size_t m = cfg.server_count();
  const std::size_t k_count = cfg.service_count();
  Matrix<double> waits(m, k_count, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double service =
        static_cast<double>(cfg.servers[i].max_service_rate) / cfg.slot_duration_s;
    for (std::size_t k = 0; k < k_count; ++k) {
      const double arrival = mm1_arrival_bps(cfg, demand, i, k);
      waits(i, k) = arrival < service ? 1.0 / (service - arrival)
                                      : std::numeric_limits<double>::infinity();
    }
  }
  return waits;
}

double delay_computation(const SlotDemand& demand, const DecisionMatrix& x,
                         const CollaborationContext& ctx, const Matrix<double>& waits) {
  double sum = 0.0;
  for (std::size_t i = 0; i < demand.requests.rows(); ++i) {
    const double p_c = ctx.hit_probability[i];
    const double p_nc = ctx.miss_probability(i);
    for (std::size_t k = 0; k < demand.requests.cols(); ++k) {
      if (demand.requests(i, k) == 0) continue;
      const double share = x(i, k) ? p_c : static_cast<double>(ctx.hops[k]) * p_nc;
      if (share == 0.0) continue;
      if (std::isinf(waits(i, k))) {
        throw Mm1Overload("M/M/1 overload at server " + std::to_string(i) + ", service " +
                          std::to_string(k));
      }
      sum += share * waits(i, k);
    }
  }
  return sum;
}

CostBreakdown slot_cost(double e_c1, double e_c2, double e_p, double t_c, double t_p,
                        double theta, double energy_cap, double delay_cap) {
  if (theta < 0.0 || theta > 1.0) throw PreconditionError("theta must lie in [0,1]");
  CostBreakdown b;
  b.e_c1 = e_c1;
  b.e_c2 = e_c2;
  b.e_p = e_p;
  b.t_c = t_c;
  b.t_p = t_p;
  b.energy_total = e_c1 + e_c2 + e_p;
  b.delay_total = t_c + t_p;
  b.cost = theta * b.energy_total + (1.0 - theta) * b.delay_total;
  b.energy_cap_violated = energy_cap > 0.0 && b.energy_total > energy_cap;
  b.delay_cap_violated = delay_cap > 0.0 && b.delay_total > delay_cap;
  return b;
}

CostBreakdown evaluate_cost(const CostInputs& in, const DecisionMatrix& x) {
  const auto& e = in.cfg.energy;
  return slot_cost(energy_device_to_server(in.demand, e.device_to_server),
                   energy_server_to_server(in.demand, x, in.ctx, e.server_to_server),
                   energy_processing(in.demand, x, in.ctx, e.processing, in.cfg.processing_energy),
                   delay_communication(in.demand, in.rate_bps),
                   delay_computation(in.demand, x, in.ctx, in.waits), in.cfg.weight_theta,
                   in.cfg.energy_cap_j, in.cfg.delay_cap_s);
}

double local_energy_term(const CostInputs& in, std::size_t i, std::size_t k) {
  const auto& e = in.cfg.energy;
  const double received = static_cast<double>(in.demand.bits(i, k));
  const double volume = in.cfg.processing_energy == ProcessingEnergyModel::total_arrival
                            ? static_cast<double>(in.demand.totals[i])
                            : received;
  return received * e.device_to_server + e.processing * volume * in.ctx.hit_probability[i];
}

double local_delay_term(const CostInputs& in, std::size_t i, std::size_t k) {
  const double received = static_cast<double>(in.demand.bits(i, k));
  double term = received > 0.0 ? received / in.rate_bps : 0.0;
  if (in.demand.requests(i, k) > 0 && in.ctx.hit_probability[i] > 0.0) {
    term += in.ctx.hit_probability[i] * in.waits(i, k);
  }
  return term;
}

}  // namespace ldso
