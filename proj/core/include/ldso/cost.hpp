#pragma once

// Energy and delay components of the per-slot system cost
//   Cost(t) = theta * E_total(t) + (1 - theta) * T_total(t)
// with E_total = E^c1 + E^c2 + E^p and T_total = T^c + T^p.
//
// Server-indexed terms are indexed by the *receiving* server i: x_i^k = 1
// means i processes its own requests for k, x_i^k = 0 means they travel
// H_k hops to another provider.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ldso/domain.hpp"
#include "ldso/workload.hpp"

namespace ldso {

class LinkOutage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Mm1Overload : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using DecisionMatrix = Matrix<std::uint8_t>;

struct CollaborationContext {
  std::vector<std::int64_t> providers;  // O_k
  std::vector<std::int64_t> hops;       // H_k
  std::vector<double> hit_probability;  // P_c per server = cached count / K

  double miss_probability(std::size_t i) const { return 1.0 - hit_probability[i]; }
};

/// `server_hops` is only consulted for HopModel::graph_radius; entries of -1
/// (disconnected) count as two hops, one up to the macro BS and one down.
CollaborationContext make_collaboration_context(const SystemConfig& cfg,
                                                const Matrix<int>& server_hops);

struct CostBreakdown {
  double e_c1 = 0.0;  // device -> server, J
  double e_c2 = 0.0;  // server -> server, J
  double e_p = 0.0;   // processing, J
  double t_c = 0.0;   // communication, s
  double t_p = 0.0;   // computation, s
  double energy_total = 0.0;
  double delay_total = 0.0;
  double cost = 0.0;
  bool energy_cap_violated = false;
  bool delay_cap_violated = false;
};

double energy_device_to_server(const SlotDemand& demand, double e_u);

double energy_server_to_server(const SlotDemand& demand, const DecisionMatrix& x,
                               const CollaborationContext& ctx, double e_s);

double energy_processing(const SlotDemand& demand, const DecisionMatrix& x,
                         const CollaborationContext& ctx, double e_p,
                         ProcessingEnergyModel model = ProcessingEnergyModel::total_arrival);

/// P_u * h / noise. Throws PreconditionError when noise <= 0.
double signal_to_noise(double tx_power_w, double gain_linear, double noise_power_w);

/// Shannon rate B_w * log2(1 + snr), bits per second.
double channel_rate(double bandwidth_hz, double snr);

/// Total offloaded bits over one shared rate. Throws LinkOutage when the
/// rate is zero while demand exists.
double delay_communication(const SlotDemand& demand, double rate_bps);

/// M/M/1 mean wait 1 / (service - arrivals), both in bits per second.
/// Throws Mm1Overload when arrivals >= service.
double mm1_wait(double service_bps, double arrival_bps);

/// Bits per second offered to server i for service k: n_i^k * lambda^k * b_k
/// per slot, converted with the slot duration.
double mm1_arrival_bps(const SystemConfig& cfg, const SlotDemand& demand, std::size_t i,
                       std::size_t k);

/// Wait t_k for every (i, k) using server i's capacity as the M/M/1 service
/// rate. Overloaded pairs hold +infinity.
Matrix<double> mm1_waits(const SystemConfig& cfg, const SlotDemand& demand);

/// Sums only over (i, k) with requests; throws Mm1Overload if such a term
/// has an infinite wait.
double delay_computation(const SlotDemand& demand, const DecisionMatrix& x,
                         const CollaborationContext& ctx, const Matrix<double>& waits);

/// Weighted scalar and cap flags from the five components.
CostBreakdown slot_cost(double e_c1, double e_c2, double e_p, double t_c, double t_p,
                        double theta, double energy_cap = 0.0, double delay_cap = 0.0);

/// Everything needed to price one slot.
struct CostInputs {
  const SystemConfig& cfg;
  const SlotDemand& demand;
  const CollaborationContext& ctx;
  double rate_bps;
  const Matrix<double>& waits;
};

CostBreakdown evaluate_cost(const CostInputs& in, const DecisionMatrix& x);

/// (i, k) summands of E_total and T_total under x_i^k = 1. Summing either
/// over all (i, k) reproduces evaluate_cost with an all-ones decision.
double local_energy_term(const CostInputs& in, std::size_t i, std::size_t k);
double local_delay_term(const CostInputs& in, std::size_t i, std::size_t k);

}  // namespace ldso
