#pragma once

// Typed configuration and state values for the multi-server offloading model,
// plus configuration validation.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldso {

/// Data volumes are whole bits.
using Bits = std::int64_t;

/// Raised when a caller breaks an operation's documented precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised by the engine when a per-slot invariant fails during a run.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::int64_t slot, const std::string& what)
      : std::runtime_error("slot " + std::to_string(slot) + ": " + what),
        slot_(slot) {}
  std::int64_t slot() const noexcept { return slot_; }

 private:
  std::int64_t slot_;
};

/// Dense row-major matrix indexed (server, service).
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

struct ServiceCatalog {
  std::vector<Bits> sizes;                 // b_k
  std::vector<double> per_user_intensity;  // requests per slot per user, per k

  std::size_t count() const noexcept { return sizes.size(); }
};

struct EdgeServerSpec {
  std::size_t id = 0;
  Bits cache_capacity = 0;
  std::vector<std::uint8_t> cached;  // placement f_i^k, one flag per service
  Bits max_service_rate = 0;         // bits per slot
  Bits max_arrival = 0;              // bits per slot
  Bits max_queue = 0;                // bits
  std::int64_t covered_users = 0;
  Position position;

  std::size_t cached_count() const noexcept {
    std::size_t n = 0;
    for (auto f : cached) n += f != 0;
    return n;
  }
};

struct RadioConfig {
  double bandwidth_hz = 40e6;
  double tx_power_min_w = 0.01;
  double tx_power_max_w = 1.0;
  double channel_gain_db = 20.0;
  /// Standard deviation of per-slot log-normal fading; 0 keeps the gain fixed.
  double fading_sigma_db = 0.0;
  double noise_power_w = 1.0;
};

struct EnergyConfig {
  double device_to_server = 1e-9;  // J per bit
  double server_to_server = 1e-9;  // J per bit per hop
  double processing = 1e-9;        // J per bit
};

enum class RequestKind { static_zipf, rotating_zipf, sinusoidal };
enum class ArrivalMode { expectation, stochastic };

struct RequestModel {
  RequestKind kind = RequestKind::rotating_zipf;
  ArrivalMode mode = ArrivalMode::expectation;
  double zipf_exponent = 0.8;
  std::int64_t rotation_period = 200;
  double modulation_depth = 0.5;
  /// Mean requests per server per slot in stochastic mode; when zero the
  /// mean falls back to the covered user count.
  double poisson_mean = 0.0;
};

/// How the hop count H_k of a multi-hop delivery is derived.
enum class HopModel {
  provider_count,  // H_k = (number of servers caching k) - 1
  graph_radius,    // H_k = worst nearest-provider hop distance on the SBS graph
};

/// Whether processing energy multiplies total server arrivals A_i(t) inside
/// the per-service sum, or only the service's own arrivals A_i^k(t).
enum class ProcessingEnergyModel { total_arrival, per_service };

struct SystemConfig {
  std::vector<EdgeServerSpec> servers;
  ServiceCatalog catalog;
  RadioConfig radio;
  EnergyConfig energy;
  double control_v = 1000.0;
  double weight_theta = 0.5;
  std::int64_t slot_count = 1000;
  double slot_duration_s = 1e-3;
  std::uint64_t seed = 1;
  double energy_cap_j = 1e12;
  double delay_cap_s = 1e12;
  RequestModel request_model;
  double user_range_m = 15.0;
  double server_range_m = 30.0;
  HopModel hop_model = HopModel::provider_count;
  ProcessingEnergyModel processing_energy = ProcessingEnergyModel::total_arrival;
  /// Users that fell outside every SBS range during topology generation.
  std::int64_t orphan_users = 0;

  std::size_t server_count() const noexcept { return servers.size(); }
  std::size_t service_count() const noexcept { return catalog.count(); }
};

struct Violation {
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string to_string() const;
};

/// Checks every model invariant. A passing config is accepted by all other
/// modules without further checks.
ValidationReport validate_config(const SystemConfig& cfg);

}  // namespace ldso
