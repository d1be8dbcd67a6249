#include "ldso/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ldso {

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (const auto& v : violations) out << v.path << ": " << v.message << '\n';
  return out.str();
}

namespace {

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  void require(bool condition, std::string path, std::string message) {
    if (!condition) report_.violations.push_back({std::move(path), std::move(message)});
  }

 private:
  ValidationReport& report_;
};

bool finite(double v) { return std::isfinite(v); }

}  // namespace

ValidationReport validate_config(const SystemConfig& cfg) {
  ValidationReport report;
  Checker check(report);

  const auto& cat = cfg.catalog;
  const std::size_t k_count = cat.count();
  check.require(k_count >= 1, "catalog.sizes", "at least one service required");
  check.require(cat.per_user_intensity.size() == k_count,
                "catalog.per_user_intensity",
                "expected " + std::to_string(k_count) + " entries, got " +
                    std::to_string(cat.per_user_intensity.size()));
  for (std::size_t k = 0; k < k_count; ++k) {
    check.require(cat.sizes[k] > 0, "catalog.sizes[" + std::to_string(k) + "]",
                  "service size must be positive");
  }
  double max_intensity = 0.0;
  for (std::size_t k = 0; k < cat.per_user_intensity.size(); ++k) {
    const double lam = cat.per_user_intensity[k];
    check.require(finite(lam) && lam >= 0.0,
                  "catalog.per_user_intensity[" + std::to_string(k) + "]",
                  "arrival intensity must be >= 0");
    if (finite(lam)) max_intensity = std::max(max_intensity, lam);
  }

  check.require(!cfg.servers.empty(), "servers", "at least one edge server required");
  for (std::size_t i = 0; i < cfg.servers.size(); ++i) {
    const auto& s = cfg.servers[i];
    const std::string base = "servers[" + std::to_string(i) + "]";
    check.require(s.id == i, base + ".id", "server ids must be 0..M-1 in order");
    check.require(s.cached.size() == k_count, base + ".cached_services",
                  "expected " + std::to_string(k_count) + " placement flags");
    Bits stored = 0;
    for (std::size_t k = 0; k < std::min(k_count, s.cached.size()); ++k) {
      check.require(s.cached[k] <= 1, base + ".cached_services",
                    "placement flags must be 0 or 1");
      if (s.cached[k]) stored += cat.sizes[k];
    }
    check.require(stored <= s.cache_capacity, base + ".cache_capacity",
                  "cache overflow: " + std::to_string(stored) + " > " +
                      std::to_string(s.cache_capacity));
    check.require(s.max_service_rate > 0, base + ".max_service_rate",
                  "max service rate must be positive");
    check.require(s.max_queue > 0, base + ".max_queue", "max queue must be positive");
    check.require(s.max_arrival >= 0, base + ".max_arrival", "max arrival must be >= 0");
    check.require(s.covered_users >= 0, base + ".covered_users",
                  "covered users must be >= 0");
    // Arrivals at a server never exceed max_arrival, so this keeps every
    // M/M/1 wait finite.
    check.require(static_cast<double>(s.max_service_rate) >
                      static_cast<double>(s.max_arrival) * max_intensity,
                  base + ".max_service_rate",
                  "M/M/1 overload possible: max_service_rate must exceed "
                  "max_arrival * max per-user intensity");
  }

  const auto& radio = cfg.radio;
  check.require(finite(radio.bandwidth_hz) && radio.bandwidth_hz > 0.0,
                "radio.bandwidth_hz", "bandwidth must be positive");
  check.require(finite(radio.noise_power_w) && radio.noise_power_w > 0.0,
                "radio.noise_power_w", "noise power must be positive");
  check.require(radio.tx_power_min_w >= 0.0 && radio.tx_power_min_w <= radio.tx_power_max_w &&
                    finite(radio.tx_power_max_w),
                "radio.tx_power_w", "transmit power range must satisfy 0 <= min <= max");
  check.require(finite(radio.channel_gain_db), "radio.channel_gain_db",
                "channel gain must be finite");
  check.require(finite(radio.fading_sigma_db) && radio.fading_sigma_db >= 0.0,
                "radio.fading_sigma_db", "fading sigma must be >= 0");

  const auto& e = cfg.energy;
  check.require(e.device_to_server >= 0.0, "energy.device_to_server", "must be >= 0");
  check.require(e.server_to_server >= 0.0, "energy.server_to_server", "must be >= 0");
  check.require(e.processing >= 0.0, "energy.processing", "must be >= 0");

  check.require(finite(cfg.control_v) && cfg.control_v >= 0.0, "control_V",
                "control_V must be >= 0");
  check.require(cfg.weight_theta >= 0.0 && cfg.weight_theta <= 1.0, "weight_theta",
                "weight_theta out of [0,1]");
  check.require(cfg.slot_count >= 1, "slot_count", "slot_count must be >= 1");
  check.require(finite(cfg.slot_duration_s) && cfg.slot_duration_s > 0.0,
                "slot_duration_s", "slot duration must be positive");
  check.require(cfg.energy_cap_j > 0.0, "energy_cap_j", "energy cap must be positive");
  check.require(cfg.delay_cap_s > 0.0, "delay_cap_s", "delay cap must be positive");
  check.require(cfg.user_range_m > 0.0, "user_range_m", "range must be positive");
  check.require(cfg.server_range_m > 0.0, "server_range_m", "range must be positive");

  const auto& rm = cfg.request_model;
  check.require(finite(rm.zipf_exponent) && rm.zipf_exponent >= 0.0,
                "request_model.zipf_exponent", "exponent must be >= 0");
  check.require(rm.rotation_period >= 1, "request_model.rotation_period",
                "period must be >= 1");
  check.require(rm.modulation_depth >= 0.0 && rm.modulation_depth < 1.0,
                "request_model.modulation_depth", "depth must lie in [0,1)");
  check.require(finite(rm.poisson_mean) && rm.poisson_mean >= 0.0,
                "request_model.poisson_mean", "mean must be >= 0");

  return report;
}

}  // namespace ldso
