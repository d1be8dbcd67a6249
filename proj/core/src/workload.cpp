#include "ldso/workload.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ldso/rng.hpp"

namespace ldso {

Bits SlotDemand::service_volume(std::size_t k) const {
  Bits v = 0;
  for (std::size_t i = 0; i < bits.rows(); ++i) v += bits(i, k);
  return v;
}

Bits SlotDemand::total_volume() const {
  return std::accumulate(totals.begin(), totals.end(), Bits{0});
}

void SlotDemand::refresh(const std::vector<Bits>& sizes) {
  for (std::size_t i = 0; i < requests.rows(); ++i) {
    Bits sum = 0;
    for (std::size_t k = 0; k < requests.cols(); ++k) {
      bits(i, k) = requests(i, k) * sizes[k];
      sum += bits(i, k);
    }
    totals[i] = sum;
  }
}

SlotDemand empty_demand(std::size_t servers, std::size_t services, std::int64_t t) {
  SlotDemand d;
  d.t = t;
  d.probabilities.assign(services, services ? 1.0 / static_cast<double>(services) : 0.0);
  d.requests = Matrix<std::int64_t>(servers, services, 0);
  d.bits = Matrix<Bits>(servers, services, 0);
  d.totals.assign(servers, 0);
  d.rejected.assign(servers, 0);
  return d;
}

namespace {

std::vector<double> zipf_weights(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = std::pow(static_cast<double>(r + 1), -exponent);
  return w;
}

void normalize(std::vector<double>& p) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= sum;
}

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

std::vector<double> request_probabilities(const RequestModel& model, std::size_t service_count,
                                          std::int64_t t) {
  if (service_count == 0) return {};
  const auto k_count = static_cast<std::int64_t>(service_count);
  const std::vector<double> w = zipf_weights(service_count, model.zipf_exponent);
  std::vector<double> p(service_count);

  switch (model.kind) {
    case RequestKind::static_zipf:
      p = w;
      break;
    case RequestKind::rotating_zipf: {
      // Popularity ranks shift by one position every period/K slots.
      const std::int64_t phase = positive_mod(t, model.rotation_period);
      const std::int64_t shift = phase * k_count / model.rotation_period;
      for (std::int64_t k = 0; k < k_count; ++k) {
        p[static_cast<std::size_t>(k)] =
            w[static_cast<std::size_t>(positive_mod(k + shift, k_count))];
      }
      break;
    }
    case RequestKind::sinusoidal: {
      const double phase = 2.0 * std::numbers::pi *
                           static_cast<double>(positive_mod(t, model.rotation_period)) /
                           static_cast<double>(model.rotation_period);
      for (std::int64_t k = 0; k < k_count; ++k) {
        const double offset =
            2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(k_count);
        p[static_cast<std::size_t>(k)] =
            w[static_cast<std::size_t>(k)] * (1.0 + model.modulation_depth * std::sin(phase + offset));
      }
      break;
    }
  }
  normalize(p);
  return p;
}

SlotDemand slot_demand(const SystemConfig& cfg, const RequestModel& model, std::int64_t t,
                       std::uint64_t seed) {
  const std::size_t m = cfg.server_count();
  const std::size_t k_count = cfg.service_count();
  SlotDemand d = empty_demand(m, k_count, t);
  d.probabilities = request_probabilities(model, k_count, t);

  Rng rng = make_rng(seed, Stream::demand, static_cast<std::uint64_t>(t));
  for (std::size_t i = 0; i < m; ++i) {
    const auto users = static_cast<double>(cfg.servers[i].covered_users);
    const double per_server_mean = model.poisson_mean > 0.0 ? model.poisson_mean : users;
    for (std::size_t k = 0; k < k_count; ++k) {
      std::int64_t n = 0;
      if (model.mode == ArrivalMode::expectation) {
        // nearbyint honours the default round-to-nearest-even mode.
        n = static_cast<std::int64_t>(std::nearbyint(users * d.probabilities[k]));
      } else {
        const double mean = per_server_mean * d.probabilities[k];
        if (mean > 0.0) n = std::poisson_distribution<std::int64_t>(mean)(rng);
      }
      d.requests(i, k) = n;
    }
  }
  d.refresh(cfg.catalog.sizes);

  apply_arrival_cap(cfg, d);
  return d;
}

void apply_arrival_cap(const SystemConfig& cfg, SlotDemand& d) {
  for (std::size_t i = 0; i < d.server_count(); ++i) {
    const Bits cap = cfg.servers[i].max_arrival;
    if (d.totals[i] <= cap) continue;
    const Bits before = d.totals[i];
    Bits after = 0;
    for (std::size_t k = 0; k < d.service_count(); ++k) {
      const auto scaled = static_cast<__int128>(d.requests(i, k)) * cap / before;
      d.requests(i, k) = static_cast<std::int64_t>(scaled);
      d.bits(i, k) = d.requests(i, k) * cfg.catalog.sizes[k];
      after += d.bits(i, k);
    }
    d.totals[i] = after;
    d.rejected[i] += before - after;
  }
}

}  // namespace ldso
