#include "ldso/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ldso/rng.hpp"

namespace ldso {

std::optional<SweepAxis> parse_axis(std::string_view name) {
  if (name == "control_V" || name == "control_v") return SweepAxis::control_v;
  if (name == "poisson_mean" || name == "request_model.poisson_mean") {
    return SweepAxis::poisson_mean;
  }
  if (name == "weight_theta") return SweepAxis::weight_theta;
  if (name == "Q_max" || name == "max_queue") return SweepAxis::max_queue;
  return std::nullopt;
}

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::control_v: return "control_V";
    case SweepAxis::poisson_mean: return "poisson_mean";
    case SweepAxis::weight_theta: return "weight_theta";
    case SweepAxis::max_queue: return "max_queue";
  }
  return "unknown";
}

SystemConfig with_axis_value(const SystemConfig& base, SweepAxis axis, double value) {
  SystemConfig cfg = base;
  switch (axis) {
    case SweepAxis::control_v:
      cfg.control_v = value;
      break;
    case SweepAxis::poisson_mean:
      cfg.request_model.poisson_mean = value;
      break;
    case SweepAxis::weight_theta:
      cfg.weight_theta = value;
      break;
    case SweepAxis::max_queue:
      for (auto& s : cfg.servers) s.max_queue = static_cast<Bits>(std::llround(value));
      break;
  }
  return cfg;
}

std::uint64_t sweep_run_seed(std::uint64_t base_seed, std::size_t value_index,
                             std::size_t policy_index) {
  return derive_seed({base_seed, value_index, policy_index});
}

std::vector<SweepCell> sweep(const SystemConfig& base, SweepAxis axis,
                             std::span<const double> values,
                             std::span<const PolicyKind> policies,
                             std::span<const std::uint64_t> seeds, const SweepOptions& options) {
  std::vector<SweepCell> cells;
  for (std::size_t v = 0; v < values.size(); ++v) {
    for (std::size_t p = 0; p < policies.size(); ++p) {
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        SweepCell c;
        c.value_index = v;
        c.value = values[v];
        c.policy_index = p;
        c.policy = policies[p];
        c.seed_index = s;
        c.base_seed = seeds[s];
        c.run_seed = sweep_run_seed(seeds[s], v, p);
        cells.push_back(std::move(c));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex sink;
  auto worker = [&] {
    for (std::size_t idx = next++; idx < cells.size(); idx = next++) {
      SweepCell& c = cells[idx];
      try {
        c.record = run(with_axis_value(base, axis, c.value), c.policy, c.run_seed, options.run);
      } catch (const std::exception& e) {
        c.error = e.what();
      }
      if (options.on_complete) {
        std::lock_guard lock(sink);
        options.on_complete(c);
      }
    }
  };

  unsigned jobs = options.jobs ? options.jobs : std::thread::hardware_concurrency();
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  return cells;
}

}  // namespace ldso
