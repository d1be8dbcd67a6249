#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "ldso/config_io.hpp"
#include "ldso/engine.hpp"
#include "ldso/policies.hpp"

namespace {

ldso::MatchingProblem random_problem(std::size_t m, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> key(0.0, 100.0);
  std::uniform_int_distribution<ldso::Bits> load(1, 200);
  ldso::MatchingProblem p;
  p.servers = m;
  p.services = k;
  p.key = ldso::Matrix<double>(m, k);
  p.eligible = ldso::Matrix<std::uint8_t>(m, k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      p.key(i, j) = key(rng);
      p.eligible(i, j) = rng() % 4 != 0;
    }
  }
  for (std::size_t j = 0; j < k; ++j) p.load.push_back(load(rng));
  p.requester.assign(k, 0);
  p.backlog.assign(m, 0);
  p.max_queue.assign(m, 4000);
  p.max_arrival.assign(m, 600);
  return p;
}

ldso::SystemConfig preset() {
  const std::filesystem::path path = std::string(LDSO_SOURCE_DIR) + "/presets/default.json";
  return ldso::parse_experiment(ldso::read_json_file(path), path.parent_path()).config;
}

void BM_LdsoMatch(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto p = random_problem(m, 10, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ldso::ldso_match(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LdsoMatch)->RangeMultiplier(2)->Range(4, 256)->Complexity();

void BM_OracleMatch(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto p = random_problem(3, k, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ldso::oracle_match(p));
}
BENCHMARK(BM_OracleMatch)->DenseRange(2, 8, 2);

void BM_RunPresetSlots(benchmark::State& state) {
  auto cfg = preset();
  cfg.slot_count = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(ldso::run(cfg, ldso::PolicyKind::ldso, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunPresetSlots)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
