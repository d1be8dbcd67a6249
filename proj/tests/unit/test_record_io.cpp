#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "ldso/config_io.hpp"
#include "ldso/record_io.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(ldso::format_double(0.1), "0.1");
  EXPECT_EQ(ldso::format_double(2.0), "2");
  EXPECT_EQ(ldso::format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(ldso::format_double(-std::numeric_limits<double>::infinity()), "-inf");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e9, 1e9);
  for (int n = 0; n < 10000; ++n) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
    ASSERT_EQ(std::stod(ldso::format_double(v)), v);
  }
}

TEST(Columns, StableOrder) {
  const auto cols = ldso::csv_columns(3);
  ASSERT_GE(cols.size(), 5u);
  EXPECT_EQ(cols[0], "t");
  EXPECT_EQ(cols[1], "cost");
  EXPECT_EQ(cols[cols.size() - 3], "q_0");
  EXPECT_EQ(cols.back(), "q_2");
  EXPECT_EQ(cols.size(), ldso::fixed_columns().size() + 3);
  std::ostringstream header;
  ldso::write_csv_header(header, 3);
  EXPECT_EQ(header.str().substr(0, 7), "t,cost,");
  EXPECT_EQ(header.str().back(), '\n');
}

TEST(Record, CsvRoundTripKeepsSummary) {
  auto cfg = fixture::line_config(3, 4);
  cfg.slot_count = 120;
  cfg.request_model.mode = ldso::ArrivalMode::stochastic;
  cfg.request_model.poisson_mean = 30;
  const ldso::StabilizationParams params{20, 0.2};
  const auto rec = ldso::run(cfg, ldso::PolicyKind::ldso, 4, {params, {}});
  const auto dir = temp_dir("ldso_test_record");
  ldso::write_record(dir, "r", rec, cfg, params, {{"note", "x"}});

  const auto rows = ldso::read_csv_rows(dir / "r.csv");
  ASSERT_EQ(rows.size(), rec.rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    ASSERT_EQ(rows[t].t, rec.rows[t].t);
    ASSERT_EQ(rows[t].cost.cost, rec.rows[t].cost.cost);
    ASSERT_EQ(rows[t].lyapunov.drift, rec.rows[t].lyapunov.drift);
    ASSERT_EQ(rows[t].queue, rec.rows[t].queue);
    ASSERT_EQ(rows[t].offloaded, rec.rows[t].offloaded);
    ASSERT_EQ(rows[t].flags.single_host, rec.rows[t].flags.single_host);
  }
  const auto again = ldso::summarize(rows, params);
  EXPECT_EQ(again.mean_cost, rec.summary.mean_cost);
  EXPECT_EQ(again.mean_queue_total, rec.summary.mean_queue_total);
  EXPECT_EQ(again.stabilization_slot, rec.summary.stabilization_slot);

  const auto meta = ldso::read_json_file(dir / "r.json");
  EXPECT_EQ(meta.at("config_hash"), rec.config_hash);
  EXPECT_EQ(meta.at("seed"), 4);
  EXPECT_EQ(meta.at("policy"), "ldso");
  EXPECT_EQ(meta.at("slots"), 120);
  EXPECT_EQ(meta.at("note"), "x");
  EXPECT_EQ(meta.at("summary").at("mean_cost").get<double>(), rec.summary.mean_cost);
  EXPECT_EQ(meta.at("columns").size(), ldso::csv_columns(3).size());
  EXPECT_EQ(ldso::config_hash(ldso::parse_experiment(meta.at("config")).config), rec.config_hash);
  fs::remove_all(dir);
}

TEST(Record, WritesAreByteIdentical) {
  auto cfg = fixture::line_config(2, 3);
  const auto a = temp_dir("ldso_test_bytes_a");
  const auto b = temp_dir("ldso_test_bytes_b");
  ldso::write_record(a, "r", ldso::run(cfg, ldso::PolicyKind::ldso, 9), cfg, {});
  ldso::write_record(b, "r", ldso::run(cfg, ldso::PolicyKind::ldso, 9), cfg, {});
  EXPECT_EQ(slurp(a / "r.csv"), slurp(b / "r.csv"));
  EXPECT_EQ(slurp(a / "r.json"), slurp(b / "r.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Record, SinkMatchesDirectWrite) {
  auto cfg = fixture::line_config(2, 3);
  const auto rec = ldso::run(cfg, ldso::PolicyKind::ldso, 2);
  const auto dir = temp_dir("ldso_test_sink");
  {
    ldso::CsvSink sink(dir / "s.csv", 2, 7);
    for (const auto& r : rec.rows) sink.append(r);
    sink.close();
  }
  std::ostringstream direct;
  ldso::write_csv_header(direct, 2);
  for (const auto& r : rec.rows) ldso::write_csv_row(direct, r);
  EXPECT_EQ(slurp(dir / "s.csv"), direct.str());
  fs::remove_all(dir);
}

TEST(Record, MalformedCsvRejected) {
  const auto dir = temp_dir("ldso_test_bad_csv");
  {
    std::ofstream f(dir / "bad.csv");
    f << "t,cost\n0,1,2\n";
  }
  EXPECT_THROW(ldso::read_csv_rows(dir / "bad.csv"), std::runtime_error);
  fs::remove_all(dir);
}

}  // namespace
