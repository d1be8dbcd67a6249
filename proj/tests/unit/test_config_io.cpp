#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ldso/config_io.hpp"
#include "oracles.hpp"

namespace {

using nlohmann::json;

json preset_doc() { return ldso::read_json_file(fixture::preset_path()); }

std::filesystem::path preset_dir() {
  return std::filesystem::path(fixture::preset_path()).parent_path();
}

ldso::SystemConfig parse(const json& doc) {
  return ldso::parse_experiment(doc, preset_dir()).config;
}

json explicit_doc() {
  return json::parse(R"({
    "servers": [
      {"id": 0, "cache_capacity": 30, "cached_services": [1, 1], "max_service_rate": 500,
       "max_arrival": 900, "max_queue": 2000, "covered_users": 10, "position": [0, 0]},
      {"cache_capacity": 30, "cached_services": [0, 1], "max_service_rate": 500,
       "max_arrival": 900, "max_queue": 2000, "covered_users": 5, "position": [20, 0]}
    ],
    "catalog": {"sizes": [10, 12], "per_user_intensity": [0.2, 0.3]},
    "slot_count": 20
  })");
}

TEST(Parse, Preset) {
  const auto exp = ldso::parse_experiment(preset_doc(), preset_dir());
  const auto& cfg = exp.config;
  EXPECT_EQ(cfg.server_count(), 10u);
  EXPECT_EQ(cfg.service_count(), 10u);
  EXPECT_EQ(cfg.control_v, 1000.0);
  EXPECT_EQ(cfg.slot_count, 1000);
  EXPECT_EQ(exp.policy, ldso::PolicyKind::ldso);
  EXPECT_TRUE(ldso::validate_config(cfg).ok()) << ldso::validate_config(cfg).to_string();
  for (const auto& s : cfg.servers) {
    EXPECT_GE(s.cache_capacity, 120);
    EXPECT_LE(s.cache_capacity, 170);
    EXPECT_EQ(s.covered_users, 50);
  }
}

TEST(Parse, TopologyIsDeterministic) {
  EXPECT_EQ(ldso::config_hash(parse(preset_doc())), ldso::config_hash(parse(preset_doc())));
  auto doc = preset_doc();
  doc["topology"]["seed"] = 12;
  EXPECT_NE(ldso::config_hash(parse(doc)), ldso::config_hash(parse(preset_doc())));
}

TEST(Parse, ExplicitServers) {
  const auto cfg = parse(explicit_doc());
  ASSERT_EQ(cfg.server_count(), 2u);
  EXPECT_EQ(cfg.servers[1].id, 1u);
  EXPECT_EQ(cfg.servers[1].cached, (std::vector<std::uint8_t>{0, 1}));
  EXPECT_EQ(cfg.servers[1].position, (ldso::Position{20, 0}));
  EXPECT_EQ(cfg.slot_count, 20);
  EXPECT_TRUE(ldso::validate_config(cfg).ok()) << ldso::validate_config(cfg).to_string();
}

TEST(Parse, Rejections) {
  auto unknown = preset_doc();
  unknown["control_v_typo"] = 3;
  EXPECT_THROW(parse(unknown), ldso::ConfigError);

  auto nested = preset_doc();
  nested["radio"]["gain"] = 3;
  EXPECT_THROW(parse(nested), ldso::ConfigError);

  auto bad_enum = preset_doc();
  bad_enum["hop_model"] = "shortest";
  EXPECT_THROW(parse(bad_enum), ldso::ConfigError);

  auto bad_type = preset_doc();
  bad_type["slot_count"] = "many";
  EXPECT_THROW(parse(bad_type), ldso::ConfigError);

  auto both = explicit_doc();
  both["topology"] = preset_doc()["topology"];
  EXPECT_THROW(parse(both), ldso::ConfigError);

  auto bad_policy = preset_doc();
  bad_policy["policy"] = "dsara";
  EXPECT_THROW(parse(bad_policy), ldso::ConfigError);

  EXPECT_THROW(ldso::read_json_file("/nonexistent/config.json"), ldso::ConfigError);
}

TEST(Parse, SemanticErrorsLeftToValidation) {
  auto doc = preset_doc();
  doc["weight_theta"] = 1.5;
  const auto report = ldso::validate_config(parse(doc));
  ASSERT_FALSE(report.ok());
  EXPECT_NE(report.to_string().find("weight_theta"), std::string::npos);
}

TEST(Override, ScalarsArraysAndStrings) {
  auto doc = preset_doc();
  ldso::apply_override(doc, "control_V=500");
  ldso::apply_override(doc, "catalog.sizes.0", "99");
  ldso::apply_override(doc, "request_model.kind=sinusoidal");
  ldso::apply_override(doc, "topology.cache_capacity=[100,110]");
  const auto cfg = parse(doc);
  EXPECT_EQ(cfg.control_v, 500.0);
  EXPECT_EQ(cfg.catalog.sizes[0], 99);
  EXPECT_EQ(cfg.request_model.kind, ldso::RequestKind::sinusoidal);
  for (const auto& s : cfg.servers) {
    EXPECT_GE(s.cache_capacity, 100);
    EXPECT_LE(s.cache_capacity, 110);
  }
  EXPECT_ANY_THROW(ldso::apply_override(doc, "no_equals_sign"));
}

TEST(Override, UnknownKeyCaughtByParse) {
  auto doc = preset_doc();
  ldso::apply_override(doc, "radio.bandwidth=1");
  EXPECT_THROW(parse(doc), ldso::ConfigError);
}

TEST(Serialize, RoundTripKeepsHash) {
  for (const auto& doc : {preset_doc(), explicit_doc()}) {
    const auto cfg = parse(doc);
    const auto resolved = ldso::to_json(cfg);
    EXPECT_FALSE(resolved.contains("topology"));
    const auto back = ldso::parse_experiment(resolved).config;
    EXPECT_EQ(ldso::config_hash(back), ldso::config_hash(cfg));
    EXPECT_EQ(ldso::config_hash(cfg).size(), 16u);
  }
}

TEST(Parse, PositionsFile) {
  const auto dir = std::filesystem::temp_directory_path() / "ldso_test_positions";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "pos.csv");
    f << "id,x,y\n1,40,40\n0,10,10\n2,70,70\n";
  }
  auto doc = preset_doc();
  doc["topology"].erase("server_count");
  doc["topology"]["positions_file"] = "pos.csv";
  const auto cfg = ldso::parse_experiment(doc, dir).config;
  ASSERT_EQ(cfg.server_count(), 3u);
  EXPECT_EQ(cfg.servers[0].position, (ldso::Position{10, 10}));
  EXPECT_EQ(cfg.servers[1].position, (ldso::Position{40, 40}));

  doc["topology"]["positions_file"] = "missing.csv";
  EXPECT_THROW(ldso::parse_experiment(doc, dir), ldso::ConfigError);
  std::filesystem::remove_all(dir);
}

}  // namespace
