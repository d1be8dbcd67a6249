#pragma once

// JSON configuration documents. A document either lists `servers`
// explicitly or carries a `topology` block that is resolved into servers
// (seeded PPP placement, random cache fill). Unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ldso/domain.hpp"
#include "ldso/policies.hpp"

namespace ldso {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Experiment {
  SystemConfig config;
  std::optional<PolicyKind> policy;
};

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Parses and resolves a document. `base_dir` anchors relative file paths
/// (the positions CSV). Throws ConfigError on unknown keys or bad types;
/// semantic checks are left to validate_config.
Experiment parse_experiment(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Sets `dotted.key.path` to `value`. The value is read as JSON when it
/// parses (numbers, booleans, arrays) and as a string otherwise. Numeric
/// path segments index arrays. Keys the schema does not know are caught by
/// parse_experiment.
void apply_override(nlohmann::json& doc, std::string_view dotted_key, std::string_view value);

/// Splits "key=value" and applies it.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Fully resolved document (explicit servers, no topology block).
nlohmann::json to_json(const SystemConfig& cfg);

/// FNV-1a 64 of the resolved document's compact dump, as 16 hex digits.
std::string config_hash(const SystemConfig& cfg);

}  // namespace ldso
