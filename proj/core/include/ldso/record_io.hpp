#pragma once

// On-disk run records: `<stem>.json` metadata plus `<stem>.csv` with one row
// per slot. The CSV column order below is a stable contract for downstream
// plotting; add columns only at the end (before the per-server q_ block).

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldso/engine.hpp"

namespace ldso {

/// Fixed columns, followed by q_0 .. q_{M-1} (end-of-slot backlog per server).
const std::vector<std::string>& fixed_columns();
std::vector<std::string> csv_columns(std::size_t server_count);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

void write_csv_header(std::ostream& out, std::size_t server_count);
void write_csv_row(std::ostream& out, const SlotMetrics& row);

/// Streams rows to a CSV file, flushing every `batch` rows.
class CsvSink {
 public:
  CsvSink(const std::filesystem::path& path, std::size_t server_count, std::size_t batch = 256);
  void append(const SlotMetrics& row);
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t batch_;
  std::size_t pending_ = 0;
};

nlohmann::json summary_json(const RunSummary& summary, const StabilizationParams& params);

/// Self-describing metadata: engine version, hash, seed, policy, the full
/// resolved config, summary, physics report and the CSV column list.
nlohmann::json metadata_json(const RunRecord& record, const SystemConfig& cfg,
                             const StabilizationParams& params);

/// Writes `<dir>/<stem>.json` and `<dir>/<stem>.csv`. Keys of `extra` are
/// merged into the metadata object.
void write_record(const std::filesystem::path& dir, const std::string& stem,
                  const RunRecord& record, const SystemConfig& cfg,
                  const StabilizationParams& params,
                  const nlohmann::json& extra = nlohmann::json::object());

/// Reads rows back from a run CSV. Only fields present as columns are
/// filled. Throws std::runtime_error on a malformed file.
std::vector<SlotMetrics> read_csv_rows(const std::filesystem::path& path);

}  // namespace ldso
