#include "ldso/record_io.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ldso/config_io.hpp"

namespace ldso {

using nlohmann::json;

namespace {

struct Column {
  std::string name;
  std::function<std::string(const SlotMetrics&)> get;
  std::function<void(SlotMetrics&, std::string_view)> set;
};

template <typename T>
T parse_number(std::string_view text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars does not accept a leading '+' or "inf" spelled by to_chars
    // on every library, so handle infinities explicitly.
    if (text == "inf") return std::numeric_limits<T>::infinity();
    if (text == "-inf") return -std::numeric_limits<T>::infinity();
  }
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::runtime_error("bad number '" + std::string(text) + "'");
  }
  return value;
}

template <typename T, typename Ref>
Column column(std::string name, Ref ref) {
  Column c;
  c.name = std::move(name);
  c.get = [ref](const SlotMetrics& r) {
    const T v = ref(const_cast<SlotMetrics&>(r));
    if constexpr (std::is_same_v<T, double>) {
      return format_double(v);
    } else if constexpr (std::is_same_v<T, bool>) {
      return std::string(v ? "1" : "0");
    } else {
      return std::to_string(v);
    }
  };
  c.set = [ref](SlotMetrics& r, std::string_view text) {
    if constexpr (std::is_same_v<T, bool>) {
      ref(r) = parse_number<int>(text) != 0;
    } else {
      ref(r) = parse_number<T>(text);
    }
  };
  return c;
}

#define LDSO_COL(type, name, expr) \
  column<type>(name, [](SlotMetrics& r) -> type& { return expr; })

const std::vector<Column>& columns() {
  static const std::vector<Column> cols = {
      LDSO_COL(std::int64_t, "t", r.t),
      LDSO_COL(double, "cost", r.cost.cost),
      LDSO_COL(double, "energy_total", r.cost.energy_total),
      LDSO_COL(double, "e_c1", r.cost.e_c1),
      LDSO_COL(double, "e_c2", r.cost.e_c2),
      LDSO_COL(double, "e_p", r.cost.e_p),
      LDSO_COL(double, "delay_total", r.cost.delay_total),
      LDSO_COL(double, "t_c", r.cost.t_c),
      LDSO_COL(double, "t_p", r.cost.t_p),
      LDSO_COL(Bits, "queue_total", r.queue_total),
      LDSO_COL(double, "lyapunov", r.lyapunov.value),
      LDSO_COL(double, "drift", r.lyapunov.drift),
      LDSO_COL(double, "drift_plus_penalty", r.lyapunov.drift_plus_penalty),
      LDSO_COL(double, "drift_bound", r.lyapunov.drift_bound),
      LDSO_COL(double, "penalty_bound", r.lyapunov.penalty_bound),
      LDSO_COL(double, "rate_bps", r.rate_bps),
      LDSO_COL(Bits, "arrivals", r.arrivals),
      LDSO_COL(Bits, "served", r.served),
      LDSO_COL(Bits, "offloaded", r.offloaded),
      LDSO_COL(Bits, "deferred", r.deferred),
      LDSO_COL(Bits, "rejected", r.rejected),
      LDSO_COL(std::size_t, "assigned_services", r.assigned_services),
      LDSO_COL(std::size_t, "unassigned_services", r.unassigned_services),
      LDSO_COL(bool, "viol_queue_cap", r.flags.queue_cap),
      LDSO_COL(bool, "viol_headroom", r.flags.headroom),
      LDSO_COL(bool, "viol_headroom_service", r.flags.headroom_service),
      LDSO_COL(bool, "viol_service_cap", r.flags.service_cap),
      LDSO_COL(bool, "viol_energy_cap", r.flags.energy_cap),
      LDSO_COL(bool, "viol_delay_cap", r.flags.delay_cap),
      LDSO_COL(bool, "viol_single_host", r.flags.single_host),
  };
  return cols;
}

#undef LDSO_COL

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& fixed_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : columns()) n.push_back(c.name);
    return n;
  }();
  return names;
}

std::vector<std::string> csv_columns(std::size_t server_count) {
  std::vector<std::string> names = fixed_columns();
  for (std::size_t i = 0; i < server_count; ++i) names.push_back("q_" + std::to_string(i));
  return names;
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_csv_header(std::ostream& out, std::size_t server_count) {
  const auto names = csv_columns(server_count);
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
}

void write_csv_row(std::ostream& out, const SlotMetrics& row) {
  bool first = true;
  for (const auto& c : columns()) {
    out << (first ? "" : ",") << c.get(row);
    first = false;
  }
  for (Bits q : row.queue) out << ',' << q;
  out << '\n';
}

CsvSink::CsvSink(const std::filesystem::path& path, std::size_t server_count, std::size_t batch)
    : out_(path, std::ios::binary), path_(path), batch_(batch ? batch : 1) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  write_csv_header(out_, server_count);
}

void CsvSink::append(const SlotMetrics& row) {
  write_csv_row(out_, row);
  if (++pending_ >= batch_) {
    out_.flush();
    pending_ = 0;
  }
}

void CsvSink::close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("failed writing " + path_.string());
}

json summary_json(const RunSummary& summary, const StabilizationParams& params) {
  return json{
      {"mean_cost", summary.mean_cost},
      {"mean_queue_total", summary.mean_queue_total},
      {"total_offloaded", summary.total_offloaded},
      {"stabilization_slot", summary.stabilization_slot ? json(*summary.stabilization_slot)
                                                        : json(nullptr)},
      {"stabilization_window", params.window},
      {"stabilization_tolerance", params.tolerance},
  };
}

json metadata_json(const RunRecord& record, const SystemConfig& cfg,
                   const StabilizationParams& params) {
  const auto& ph = record.physics;
  return json{
      {"engine_version", std::string(kEngineVersion)},
      {"config_hash", record.config_hash},
      {"seed", record.seed},
      {"policy", std::string(policy_name(record.policy))},
      {"slots", record.rows.size()},
      {"config", to_json(cfg)},
      {"summary", summary_json(record.summary, params)},
      {"physics",
       {{"min_rate_bps", ph.min_rate_bps},
        {"min_link_bits_per_slot", ph.min_link_bits_per_slot},
        {"peak_slot_volume", ph.peak_slot_volume},
        {"feasible", ph.feasible}}},
      {"columns", csv_columns(cfg.server_count())},
  };
}

void write_record(const std::filesystem::path& dir, const std::string& stem,
                  const RunRecord& record, const SystemConfig& cfg,
                  const StabilizationParams& params, const json& extra) {
  std::filesystem::create_directories(dir);
  CsvSink sink(dir / (stem + ".csv"), cfg.server_count());
  for (const auto& row : record.rows) sink.append(row);
  sink.close();

  std::ofstream meta(dir / (stem + ".json"), std::ios::binary);
  if (!meta) throw std::runtime_error("cannot write " + (dir / (stem + ".json")).string());
  json doc = metadata_json(record, cfg, params);
  if (extra.is_object()) doc.update(extra);
  meta << doc.dump(2) << '\n';
  if (!meta) throw std::runtime_error("failed writing " + (dir / (stem + ".json")).string());
}

std::vector<SlotMetrics> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(path.string() + " is empty");

  std::unordered_map<std::string, const Column*> by_name;
  for (const auto& c : columns()) by_name[c.name] = &c;

  // Each header cell maps to a known column, a q_ index, or is ignored.
  const auto names = split_line(header);
  std::vector<const Column*> setters(names.size(), nullptr);
  std::vector<long> queue_index(names.size(), -1);
  std::size_t server_count = 0;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const std::string name(names[c]);
    if (auto it = by_name.find(name); it != by_name.end()) {
      setters[c] = it->second;
    } else if (name.starts_with("q_")) {
      queue_index[c] = parse_number<long>(std::string_view(name).substr(2));
      server_count = std::max(server_count, static_cast<std::size_t>(queue_index[c]) + 1);
    }
  }

  std::vector<SlotMetrics> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != names.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(names.size()) + " cells, got " +
                               std::to_string(cells.size()));
    }
    SlotMetrics row;
    row.queue.assign(server_count, 0);
    try {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (setters[c]) {
          setters[c]->set(row, cells[c]);
        } else if (queue_index[c] >= 0) {
          row.queue[static_cast<std::size_t>(queue_index[c])] = parse_number<Bits>(cells[c]);
        }
      }
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ldso
