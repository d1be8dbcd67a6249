#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ldso/config_io.hpp"
#include "ldso/engine.hpp"
#include "ldso/record_io.hpp"
#include "ldso/sweep.hpp"

namespace ldso::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out_dir;
  int verbosity = 0;
};

struct Loaded {
  json document;  // post-override input document
  Experiment experiment;
};

// Input problems (bad JSON, unknown keys, failed validation) all map to
// exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Loaded load(const Common& c) {
  Loaded l;
  try {
    l.document = read_json_file(c.config);
    for (const auto& o : c.overrides) apply_override(l.document, o);
    l.experiment = parse_experiment(l.document, fs::path(c.config).parent_path());
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }
  if (const auto report = validate_config(l.experiment.config); !report.ok()) {
    throw InputError("invalid config:\n" + report.to_string());
  }
  return l;
}

fs::path output_dir(const Common& c) {
  fs::path dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : "out";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InputError("output directory " + dir.string() + " is not writable");
  }
  return dir;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<PolicyKind> parse_policies(const std::string& list) {
  std::vector<PolicyKind> out;
  for (const auto& name : split_list(list)) {
    const auto p = parse_policy(name);
    if (!p) throw InputError("unknown policy '" + name + "'");
    out.push_back(*p);
  }
  if (out.empty()) throw InputError("no policy given");
  return out;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& list, const char* what) {
  std::vector<T> out;
  for (const auto& item : split_list(list)) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, double>) {
        out.push_back(std::stod(item, &used));
      } else {
        out.push_back(std::stoull(item, &used));
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InputError(std::string("bad ") + what + " '" + item + "'");
    }
  }
  if (out.empty()) throw InputError(std::string("no ") + what + " given");
  return out;
}

std::string stabilization_text(const RunSummary& s) {
  return s.stabilization_slot ? std::to_string(*s.stabilization_slot) : "none";
}

int cmd_validate(const Common& c, std::ostream& out) {
  const Loaded l = load(c);
  const auto& cfg = l.experiment.config;
  out << "valid servers=" << cfg.server_count() << " services=" << cfg.service_count()
      << " hash=" << config_hash(cfg) << '\n';
  return kExitOk;
}

struct RunArgs {
  std::optional<std::uint64_t> seed;
  std::string policy;
  StabilizationParams stabilization;
};

int cmd_run(const Common& c, const RunArgs& a, std::ostream& out, std::ostream& err) {
  const Loaded l = load(c);
  const fs::path dir = output_dir(c);
  const SystemConfig& cfg = l.experiment.config;
  const PolicyKind policy = a.policy.empty() ? l.experiment.policy.value_or(PolicyKind::ldso)
                                             : parse_policies(a.policy).front();
  const std::uint64_t seed = a.seed.value_or(cfg.seed);

  RunOptions opts;
  opts.stabilization = a.stabilization;
  if (c.verbosity > 1) {
    opts.on_slot = [&err](const SlotMetrics& row) {
      err << "t=" << row.t << " cost=" << format_double(row.cost.cost)
          << " queue=" << row.queue_total << '\n';
    };
  }
  const RunRecord record = run(cfg, policy, seed, opts);
  const std::string stem = "run_" + std::string(policy_name(policy)) + "_s" + std::to_string(seed);
  write_record(dir, stem, record, cfg, a.stabilization, json{{"input_config", l.document}});

  out << "run policy=" << policy_name(policy) << " seed=" << seed
      << " slots=" << record.rows.size()
      << " mean_cost=" << format_double(record.summary.mean_cost)
      << " mean_queue=" << format_double(record.summary.mean_queue_total)
      << " stabilized=" << stabilization_text(record.summary)
      << " feasible=" << (record.physics.feasible ? "yes" : "no")
      << " out=" << (dir / stem).string() << '\n';
  return kExitOk;
}

struct SweepArgs {
  std::string axis;
  std::string values;
  std::string policies;
  std::string seeds;
  unsigned jobs = 0;
  StabilizationParams stabilization;
};

int cmd_sweep(const Common& c, const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const Loaded l = load(c);
  const fs::path dir = output_dir(c);
  const auto axis = parse_axis(a.axis);
  if (!axis) throw InputError("unknown sweep axis '" + a.axis + "'");
  const auto values = parse_numbers<double>(a.values, "value");
  const auto policies =
      a.policies.empty()
          ? std::vector<PolicyKind>{l.experiment.policy.value_or(PolicyKind::ldso)}
          : parse_policies(a.policies);
  const auto seeds = a.seeds.empty()
                         ? std::vector<std::uint64_t>{l.experiment.config.seed}
                         : parse_numbers<std::uint64_t>(a.seeds, "seed");

  // Reject axis values that make the config invalid before spending time.
  for (double v : values) {
    const auto report = validate_config(with_axis_value(l.experiment.config, *axis, v));
    if (!report.ok()) {
      throw InputError("axis value " + format_double(v) + " gives an invalid config:\n" +
                       report.to_string());
    }
  }

  auto stem_of = [&](const SweepCell& cell) {
    return "sweep_" + std::string(axis_name(*axis)) + "_v" + std::to_string(cell.value_index) +
           "_" + std::string(policy_name(cell.policy)) + "_s" + std::to_string(cell.seed_index);
  };

  SweepOptions opts;
  opts.jobs = a.jobs;
  opts.run.stabilization = a.stabilization;
  std::size_t done = 0;
  std::vector<std::string> write_errors;
  opts.on_complete = [&](const SweepCell& cell) {
    ++done;
    if (cell.record) {
      const SystemConfig cfg = with_axis_value(l.experiment.config, *axis, cell.value);
      const json extra{{"input_config", l.document},
                       {"sweep",
                        {{"axis", std::string(axis_name(*axis))},
                         {"value", cell.value},
                         {"value_index", cell.value_index},
                         {"policy_index", cell.policy_index},
                         {"seed_index", cell.seed_index},
                         {"base_seed", cell.base_seed}}}};
      try {
        write_record(dir, stem_of(cell), *cell.record, cfg, a.stabilization, extra);
      } catch (const std::exception& e) {
        write_errors.push_back(e.what());
      }
    }
    if (c.verbosity > 0) {
      err << "[" << done << "] " << stem_of(cell) << (cell.error.empty() ? " ok" : " FAILED: ")
          << cell.error << '\n';
    }
  };
  const auto cells = sweep(l.experiment.config, *axis, values, policies, seeds, opts);

  const fs::path summary_path = dir / ("sweep_" + std::string(axis_name(*axis)) + "_summary.csv");
  std::ofstream summary(summary_path, std::ios::binary);
  summary << "axis,value,policy,base_seed,run_seed,status,mean_cost,mean_queue_total,"
             "total_offloaded,stabilization_slot,feasible,record\n";
  std::size_t failed = 0;
  for (const auto& cell : cells) {
    summary << axis_name(*axis) << ',' << format_double(cell.value) << ','
            << policy_name(cell.policy) << ',' << cell.base_seed << ',' << cell.run_seed << ',';
    if (cell.record) {
      const auto& s = cell.record->summary;
      summary << "ok," << format_double(s.mean_cost) << ',' << format_double(s.mean_queue_total)
              << ',' << s.total_offloaded << ','
              << (s.stabilization_slot ? std::to_string(*s.stabilization_slot) : "") << ','
              << (cell.record->physics.feasible ? 1 : 0) << ',' << stem_of(cell) << '\n';
    } else {
      ++failed;
      summary << "failed,,,,,,\n";
      err << stem_of(cell) << ": " << cell.error << '\n';
    }
  }
  summary.close();
  if (!summary) throw InputError("failed writing " + summary_path.string());
  for (const auto& e : write_errors) err << e << '\n';

  out << "sweep axis=" << axis_name(*axis) << " runs=" << cells.size() << " failed=" << failed
      << " summary=" << summary_path.string() << '\n';
  if (!write_errors.empty()) return kExitInvalid;
  return failed ? kExitInvariant : kExitOk;
}

int cmd_summarize(const std::vector<std::string>& inputs, const std::string& out_file,
                  const StabilizationParams& params, std::ostream& out, std::ostream& err) {
  std::ofstream table;
  if (!out_file.empty()) {
    table.open(out_file, std::ios::binary);
    if (!table) throw InputError("cannot write " + out_file);
    table << "record,slots,mean_cost,mean_queue_total,total_offloaded,stabilization_slot,"
             "matches_metadata\n";
  }
  std::size_t mismatches = 0;
  for (const auto& input : inputs) {
    fs::path csv = input;
    if (csv.extension() == ".json") csv.replace_extension(".csv");
    std::vector<SlotMetrics> rows;
    try {
      rows = read_csv_rows(csv);
    } catch (const std::runtime_error& e) {
      throw InputError(e.what());
    }
    const RunSummary s = summarize(rows, params);

    // When metadata sits next to the CSV, its stored summary must match.
    std::string verdict = "n/a";
    fs::path meta = csv;
    meta.replace_extension(".json");
    if (fs::exists(meta)) {
      json stored;
      try {
        stored = read_json_file(meta).at("summary");
      } catch (const std::exception& e) {
        throw InputError(meta.string() + ": " + e.what());
      }
      const json recomputed = summary_json(s, params);
      bool same = true;
      for (const char* key : {"mean_cost", "mean_queue_total", "total_offloaded"}) {
        same = same && stored.value(key, json()) == recomputed[key];
      }
      // The stabilization slot depends on the window and band, so it is only
      // comparable when both match.
      if (stored.value("stabilization_window", json()) == recomputed["stabilization_window"] &&
          stored.value("stabilization_tolerance", json()) ==
              recomputed["stabilization_tolerance"]) {
        same = same && stored.value("stabilization_slot", json()) ==
                           recomputed["stabilization_slot"];
      }
      verdict = same ? "yes" : "no";
      if (!same) {
        ++mismatches;
        err << csv.string() << ": stored summary differs from recomputation\n";
      }
    }
    out << "summary record=" << csv.string() << " slots=" << rows.size()
        << " mean_cost=" << format_double(s.mean_cost)
        << " mean_queue=" << format_double(s.mean_queue_total)
        << " offloaded=" << s.total_offloaded << " stabilized=" << stabilization_text(s)
        << " matches_metadata=" << verdict << '\n';
    if (table.is_open()) {
      table << csv.string() << ',' << rows.size() << ',' << format_double(s.mean_cost) << ','
            << format_double(s.mean_queue_total) << ',' << s.total_offloaded << ','
            << (s.stabilization_slot ? std::to_string(*s.stabilization_slot) : "") << ','
            << verdict << '\n';
    }
  }
  return mismatches ? kExitInvalid : kExitOk;
}

}  // namespace

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lyapunov-based dynamic service offloading simulator"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  RunArgs run_args;
  SweepArgs sweep_args;
  std::vector<std::string> summarize_inputs;
  std::string summarize_out;
  StabilizationParams stabilization;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("-c,--config", common.config, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-s,--set", common.overrides, "Override a config key: dotted.key=value");
    if (needs_out) {
      sub->add_option("-o,--out", common.out_dir,
                      std::string("Output directory (default $") + kOutDirEnv + " or ./out)");
    }
    sub->add_flag("-v,--verbose", common.verbosity, "More progress output on stderr");
  };
  auto add_stabilization = [&](CLI::App* sub) {
    sub->add_option("--window", stabilization.window, "Stabilization moving-average window")
        ->check(CLI::Range(2, 1 << 20));
    sub->add_option("--tolerance", stabilization.tolerance,
                    "Stabilization relative band")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* validate = app.add_subcommand("validate", "Check a config and list violations");
  add_common(validate, false);

  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment");
  add_common(run_cmd, true);
  run_cmd->add_option("--seed", run_args.seed, "Run seed (default: config seed)");
  run_cmd->add_option("-p,--policy", run_args.policy,
                      "ldso, oracle, random, nearest-capable, local-first or cost-only");
  add_stabilization(run_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--axis", sweep_args.axis, "control_V, poisson_mean, weight_theta or Q_max")
      ->required();
  sweep_cmd->add_option("--values", sweep_args.values, "Comma-separated axis values")->required();
  sweep_cmd->add_option("-p,--policy", sweep_args.policies, "Comma-separated policies");
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "Comma-separated base seeds");
  sweep_cmd->add_option("-j,--jobs", sweep_args.jobs, "Parallel runs (default: all cores)");
  add_stabilization(sweep_cmd);

  CLI::App* summarize_cmd =
      app.add_subcommand("summarize", "Recompute summaries from run CSV files");
  summarize_cmd->add_option("inputs", summarize_inputs, "Run CSV (or metadata JSON) files")
      ->required()
      ->check(CLI::ExistingFile);
  summarize_cmd->add_option("-o,--out", summarize_out, "Write a combined summary CSV here");
  add_stabilization(summarize_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  run_args.stabilization = stabilization;
  sweep_args.stabilization = stabilization;

  try {
    if (*validate) return cmd_validate(common, out);
    if (*run_cmd) return cmd_run(common, run_args, out, err);
    if (*sweep_cmd) return cmd_sweep(common, sweep_args, out, err);
    return cmd_summarize(summarize_inputs, summarize_out, stabilization, out, err);
  } catch (const InputError& e) {
    err << e.what() << '\n';
    out << "invalid: " << std::string(e.what()).substr(0, std::string(e.what()).find('\n'))
        << '\n';
    return kExitInvalid;
  } catch (const InvariantViolation& e) {
    err << "invariant violated: " << e.what() << '\n';
    out << "aborted: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const PreconditionError& e) {
    err << e.what() << '\n';
    out << "invalid: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    out << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace ldso::cli
