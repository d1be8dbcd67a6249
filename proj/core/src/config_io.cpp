#include "ldso/config_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>

#include "ldso/rng.hpp"
#include "ldso/topology.hpp"

namespace ldso {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  void allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) allowed_.insert(k);
  }

  void reject_unknown() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!allowed_.contains(key)) throw ConfigError("unknown key " + where(key));
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }
  const json& at(const char* key) const { return obj_.at(key); }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for " + where(key) + ": " + e.what());
    }
  }

  template <typename T>
  T require(const char* key) const {
    if (!obj_.contains(key)) throw ConfigError("missing key " + where(key));
    T out{};
    read(key, out);
    return out;
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> allowed_;
};

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<RequestKind> kRequestKinds[] = {
    {RequestKind::static_zipf, "static-zipf"},
    {RequestKind::rotating_zipf, "rotating-zipf"},
    {RequestKind::sinusoidal, "sinusoidal"},
};
constexpr EnumName<ArrivalMode> kArrivalModes[] = {
    {ArrivalMode::expectation, "expectation"},
    {ArrivalMode::stochastic, "stochastic"},
};
constexpr EnumName<HopModel> kHopModels[] = {
    {HopModel::provider_count, "provider-count"},
    {HopModel::graph_radius, "graph-radius"},
};
constexpr EnumName<ProcessingEnergyModel> kProcessingModels[] = {
    {ProcessingEnergyModel::total_arrival, "total-arrival"},
    {ProcessingEnergyModel::per_service, "per-service"},
};

template <typename Enum, std::size_t N>
Enum enum_from(const EnumName<Enum> (&table)[N], const std::string& s, const std::string& path) {
  for (const auto& e : table) {
    if (s == e.name) return e.value;
  }
  std::string options;
  for (const auto& e : table) options += std::string(options.empty() ? "" : ", ") + e.name;
  throw ConfigError("bad value for " + path + ": '" + s + "' (expected one of " + options + ")");
}

template <typename Enum, std::size_t N>
const char* enum_to(const EnumName<Enum> (&table)[N], Enum v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "unknown";
}

// A number, or a [lo, hi] pair sampled uniformly per server.
struct IntRange {
  Bits lo = 0;
  Bits hi = 0;
};

IntRange read_range(const ObjectReader& r, const char* key, IntRange fallback) {
  if (!r.has(key)) return fallback;
  const json& v = r.at(key);
  try {
    if (v.is_array()) {
      if (v.size() != 2) throw ConfigError(r.where(key) + " must be a number or [lo, hi]");
      IntRange out{v[0].get<Bits>(), v[1].get<Bits>()};
      if (out.lo > out.hi) throw ConfigError(r.where(key) + ": lo > hi");
      return out;
    }
    const Bits x = v.get<Bits>();
    return {x, x};
  } catch (const json::exception& e) {
    throw ConfigError("bad value for " + r.where(key) + ": " + e.what());
  }
}

void read_catalog(const json& doc, SystemConfig& cfg) {
  ObjectReader r(doc, "catalog");
  r.allow({"sizes", "per_user_intensity"});
  r.reject_unknown();
  cfg.catalog.sizes = r.require<std::vector<Bits>>("sizes");
  cfg.catalog.per_user_intensity =
      r.has("per_user_intensity") ? r.require<std::vector<double>>("per_user_intensity")
                                  : std::vector<double>(cfg.catalog.sizes.size(), 0.0);
}

void read_radio(const json& doc, RadioConfig& radio) {
  ObjectReader r(doc, "radio");
  r.allow({"bandwidth_hz", "tx_power_w", "channel_gain_db", "fading_sigma_db", "noise_power_w"});
  r.reject_unknown();
  r.read("bandwidth_hz", radio.bandwidth_hz);
  if (r.has("tx_power_w")) {
    const json& p = r.at("tx_power_w");
    if (p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number()) {
      radio.tx_power_min_w = p[0].get<double>();
      radio.tx_power_max_w = p[1].get<double>();
    } else if (p.is_number()) {
      radio.tx_power_min_w = radio.tx_power_max_w = p.get<double>();
    } else {
      throw ConfigError("radio.tx_power_w must be a number or [lo, hi]");
    }
  }
  r.read("channel_gain_db", radio.channel_gain_db);
  r.read("fading_sigma_db", radio.fading_sigma_db);
  r.read("noise_power_w", radio.noise_power_w);
}

void read_energy(const json& doc, EnergyConfig& e) {
  ObjectReader r(doc, "energy");
  r.allow({"device_to_server", "server_to_server", "processing"});
  r.reject_unknown();
  r.read("device_to_server", e.device_to_server);
  r.read("server_to_server", e.server_to_server);
  r.read("processing", e.processing);
}

void read_request_model(const json& doc, RequestModel& m) {
  ObjectReader r(doc, "request_model");
  r.allow({"kind", "mode", "zipf_exponent", "rotation_period", "modulation_depth",
           "poisson_mean"});
  r.reject_unknown();
  if (r.has("kind")) {
    m.kind = enum_from(kRequestKinds, r.require<std::string>("kind"), r.where("kind"));
  }
  if (r.has("mode")) {
    m.mode = enum_from(kArrivalModes, r.require<std::string>("mode"), r.where("mode"));
  }
  r.read("zipf_exponent", m.zipf_exponent);
  r.read("rotation_period", m.rotation_period);
  r.read("modulation_depth", m.modulation_depth);
  r.read("poisson_mean", m.poisson_mean);
}

std::vector<EdgeServerSpec> read_servers(const json& doc) {
  if (!doc.is_array()) throw ConfigError("servers must be an array");
  std::vector<EdgeServerSpec> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    ObjectReader r(doc[i], "servers[" + std::to_string(i) + "]");
    r.allow({"id", "cache_capacity", "cached_services", "max_service_rate", "max_arrival",
             "max_queue", "covered_users", "position"});
    r.reject_unknown();
    EdgeServerSpec s;
    s.id = r.has("id") ? r.require<std::size_t>("id") : i;
    s.cache_capacity = r.require<Bits>("cache_capacity");
    s.cached = r.require<std::vector<std::uint8_t>>("cached_services");
    s.max_service_rate = r.require<Bits>("max_service_rate");
    s.max_arrival = r.require<Bits>("max_arrival");
    s.max_queue = r.require<Bits>("max_queue");
    r.read("covered_users", s.covered_users);
    if (r.has("position")) {
      const auto xy = r.require<std::vector<double>>("position");
      if (xy.size() != 2) throw ConfigError(r.where("position") + " must be [x, y]");
      s.position = {xy[0], xy[1]};
    }
    out.push_back(std::move(s));
  }
  return out;
}

void resolve_topology(const json& doc, const std::filesystem::path& base_dir, SystemConfig& cfg) {
  ObjectReader r(doc, "topology");
  r.allow({"seed", "width_m", "height_m", "server_intensity", "user_intensity", "server_count",
           "users_per_server", "positions_file", "cache_capacity", "max_service_rate",
           "max_arrival", "max_queue"});
  r.reject_unknown();

  TopologyParams params;
  params.seed = cfg.seed;
  r.read("seed", params.seed);
  r.read("width_m", params.width_m);
  r.read("height_m", params.height_m);
  r.read("server_intensity", params.server_intensity);
  r.read("user_intensity", params.user_intensity);
  params.user_range_m = cfg.user_range_m;
  params.server_range_m = cfg.server_range_m;
  if (r.has("server_count")) params.server_count = r.require<std::size_t>("server_count");
  if (r.has("users_per_server")) {
    params.users_per_server = r.require<std::int64_t>("users_per_server");
  }
  if (r.has("positions_file")) {
    std::filesystem::path file = r.require<std::string>("positions_file");
    if (file.is_relative()) file = base_dir / file;
    try {
      params.fixed_positions = load_positions_csv(file);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("topology.positions_file: ") + e.what());
    }
  }

  const IntRange capacity = read_range(r, "cache_capacity", {0, 0});
  const IntRange service = read_range(r, "max_service_rate", {1000, 1000});
  const IntRange arrival = read_range(r, "max_arrival", {2000, 2000});
  const IntRange queue = read_range(r, "max_queue", {4000, 4000});

  TopologyFragment frag;
  try {
    frag = generate_topology(params);
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  } catch (const TopologyError& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
  const std::size_t m = frag.positions.size();

  // Per-server parameters drawn from ranges use their own stream so that the
  // positions stay fixed when only these ranges change.
  Rng rng = make_rng(params.seed, Stream::placement, 1);
  auto draw = [&rng](IntRange range) {
    return range.lo == range.hi ? range.lo
                                : std::uniform_int_distribution<Bits>(range.lo, range.hi)(rng);
  };
  std::vector<Bits> capacities(m);
  for (auto& c : capacities) c = draw(capacity);
  const Matrix<std::uint8_t> placed = place_services(params.seed, cfg.catalog.sizes, capacities);

  cfg.servers.clear();
  for (std::size_t i = 0; i < m; ++i) {
    EdgeServerSpec s;
    s.id = i;
    s.cache_capacity = capacities[i];
    s.cached.resize(cfg.catalog.count());
    for (std::size_t k = 0; k < cfg.catalog.count(); ++k) s.cached[k] = placed(i, k);
    s.max_service_rate = draw(service);
    s.max_arrival = draw(arrival);
    s.max_queue = draw(queue);
    s.covered_users = frag.covered_users[i];
    s.position = frag.positions[i];
    cfg.servers.push_back(std::move(s));
  }
  cfg.orphan_users = frag.orphan_users;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

Experiment parse_experiment(const json& doc, const std::filesystem::path& base_dir) {
  ObjectReader r(doc, "");
  r.allow({"servers", "topology", "catalog", "radio", "energy", "control_V", "weight_theta",
           "slot_count", "slot_duration_s", "seed", "energy_cap_j", "delay_cap_s",
           "request_model", "user_range_m", "server_range_m", "hop_model", "processing_energy",
           "orphan_users", "policy"});
  r.reject_unknown();

  Experiment ex;
  SystemConfig& cfg = ex.config;
  if (!r.has("catalog")) throw ConfigError("missing key catalog");
  read_catalog(r.at("catalog"), cfg);
  if (r.has("radio")) read_radio(r.at("radio"), cfg.radio);
  if (r.has("energy")) read_energy(r.at("energy"), cfg.energy);
  if (r.has("request_model")) read_request_model(r.at("request_model"), cfg.request_model);
  r.read("control_V", cfg.control_v);
  r.read("weight_theta", cfg.weight_theta);
  r.read("slot_count", cfg.slot_count);
  r.read("slot_duration_s", cfg.slot_duration_s);
  r.read("seed", cfg.seed);
  r.read("energy_cap_j", cfg.energy_cap_j);
  r.read("delay_cap_s", cfg.delay_cap_s);
  r.read("user_range_m", cfg.user_range_m);
  r.read("server_range_m", cfg.server_range_m);
  r.read("orphan_users", cfg.orphan_users);
  if (r.has("hop_model")) {
    cfg.hop_model = enum_from(kHopModels, r.require<std::string>("hop_model"), "hop_model");
  }
  if (r.has("processing_energy")) {
    cfg.processing_energy = enum_from(kProcessingModels,
                                      r.require<std::string>("processing_energy"),
                                      "processing_energy");
  }
  if (r.has("policy")) {
    const auto name = r.require<std::string>("policy");
    ex.policy = parse_policy(name);
    if (!ex.policy) throw ConfigError("unknown policy '" + name + "'");
  }

  if (r.has("servers") && r.has("topology")) {
    throw ConfigError("give either servers or topology, not both");
  }
  if (r.has("servers")) {
    cfg.servers = read_servers(r.at("servers"));
  } else if (r.has("topology")) {
    resolve_topology(r.at("topology"), base_dir, cfg);
  } else {
    throw ConfigError("missing key servers (or topology)");
  }
  return ex;
}

void apply_override(json& doc, std::string_view dotted_key, std::string_view value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  json* node = &doc;
  const auto parts = split(dotted_key, '.');
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const std::string& seg = parts[p];
    const bool last = p + 1 == parts.size();
    if (node->is_array()) {
      if (!all_digits(seg) || std::stoul(seg) >= node->size()) {
        throw ConfigError("override " + std::string(dotted_key) + ": bad array index " + seg);
      }
      node = &(*node)[std::stoul(seg)];
    } else {
      if (!node->is_object() && !node->is_null()) {
        throw ConfigError("override " + std::string(dotted_key) + ": " + seg +
                          " is below a non-object value");
      }
      if (!last && !node->contains(seg)) (*node)[seg] = json::object();
      node = &(*node)[seg];
    }
  }
  *node = std::move(parsed);
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override must look like key=value: " + std::string(assignment));
  }
  apply_override(doc, assignment.substr(0, eq), assignment.substr(eq + 1));
}

json to_json(const SystemConfig& cfg) {
  json servers = json::array();
  for (const auto& s : cfg.servers) {
    servers.push_back({{"id", s.id},
                       {"cache_capacity", s.cache_capacity},
                       {"cached_services", s.cached},
                       {"max_service_rate", s.max_service_rate},
                       {"max_arrival", s.max_arrival},
                       {"max_queue", s.max_queue},
                       {"covered_users", s.covered_users},
                       {"position", {s.position.x, s.position.y}}});
  }
  const auto& rm = cfg.request_model;
  return json{
      {"servers", servers},
      {"catalog",
       {{"sizes", cfg.catalog.sizes}, {"per_user_intensity", cfg.catalog.per_user_intensity}}},
      {"radio",
       {{"bandwidth_hz", cfg.radio.bandwidth_hz},
        {"tx_power_w", {cfg.radio.tx_power_min_w, cfg.radio.tx_power_max_w}},
        {"channel_gain_db", cfg.radio.channel_gain_db},
        {"fading_sigma_db", cfg.radio.fading_sigma_db},
        {"noise_power_w", cfg.radio.noise_power_w}}},
      {"energy",
       {{"device_to_server", cfg.energy.device_to_server},
        {"server_to_server", cfg.energy.server_to_server},
        {"processing", cfg.energy.processing}}},
      {"control_V", cfg.control_v},
      {"weight_theta", cfg.weight_theta},
      {"slot_count", cfg.slot_count},
      {"slot_duration_s", cfg.slot_duration_s},
      {"seed", cfg.seed},
      {"energy_cap_j", cfg.energy_cap_j},
      {"delay_cap_s", cfg.delay_cap_s},
      {"request_model",
       {{"kind", enum_to(kRequestKinds, rm.kind)},
        {"mode", enum_to(kArrivalModes, rm.mode)},
        {"zipf_exponent", rm.zipf_exponent},
        {"rotation_period", rm.rotation_period},
        {"modulation_depth", rm.modulation_depth},
        {"poisson_mean", rm.poisson_mean}}},
      {"user_range_m", cfg.user_range_m},
      {"server_range_m", cfg.server_range_m},
      {"hop_model", enum_to(kHopModels, cfg.hop_model)},
      {"processing_energy", enum_to(kProcessingModels, cfg.processing_energy)},
      {"orphan_users", cfg.orphan_users},
  };
}

std::string config_hash(const SystemConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ldso
