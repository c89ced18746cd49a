#include "oac/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "oac/parallel.hpp"

namespace oac {

namespace {

const std::set<std::string> kMultiValued = {"/scheme", "/codec/beta", "/codec/digits", "/phy/num_antennas",
                                            "/mc/distribution"};

std::string dotted(const std::string& pointer) {
  std::string out = "config";
  for (char c : pointer) out += (c == '/') ? '.' : c;
  return out;
}

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ConfigError(dotted(pointer) + ": " + what);
}

std::string type_name(const Json& j) {
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

void check_leaf(const Json& def, const Json& raw, const std::string& pointer) {
  if (def.is_boolean()) {
    if (!raw.is_boolean()) fail(pointer, "expected boolean, got " + type_name(raw));
  } else if (def.is_number_integer()) {
    if (!raw.is_number_integer()) fail(pointer, "expected integer, got " + type_name(raw));
  } else if (def.is_number()) {
    if (!raw.is_number()) fail(pointer, "expected number, got " + type_name(raw));
  } else if (def == "auto") {
    if (!(raw.is_number() || raw == "auto")) fail(pointer, "expected number or \"auto\", got " + type_name(raw));
  } else if (def.is_string()) {
    if (!raw.is_string()) fail(pointer, "expected string, got " + type_name(raw));
  }
}

Json resolve_node(const Json& def, const Json& raw, const std::string& pointer) {
  if (def.is_object()) {
    if (!raw.is_object()) fail(pointer.empty() ? "" : pointer, "expected object, got " + type_name(raw));
    Json out = def;
    for (const auto& [key, value] : raw.items()) {
      const std::string child = pointer + "/" + key;
      if (!def.contains(key)) fail(child, "unknown key");
      if (child == "/sweep/grid") {
        if (!value.is_object()) fail(child, "expected object of arrays");
        for (const auto& [gk, gv] : value.items())
          if (!gv.is_array()) fail(child + "/" + gk, "expected array of values");
        out[key] = value;
        continue;
      }
      out[key] = resolve_node(def[key], value, child);
    }
    return out;
  }
  if (raw.is_array() && kMultiValued.contains(pointer)) {
    for (std::size_t i = 0; i < raw.size(); ++i) check_leaf(def, raw[i], pointer + "/" + std::to_string(i));
    return raw;
  }
  check_leaf(def, raw, pointer);
  return raw;
}

std::vector<Json> as_list(const Json& j) {
  if (j.is_array()) return {j.begin(), j.end()};
  return {j};
}

template <typename T>
T scalar(const Json& j, const std::string& pointer) {
  if (j.is_array()) fail(pointer, "must be a single value here");
  return j.get<T>();
}

void check_enums(const Json& cfg) {
  for (const auto& s : as_list(cfg["scheme"])) parse_scheme(s.get<std::string>());
  for (const auto& d : as_list(cfg["mc"]["distribution"])) parse_distribution(d.get<std::string>());
  parse_partition(cfg["train"]["partition"].get<std::string>());
  const auto sub = cfg["sweep"]["subcommand"].get<std::string>();
  if (sub != "mse" && sub != "hist" && sub != "train") fail("/sweep/subcommand", "expected mse, hist or train");
  if (cfg["schema_version"] != kSchemaVersion) fail("/schema_version", "unsupported version");
}

std::string provenance(const Json& resolved, std::uint64_t seed) {
  return "# schema_version=" + std::to_string(kSchemaVersion) + " config_hash=" + config_hash(resolved) +
         " seed=" + std::to_string(seed) + "\n";
}

double auto_or(const Json& j, double fallback) { return j == "auto" ? fallback : j.get<double>(); }

PhyConfig phy_with(const Json& cfg, int antennas) {
  PhyConfig phy = phy_from(cfg.contains("phy") ? cfg : cfg);
  phy.num_antennas = antennas;
  phy.validate();
  return phy;
}

struct McPoint {
  McSetup setup;
  bool has_codec = false;
};

// Expands the multi-valued fields in scheme, beta, digits, antennas,
// distribution order. Goldenbaum points ignore beta and digits.
std::vector<McPoint> mc_points(const Json& cfg, std::uint64_t seed) {
  std::vector<McPoint> points;
  const auto& mc = cfg["mc"];
  for (const auto& scheme_j : as_list(cfg["scheme"])) {
    const Scheme scheme = parse_scheme(scheme_j.get<std::string>());
    if (scheme == Scheme::fskmv || scheme == Scheme::ideal)
      fail("/scheme", "Monte-Carlo MSE supports balanced and goldenbaum");
    const bool codec_scheme = scheme == Scheme::balanced;
    const auto betas = codec_scheme ? as_list(cfg["codec"]["beta"]) : std::vector<Json>{Json(5)};
    const auto digit_list = codec_scheme ? as_list(cfg["codec"]["digits"]) : std::vector<Json>{Json(1)};
    for (const auto& beta : betas)
      for (const auto& digits : digit_list)
        for (const auto& antennas : as_list(cfg["phy"]["num_antennas"]))
          for (const auto& dist : as_list(mc["distribution"])) {
            McPoint p;
            const int b = beta.get<int>();
            const int d = digits.get<int>();
            p.setup.scheme = scheme;
            p.setup.codec = CodecConfig(b, d, auto_or(cfg["codec"]["v_max"], CodecConfig::unit_range_v_max(b, d)));
            p.setup.phy = phy_with(cfg, antennas.get<int>());
            p.setup.goldenbaum.seq_len = cfg["goldenbaum"]["seq_len"].get<int>();
            p.setup.goldenbaum.v_max = cfg["goldenbaum"]["v_max"].get<double>();
            p.setup.goldenbaum.validate();
            p.setup.input.kind = parse_distribution(dist.get<std::string>());
            const double natural = codec_scheme ? p.setup.codec.v_max_prime() : p.setup.goldenbaum.v_max;
            p.setup.input.uniform_half_width = auto_or(mc["uniform_half_width"], natural);
            p.setup.input.gaussian_variance = mc["gaussian_variance"].get<double>();
            p.setup.trials = mc["trials"].get<std::int64_t>();
            if (p.setup.trials < 1) fail("/mc/trials", "must be >= 1");
            p.setup.seed = derive_seed(seed, points.size());
            p.has_codec = codec_scheme;
            points.push_back(std::move(p));
          }
  }
  return points;
}

Artifact run_mse(const Json& cfg, std::uint64_t seed) {
  const auto points = mc_points(cfg, seed);
  std::vector<std::string> rows(points.size());
  const double snr_db = cfg["phy"]["snr_db"].get<double>();
  parallel_for(points.size(), [&](std::size_t i) {
    const auto& p = points[i];
    const auto est = mc_bmse(p.setup);
    std::string row{to_string(p.setup.scheme)};
    row += ",";
    row += p.has_codec ? std::to_string(p.setup.codec.beta()) + "," + std::to_string(p.setup.codec.digits()) : ",";
    row += "," + std::to_string(p.setup.phy.num_antennas) + "," + std::to_string(p.setup.phy.num_eds) + "," +
           format_real(snr_db) + "," + std::string(to_string(p.setup.input.kind)) + "," + format_real(est.mean) + "," +
           format_real(est.ci_halfwidth) + ",";
    if (p.has_codec) row += format_real(theoretical_bmse(p.setup.codec, p.setup.phy).total);
    rows[i] = row + "\n";
  });
  Artifact out;
  out.csv = provenance(cfg, seed) + "scheme,beta,D,R,K,snr_db,distribution,bmse_sim,ci,bmse_theory\n";
  for (const auto& r : rows) out.csv += r;
  return out;
}

Artifact run_hist(const Json& cfg, std::uint64_t seed) {
  const auto points = mc_points(cfg, seed);
  const int bins = cfg["mc"]["bins"].get<int>();
  const double range = cfg["mc"]["hist_range"].get<double>();
  std::vector<std::string> blocks(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const auto& p = points[i];
    const auto h = error_histogram(p.setup, bins, range);
    const std::string prefix =
        std::string(to_string(p.setup.scheme)) + "," +
        (p.has_codec ? std::to_string(p.setup.codec.beta()) + "," + std::to_string(p.setup.codec.digits()) : ",") +
        "," + std::to_string(p.setup.phy.num_antennas) + "," + std::string(to_string(p.setup.input.kind)) + ",";
    std::string block;
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      block += prefix + format_real(h.edges[b]) + "," + format_real(h.edges[b + 1]) + "," + std::to_string(h.counts[b]) +
               "," + format_real(h.skewness) + "\n";
    blocks[i] = std::move(block);
  });
  Artifact out;
  out.csv = provenance(cfg, seed) + "scheme,beta,D,R,distribution,bin_lo,bin_hi,count,skewness\n";
  for (const auto& b : blocks) out.csv += b;
  return out;
}

Artifact run_train(const Json& cfg, std::uint64_t seed) {
  const FeelConfig feel = feel_from(cfg);
  const auto result = train(feel, seed);
  Artifact out;
  out.csv = provenance(cfg, seed) + "round,v_max_used,loss,test_accuracy,gradient_norm,bmse_proxy\n";
  for (const auto& r : result.trace)
    out.csv += std::to_string(r.round) + "," + format_real(r.v_max_used) + "," + format_real(r.loss) + "," +
               format_real(r.test_accuracy) + "," + format_real(r.gradient_norm) + "," + format_real(r.bmse_proxy) + "\n";
  out.summary = {{"schema_version", kSchemaVersion},
                 {"config_hash", config_hash(cfg)},
                 {"seed", seed},
                 {"num_params", result.num_params},
                 {"rounds", result.trace.size()},
                 {"final_accuracy", result.final_accuracy},
                 {"final_loss", result.final_loss},
                 {"config", cfg}};
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

Json parse_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot read " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
}

// Drops the provenance and header lines of a CSV artifact.
std::string csv_body(const std::string& csv, std::string* header) {
  std::istringstream is(csv);
  std::string line;
  std::string body;
  int n = 0;
  while (std::getline(is, line)) {
    if (n++ < 2) {
      if (n == 2 && header) *header = line;
      continue;
    }
    body += line + "\n";
  }
  return body;
}

}  // namespace

Json default_config() {
  return Json{
      {"schema_version", kSchemaVersion},
      {"scheme", "balanced"},
      {"codec", {{"beta", 5}, {"digits", 2}, {"v_max", "auto"}}},
      {"phy",
       {{"num_eds", 25},
        {"num_antennas", 1},
        {"snr_db", 20.0},
        {"symbol_energy", "auto"},
        {"num_subcarriers", 1200},
        {"num_symbols", 64},
        {"sync_error_samples", 3},
        {"fft_size", 2048},
        {"sync_spread_s", 55.6e-9},
        {"subcarrier_spacing_hz", 15e3},
        {"clip_counts", false}}},
      {"goldenbaum", {{"seq_len", 12}, {"v_max", 1.0}}},
      {"mc",
       {{"trials", 100000},
        {"distribution", "uniform"},
        {"uniform_half_width", "auto"},
        {"gaussian_variance", 0.2},
        {"bins", 80},
        {"hist_range", 1.0}}},
      {"train",
       {{"rounds", 150},
        {"learning_rate", 0.05},
        {"momentum", 0.9},
        {"batch_size", 64},
        {"partition", "homogeneous"},
        {"areas", 5},
        {"aam", false},
        {"aam_alpha", "auto"},
        {"aam_v0", "auto"},
        {"hidden", 32},
        {"data", {{"per_class", 1200}, {"test_per_class", 200}, {"dim", 64}, {"classes", 10}, {"separation", 4.0}}}}},
      {"sweep", {{"subcommand", "mse"}, {"grid", Json::object()}}},
  };
}

Json resolve_config(const Json& raw) {
  Json resolved = resolve_node(default_config(), raw.is_null() ? Json::object() : raw, "");
  check_enums(resolved);
  return resolved;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set: expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  std::string pointer;
  std::size_t start = 0;
  const std::string grid_prefix = "sweep.grid.";
  if (key.rfind(grid_prefix, 0) == 0 && key.size() > grid_prefix.size()) {
    if (config.is_null()) config = Json::object();
    config["sweep"]["grid"][key.substr(grid_prefix.size())] = value;
    return;
  }
  while (start <= key.size()) {
    const auto dot = key.find('.', start);
    pointer += "/" + key.substr(start, dot - start);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (config.is_null()) config = Json::object();
  config[Json::json_pointer(pointer)] = value;
}

std::string config_hash(const Json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : resolved.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CodecConfig codec_from(const Json& cfg) {
  const int beta = scalar<int>(cfg["codec"]["beta"], "/codec/beta");
  const int digits = scalar<int>(cfg["codec"]["digits"], "/codec/digits");
  return {beta, digits, auto_or(cfg["codec"]["v_max"], CodecConfig::unit_range_v_max(beta, digits))};
}

PhyConfig phy_from(const Json& cfg) {
  const auto& j = cfg["phy"];
  PhyConfig phy;
  phy.num_eds = j["num_eds"].get<int>();
  phy.num_antennas = j["num_antennas"].is_array() ? 1 : j["num_antennas"].get<int>();
  phy.noise_var = noise_var_from_snr_db(j["snr_db"].get<double>());
  if (j["symbol_energy"] != "auto") phy.symbol_energy = j["symbol_energy"].get<double>();
  phy.num_subcarriers = j["num_subcarriers"].get<int>();
  phy.num_symbols = j["num_symbols"].get<int>();
  phy.sync_error_samples = j["sync_error_samples"].get<int>();
  phy.fft_size = j["fft_size"].get<int>();
  phy.sync_spread_s = j["sync_spread_s"].get<double>();
  phy.subcarrier_spacing_hz = j["subcarrier_spacing_hz"].get<double>();
  phy.clip_counts = j["clip_counts"].get<bool>();
  phy.validate();
  return phy;
}

FeelConfig feel_from(const Json& cfg) {
  const auto& t = cfg["train"];
  FeelConfig f;
  f.scheme = parse_scheme(scalar<std::string>(cfg["scheme"], "/scheme"));
  const int beta = scalar<int>(cfg["codec"]["beta"], "/codec/beta");
  const int digits = scalar<int>(cfg["codec"]["digits"], "/codec/digits");
  // Training uses v_max = 1 unless configured.
  f.codec = CodecConfig(beta, digits, auto_or(cfg["codec"]["v_max"], 1.0));
  scalar<int>(cfg["phy"]["num_antennas"], "/phy/num_antennas");
  f.phy = phy_from(cfg);
  f.goldenbaum.seq_len = cfg["goldenbaum"]["seq_len"].get<int>();
  f.goldenbaum.v_max = cfg["goldenbaum"]["v_max"].get<double>();
  f.rounds = t["rounds"].get<int>();
  f.learning_rate = t["learning_rate"].get<double>();
  f.momentum = t["momentum"].get<double>();
  f.batch_size = t["batch_size"].get<int>();
  f.partition = parse_partition(t["partition"].get<std::string>());
  f.areas = t["areas"].get<int>();
  f.aam_enabled = t["aam"].get<bool>();
  if (t["aam_alpha"] != "auto") f.aam_alpha = t["aam_alpha"].get<double>();
  if (t["aam_v0"] != "auto") f.aam_v0 = t["aam_v0"].get<double>();
  f.hidden = t["hidden"].get<int>();
  const auto& d = t["data"];
  f.data.per_class = d["per_class"].get<int>();
  f.data.test_per_class = d["test_per_class"].get<int>();
  f.data.dim = d["dim"].get<int>();
  f.data.classes = d["classes"].get<int>();
  f.data.separation = d["separation"].get<double>();
  f.validate();
  return f;
}

Artifact run_subcommand(const std::string& subcommand, const Json& resolved, std::uint64_t seed) {
  if (subcommand == "mse") return run_mse(resolved, seed);
  if (subcommand == "hist") return run_hist(resolved, seed);
  if (subcommand == "train") return run_train(resolved, seed);
  throw ConfigError("subcommand: unknown '" + subcommand + "'");
}

std::vector<Json> sweep_points(const Json& resolved) {
  const auto& grid = resolved["sweep"]["grid"];
  std::vector<std::pair<std::string, std::vector<Json>>> axes;
  std::size_t total = grid.empty() ? 0 : 1;
  for (const auto& [key, values] : grid.items()) {
    axes.emplace_back(key, std::vector<Json>(values.begin(), values.end()));
    total *= values.size();
    if (total > kMaxSweepPoints)
      fail("/sweep/grid", "more than " + std::to_string(kMaxSweepPoints) + " grid points");
  }
  std::vector<Json> points;
  points.reserve(total);
  for (std::size_t p = 0; p < total; ++p) {
    Json point = Json::object();
    std::size_t rest = p;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      point[it->first] = it->second[rest % it->second.size()];
      rest /= it->second.size();
    }
    points.push_back(std::move(point));
  }
  return points;
}

std::vector<std::filesystem::path> run(const ExperimentSpec& spec) {
  Json raw = spec.config_path.empty() ? Json::object() : parse_file(spec.config_path);
  for (const auto& o : spec.overrides) apply_override(raw, o);
  const Json resolved = resolve_config(raw);
  const std::string stem = spec.subcommand + "-" + config_hash(resolved) + "-s" + std::to_string(spec.seed);
  std::filesystem::create_directories(spec.out_dir);

  std::vector<std::filesystem::path> written;
  Json manifest = {{"schema_version", kSchemaVersion},
                   {"subcommand", spec.subcommand},
                   {"config_hash", config_hash(resolved)},
                   {"seed", spec.seed},
                   {"config", resolved}};

  if (spec.subcommand == "sweep") {
    const auto points = sweep_points(resolved);
    const std::string sub = resolved["sweep"]["subcommand"].get<std::string>();
    // Validate every point before running any of them.
    std::vector<Json> configs;
    for (const auto& point : points) {
      Json c = resolved;
      c["sweep"]["grid"] = Json::object();
      for (const auto& [key, value] : point.items()) apply_override(c, key + "=" + value.dump());
      configs.push_back(resolve_config(c));
    }
    if (points.empty()) return written;

    const auto dir = spec.out_dir / stem;
    std::filesystem::create_directories(dir);
    std::vector<Artifact> artifacts(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
      artifacts[i] = run_subcommand(sub, configs[i], derive_seed(spec.seed, i));
    });

    std::string header;
    std::string combined;
    Json point_list = Json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "point-%05zu.csv", i);
      write_file(dir / name, artifacts[i].csv);
      written.push_back(dir / name);
      if (!artifacts[i].summary.is_null()) {
        const auto summary = std::filesystem::path(name).replace_extension(".summary.json");
        write_file(dir / summary, artifacts[i].summary.dump(2) + "\n");
        written.push_back(dir / summary);
      }
      const std::string body = csv_body(artifacts[i].csv, &header);
      std::istringstream lines(body);
      std::string line;
      while (std::getline(lines, line)) combined += std::to_string(i) + "," + line + "\n";
      point_list.push_back({{"point", i}, {"values", points[i]}, {"file", (std::filesystem::path(stem) / name).string()}});
    }
    write_file(spec.out_dir / (stem + ".csv"), provenance(resolved, spec.seed) + "point," + header + "\n" + combined);
    written.push_back(spec.out_dir / (stem + ".csv"));
    manifest["points"] = point_list;
  } else {
    const Artifact art = run_subcommand(spec.subcommand, resolved, spec.seed);
    write_file(spec.out_dir / (stem + ".csv"), art.csv);
    written.push_back(spec.out_dir / (stem + ".csv"));
    if (!art.summary.is_null()) {
      write_file(spec.out_dir / (stem + ".summary.json"), art.summary.dump(2) + "\n");
      written.push_back(spec.out_dir / (stem + ".summary.json"));
    }
  }
  Json files = Json::array();
  for (const auto& w : written) files.push_back(std::filesystem::relative(w, spec.out_dir).string());
  manifest["artifacts"] = files;
  write_file(spec.out_dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");
  written.push_back(spec.out_dir / (stem + ".manifest.json"));
  return written;
}

}  // namespace oac
