#pragma once

// Experiment runner behind the CLI: strict JSON configuration, seeded
// subcommands and deterministic CSV/JSON artifacts.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "oac/feel.hpp"
#include "oac/stats.hpp"

namespace oac {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kMaxSweepPoints = 10000;

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Fully populated configuration with every default spelled out.
Json default_config();

// Checks `raw` against the schema (unknown keys and wrong types are
// ConfigErrors naming the full path) and fills in defaults.
Json resolve_config(const Json& raw);

// Applies "dotted.path=value" overrides; value is parsed as JSON when it
// parses, else taken as a string.
void apply_override(Json& config, const std::string& assignment);

// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const Json& resolved);

// %.17g
std::string format_real(double x);

// Typed views of a resolved configuration (array-valued fields must be
// scalar here).
CodecConfig codec_from(const Json& resolved);
PhyConfig phy_from(const Json& resolved);
FeelConfig feel_from(const Json& resolved);

struct Artifact {
  std::string csv;
  Json summary;  // null unless the subcommand produces one
};

// Runs one of mse, hist, train on a resolved config. The CSV starts with a
// "# schema_version=... config_hash=... seed=..." provenance line.
Artifact run_subcommand(const std::string& subcommand, const Json& resolved, std::uint64_t seed);

// Cartesian grid points of sweep.grid, in key order.
std::vector<Json> sweep_points(const Json& resolved);

struct ExperimentSpec {
  std::string subcommand;  // mse, hist, train, sweep
  std::filesystem::path config_path;  // empty means defaults
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;
  std::vector<std::string> overrides;
};

// Loads, validates and runs; writes artifacts named
// <subcommand>-<hash>-s<seed>.* into out_dir plus a manifest. Returns the
// list of written files.
std::vector<std::filesystem::path> run(const ExperimentSpec& spec);

}  // namespace oac
