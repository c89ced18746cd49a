#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "oac/experiment.hpp"

using namespace oac;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string config_error(const Json& raw) {
  try {
    resolve_config(raw);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("oac-test-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("defaults resolve to themselves") {
  CHECK(resolve_config(Json::object()) == default_config());
  CHECK(config_hash(resolve_config(Json::object())) == config_hash(default_config()));
  CHECK(config_hash(default_config()).size() == 16);
}

TEST_CASE("schema violations name the field") {
  CHECK(config_error({{"codec", {{"betta", 5}}}}) == "config.codec.betta: unknown key");
  CHECK(config_error({{"codec", {{"beta", "five"}}}}).rfind("config.codec.beta: expected integer", 0) == 0);
  CHECK(config_error({{"phy", {{"snr_db", "loud"}}}}).rfind("config.phy.snr_db:", 0) == 0);
  CHECK(config_error({{"phy", 3}}).rfind("config.phy: expected object", 0) == 0);
  CHECK(config_error({{"mc", {{"trials", {1, 2}}}}}).rfind("config.mc.trials:", 0) == 0);
  CHECK(config_error({{"codec", {{"beta", {3, "x"}}}}}).rfind("config.codec.beta.1:", 0) == 0);
  CHECK(config_error({{"scheme", "tci"}}).find("scheme") != std::string::npos);
  CHECK(config_error({{"schema_version", 2}}).rfind("config.schema_version", 0) == 0);
  CHECK(config_error({{"sweep", {{"grid", {{"codec.beta", 3}}}}}}).rfind("config.sweep.grid.codec.beta", 0) == 0);
  CHECK(config_error({{"codec", {{"v_max", "auto"}}}}).empty());
  CHECK(config_error({{"codec", {{"v_max", 0.5}}}}).empty());
}

TEST_CASE("overrides") {
  Json c = Json::object();
  apply_override(c, "codec.beta=7");
  apply_override(c, "scheme=goldenbaum");
  apply_override(c, "codec.digits=[1,2]");
  CHECK(c["codec"]["beta"] == 7);
  CHECK(c["scheme"] == "goldenbaum");
  CHECK(c["codec"]["digits"] == Json::array({1, 2}));
  CHECK_THROWS_AS(apply_override(c, "novalue"), ConfigError);
}

TEST_CASE("semantic errors surface as config errors") {
  Json c = default_config();
  c["codec"]["beta"] = 4;
  try {
    run_subcommand("mse", resolve_config(c), 1);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("beta") != std::string::npos);
  }
  c["codec"]["beta"] = Json::array({3, 5});
  CHECK_THROWS_AS(feel_from(resolve_config(c)), ConfigError);
}

TEST_CASE("sweep grid expansion") {
  Json c = default_config();
  c["sweep"]["grid"] = {{"codec.beta", {3, 5, 7}}, {"codec.digits", {1, 2}}, {"phy.num_antennas", Json::array()}};
  for (int r = 1; r <= 25; ++r) c["sweep"]["grid"]["phy.num_antennas"].push_back(r);
  const auto pts = sweep_points(resolve_config(c));
  CHECK(pts.size() == 150);
  CHECK(pts.front() == Json{{"codec.beta", 3}, {"codec.digits", 1}, {"phy.num_antennas", 1}});
  CHECK(pts.back() == Json{{"codec.beta", 7}, {"codec.digits", 2}, {"phy.num_antennas", 25}});

  c["sweep"]["grid"] = Json::object();
  CHECK(sweep_points(resolve_config(c)).empty());

  Json big = default_config();
  big["sweep"]["grid"] = {{"mc.trials", Json::array()}, {"phy.snr_db", Json::array()}};
  for (int i = 0; i < 101; ++i) {
    big["sweep"]["grid"]["mc.trials"].push_back(i + 1);
    big["sweep"]["grid"]["phy.snr_db"].push_back(i);
  }
  CHECK_THROWS_AS(sweep_points(resolve_config(big)), ConfigError);
}

TEST_CASE("mse artifact layout") {
  Json c = default_config();
  c["mc"]["trials"] = 500;
  c["scheme"] = {"balanced", "goldenbaum"};
  c["codec"]["digits"] = {1, 2};
  const auto resolved = resolve_config(c);
  const auto art = run_subcommand("mse", resolved, 9);
  std::istringstream is(art.csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "# schema_version=1 config_hash=" + config_hash(resolved) + " seed=9");
  std::getline(is, line);
  CHECK(line == "scheme,beta,D,R,K,snr_db,distribution,bmse_sim,ci,bmse_theory");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    if (rows == 3) CHECK(line.rfind("goldenbaum,,,1,25,20,uniform,", 0) == 0);
    if (rows == 3) CHECK(line.back() == ',');
  }
  CHECK(rows == 3);
  CHECK(art.summary.is_null());
}

TEST_CASE("runs are byte-identical and named from hash and seed") {
  ExperimentSpec spec;
  spec.subcommand = "hist";
  spec.out_dir = scratch("hist");
  spec.seed = 4;
  spec.overrides = {"mc.trials=2000", "mc.bins=10"};
  const auto first = run(spec);
  const std::string a = slurp(first.front());
  const auto second = run(spec);
  CHECK(first == second);
  CHECK(slurp(second.front()) == a);
  const auto hash = config_hash(resolve_config({{"mc", {{"trials", 2000}, {"bins", 10}}}}));
  CHECK(first.front().filename() == "hist-" + hash + "-s4.csv");
  const auto manifest = Json::parse(slurp(first.back()));
  CHECK(manifest["config"]["mc"]["trials"] == 2000);
  CHECK(manifest["seed"] == 4);

  spec.seed = 5;
  CHECK(slurp(run(spec).front()) != a);
}

TEST_CASE("sweep writes one file per point and a combined table") {
  ExperimentSpec spec;
  spec.subcommand = "sweep";
  spec.out_dir = scratch("sweep");
  spec.overrides = {"mc.trials=300", "sweep.grid.codec.beta=[3,5]", "sweep.grid.phy.num_antennas=[1,2]"};
  const auto files = run(spec);
  REQUIRE(files.size() == 6);
  const std::string combined = slurp(files[4]);
  std::istringstream is(combined);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) ++n;
  CHECK(n == 2 + 4);
  CHECK(combined.find("point,scheme,beta,D,R,") != std::string::npos);
  CHECK(slurp(run(spec)[4]) == combined);

  ExperimentSpec empty;
  empty.subcommand = "sweep";
  empty.out_dir = scratch("empty");
  CHECK(run(empty).empty());

  ExperimentSpec bad = spec;
  bad.overrides = {"sweep.grid.codec.nope=[1]"};
  CHECK_THROWS_AS(run(bad), ConfigError);
}

TEST_CASE("train artifact and summary") {
  ExperimentSpec spec;
  spec.subcommand = "train";
  spec.out_dir = scratch("train");
  spec.overrides = {"train.rounds=3",       "phy.num_eds=5",        "train.data.per_class=20",
                    "train.data.dim=4",     "train.data.classes=3", "train.data.test_per_class=5",
                    "train.aam=true"};
  const auto files = run(spec);
  REQUIRE(files.size() == 3);
  const std::string csv = slurp(files[0]);
  CHECK(csv.find("round,v_max_used,loss,test_accuracy,gradient_norm,bmse_proxy\n0,1,") != std::string::npos);
  const auto summary = Json::parse(slurp(files[1]));
  CHECK(summary["rounds"] == 3);
  CHECK(summary["config"]["train"]["aam"] == true);
  CHECK(slurp(run(spec)[0]) == csv);
}

TEST_CASE("real formatting") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(20.0) == "20");
}

}
