#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "oac/experiment.hpp"
#include "oac/numerals.hpp"

namespace {

std::vector<int> parse_numerals(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int x = 0;
    try {
      x = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw oac::ConfigError("numerals: cannot parse '" + item + "'");
    out.push_back(x);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced-numeral over-the-air computation toolkit"};
  app.require_subcommand(1);

  double v = 0.0;
  int beta = 5;
  int digits = 2;
  double vmax = 1.0;
  std::string numerals;

  auto* enc = app.add_subcommand("encode", "Encode a real value into balanced numerals");
  enc->add_option("--v", v, "Value")->required();
  auto* dec = app.add_subcommand("decode", "Decode numerals (most significant first)");
  dec->add_option("--numerals", numerals, "Comma-separated numerals, most significant first")->required();
  for (auto* sub : {enc, dec}) {
    sub->add_option("--beta", beta, "Odd base")->capture_default_str();
    sub->add_option("--digits", digits, "Numerals per value")->capture_default_str();
    sub->add_option("--vmax", vmax, "Absolute maximum")->capture_default_str();
  }

  oac::ExperimentSpec spec;
  std::string config_path;
  std::string out_dir = ".";
  for (const char* name : {"mse", "hist", "train", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", spec.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--set", spec.overrides, "Override dotted.key=value")->take_all();
  }
  app.get_subcommand("mse")->description("Monte-Carlo and closed-form BMSE");
  app.get_subcommand("hist")->description("Error histogram and skewness");
  app.get_subcommand("train")->description("Federated training over the simulated uplink");
  app.get_subcommand("sweep")->description("Cartesian sweep of another subcommand");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? oac::kExitOk : oac::kExitConfig;
  }

  try {
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "encode") {
      const oac::CodecConfig cfg(beta, digits, vmax);
      oac::Json out = {{"numerals", oac::encode(v, cfg).msb_first()}};
      std::cout << out.dump() << "\n";
    } else if (name == "decode") {
      const oac::CodecConfig cfg(beta, digits, vmax);
      const auto msb = parse_numerals(numerals);
      if (static_cast<int>(msb.size()) != digits)
        throw oac::ConfigError("numerals: expected " + std::to_string(digits) + " values, got " +
                               std::to_string(msb.size()));
      const auto seq = oac::NumeralSeq::from_msb_first(msb);
      std::cout << "{\"value\":" << oac::format_real(oac::decode(seq, cfg)) << "}\n";
    } else {
      spec.subcommand = name;
      spec.config_path = config_path;
      spec.out_dir = out_dir;
      for (const auto& path : oac::run(spec)) std::cout << path.string() << "\n";
    }
  } catch (const oac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return oac::kExitConfig;
  } catch (const oac::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return oac::kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return oac::kExitRuntime;
  }
  return oac::kExitOk;
}
