// levelstat <subcommand> --config <path> [--seed N] [--out DIR]
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
// failure, 1 anything unexpected.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "levelstat/config.hpp"
#include "levelstat/error.hpp"
#include "levelstat/io.hpp"
#include "levelstat/pipeline.hpp"

namespace {

int exit_code(const levelstat::Error& e) {
  return e.error_class() == levelstat::ErrorClass::Validation ? 2 : 3;
}

std::string subcommand_list() {
  std::string out;
  for (const auto& name : levelstat::pipeline::subcommands()) out += (out.empty() ? "" : ", ") + name;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral statistics and elastic enhancement factor toolkit"};
  std::string subcommand;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("subcommand", subcommand, "one of: " + subcommand_list())->required();
  app.add_option("--config", config_path, "key = value configuration file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "master seed, overrides seed_master");
  auto* out_opt = app.add_option("--out", out_dir, "output directory, overrides output_dir");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto config = levelstat::config::load_config(config_path);
    if (*seed_opt) config.seed_master = seed;
    if (*out_opt) config.output_dir = out_dir;
    const auto bundle = levelstat::pipeline::run_pipeline(config, subcommand);
    bundle.write(config.output_dir);
    for (const auto& d : bundle.diagnostics) std::cerr << "note: " << d << "\n";
    for (const auto& [key, value] : bundle.results) std::cout << key << " = " << levelstat::io::format_double(value) << "\n";
    for (const auto& [key, value] : bundle.notes) std::cout << key << " = " << value << "\n";
    std::cout << "wrote " << bundle.tables.size() << " tables to " << config.output_dir << "\n";
    return 0;
  } catch (const levelstat::Error& e) {
    std::cerr << "levelstat: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "levelstat: internal error: " << e.what() << "\n";
    return 1;
  }
}
