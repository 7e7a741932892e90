#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "levelstat/config.hpp"
#include "levelstat/random.hpp"

/// Subcommand orchestration. Every subcommand returns a PlotBundle: numeric
/// tables plus a manifest tying each table to the operation, configuration
/// and seed that produced it.
namespace levelstat::pipeline {

enum class Provenance {
  Estimate,    // statistic measured on data or simulated spectra
  Theory,      // analytic curve
  MonteCarlo,  // synthetic random ensemble
  Model,       // deterministic numerical model (billiard spectra)
};

std::string to_string(Provenance p);

struct Table {
  std::string name;
  std::string description;
  Provenance provenance = Provenance::Estimate;
  std::string operation;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::optional<RandomSeed> seed;
};

struct PlotBundle {
  std::string subcommand;
  RandomSeed seed;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, double>> results;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::string> diagnostics;
  // Extra files written verbatim (name, content), e.g. simulated S-parameters.
  std::vector<std::pair<std::string, std::string>> files;

  const Table& table(std::string_view name) const;
  double result(std::string_view name) const;

  std::string manifest_json() const;
  /// CSV text of one table: '#' header with the column names, then rows.
  static std::string format_table(const Table& table);
  /// Writes <name>.csv for every table, the extra files, then manifest.json,
  /// each atomically. Creates `dir` if needed.
  void write(const std::filesystem::path& dir) const;
};

const std::vector<std::string>& subcommands();

/// Throws ConfigError for an unknown subcommand or an invalid config.
PlotBundle run_pipeline(const config::AnalysisConfig& config, std::string_view subcommand);

}  // namespace levelstat::pipeline
