#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levelstat/level_sequence.hpp"
#include "levelstat/scattering.hpp"

/// Text formats: comma separated, one leading header line starting with
/// '#', '.' as decimal point, doubles written in shortest round-trip form.
namespace levelstat::io {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict parse of a whole field; `source` and `line` only label errors.
double parse_double(std::string_view field, const std::string& source, std::size_t line);
std::int64_t parse_int(std::string_view field, const std::string& source, std::size_t line);

/// Writes to a temporary file next to `path`, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct ResonanceRow {
  std::int64_t realization_id = 0;
  double frequency = 0.0;  // GHz
  std::optional<double> width;  // GHz
};

struct ResonanceTable {
  std::vector<ResonanceRow> rows;

  /// Distinct ids in order of first appearance.
  std::vector<std::int64_t> realizations() const;
  LevelSequence sequence(std::int64_t realization_id) const;
};

enum class ResonanceFormat {
  Csv,    // "# realization_id,frequency_ghz[,width_ghz]" header
  Plain,  // one frequency per line, single realization 0, '#' comments
};

/// Throws ParseError with the line number for malformed input and DataError
/// naming the row for ordering violations or duplicates closer than 1e-9 GHz.
ResonanceTable ingest_resonances(const std::filesystem::path& path, ResonanceFormat format = ResonanceFormat::Csv);
ResonanceTable parse_resonances(std::string_view text, const std::string& source,
                                ResonanceFormat format = ResonanceFormat::Csv);

std::string format_resonances(const ResonanceTable& table);
void write_resonances(const std::filesystem::path& path, const ResonanceTable& table);

/// Realization i of `sequences` gets id i.
ResonanceTable resonance_table(std::span<const LevelSequence> sequences);

struct SParamRow {
  std::int64_t realization_id = 0;
  double frequency = 0.0;  // GHz
  scattering::SMatrix s;
};

struct SParamTable {
  std::vector<SParamRow> rows;

  /// One series per realization, in order of first appearance.
  std::vector<scattering::SMatrixSeries> series() const;
};

SParamTable sparam_table(std::span<const scattering::SMatrixSeries> series);

/// As ingest_resonances, plus a magnitude check |S_ij| <= 1 + 1e-6 and a
/// uniform grid per realization to within 1e-9 GHz.
SParamTable ingest_sparams(const std::filesystem::path& path);
SParamTable parse_sparams(std::string_view text, const std::string& source);

std::string format_sparams(const SParamTable& table);
void write_sparams(const std::filesystem::path& path, const SParamTable& table);

}  // namespace levelstat::io
