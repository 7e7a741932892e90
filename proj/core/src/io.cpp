#include "levelstat/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "levelstat/error.hpp"

namespace levelstat::io {
namespace {

constexpr double kDuplicateTolerance = 1e-9;
constexpr double kMagnitudeTolerance = 1e-6;
constexpr double kGridTolerance = 1e-9;

const char* const kResonanceHeader2 = "realization_id,frequency_ghz";
const char* const kResonanceHeader3 = "realization_id,frequency_ghz,width_ghz";
const char* const kSParamHeader =
    "realization_id,frequency_ghz,re_saa,im_saa,re_sab,im_sab,re_sba,im_sba,re_sbb,im_sbb";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    const auto end = text.find('\n');
    ++number;
    lines.push_back({number, trim(text.substr(0, end))});
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string normalized_header(std::string_view line) {
  line.remove_prefix(1);
  std::string out;
  for (char c : line)
    if (c != ' ' && c != '\t') out.push_back(c);
  return out;
}

// Checks the strictly-increasing rule for one more row of a realization.
void check_order(std::map<std::int64_t, double>& last, std::int64_t id, double frequency, const std::string& source,
                 std::size_t line) {
  const auto it = last.find(id);
  if (it != last.end()) {
    const std::string where = source + ":" + std::to_string(line) + " (realization " + std::to_string(id) + ")";
    if (std::abs(frequency - it->second) <= kDuplicateTolerance)
      throw DataError("duplicate frequency " + format_double(frequency) + " GHz at " + where);
    if (frequency < it->second)
      throw DataError("ordering violation at " + where + ": " + format_double(frequency) + " GHz follows " +
                      format_double(it->second) + " GHz");
  }
  last[id] = frequency;
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) throw DomainError("cannot format a non-finite value");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw NumericalError("to_chars failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view field, const std::string& source, std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
    throw ParseError(source, line, "not a finite number: '" + std::string(field) + "'");
  return value;
}

std::int64_t parse_int(std::string_view field, const std::string& source, std::size_t line) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(source, line, "not an integer: '" + std::string(field) + "'");
  return value;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::vector<std::int64_t> ResonanceTable::realizations() const {
  std::vector<std::int64_t> ids;
  for (const auto& r : rows)
    if (std::find(ids.begin(), ids.end(), r.realization_id) == ids.end()) ids.push_back(r.realization_id);
  return ids;
}

LevelSequence ResonanceTable::sequence(std::int64_t realization_id) const {
  std::vector<double> levels;
  for (const auto& r : rows)
    if (r.realization_id == realization_id) levels.push_back(r.frequency);
  if (levels.empty()) throw DataError("no rows for realization " + std::to_string(realization_id));
  return LevelSequence(std::move(levels), StatKind::Ingested);
}

ResonanceTable parse_resonances(std::string_view text, const std::string& source, ResonanceFormat format) {
  ResonanceTable table;
  std::map<std::int64_t, double> last;
  const auto lines = split_lines(text);
  if (format == ResonanceFormat::Plain) {
    for (const auto& line : lines) {
      if (line.text.empty() || line.text.front() == '#') continue;
      const double f = parse_double(line.text, source, line.number);
      check_order(last, 0, f, source, line.number);
      table.rows.push_back({0, f, std::nullopt});
    }
    return table;
  }
  if (lines.empty() || lines.front().text.empty() || lines.front().text.front() != '#')
    throw ParseError(source, 1, "missing '#' header line");
  const std::string header = normalized_header(lines.front().text);
  std::size_t columns = 0;
  if (header == kResonanceHeader2) columns = 2;
  else if (header == kResonanceHeader3) columns = 3;
  else throw ParseError(source, 1, "unexpected header '" + header + "'");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.text.empty()) continue;
    const auto fields = split_fields(line.text);
    if (fields.size() != columns)
      throw ParseError(source, line.number, "expected " + std::to_string(columns) + " fields, got " +
                                                std::to_string(fields.size()));
    ResonanceRow row;
    row.realization_id = parse_int(fields[0], source, line.number);
    row.frequency = parse_double(fields[1], source, line.number);
    if (columns == 3 && !fields[2].empty()) {
      row.width = parse_double(fields[2], source, line.number);
      if (*row.width < 0.0) throw ParseError(source, line.number, "negative width");
    }
    check_order(last, row.realization_id, row.frequency, source, line.number);
    table.rows.push_back(row);
  }
  return table;
}

ResonanceTable ingest_resonances(const std::filesystem::path& path, ResonanceFormat format) {
  return parse_resonances(read_file(path), path.string(), format);
}

std::string format_resonances(const ResonanceTable& table) {
  const bool widths = std::any_of(table.rows.begin(), table.rows.end(), [](const auto& r) { return r.width.has_value(); });
  std::string out = std::string("# ") + (widths ? kResonanceHeader3 : kResonanceHeader2) + "\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.realization_id) + "," + format_double(r.frequency);
    if (widths) out += "," + (r.width ? format_double(*r.width) : std::string());
    out += "\n";
  }
  return out;
}

void write_resonances(const std::filesystem::path& path, const ResonanceTable& table) {
  write_atomic(path, format_resonances(table));
}

ResonanceTable resonance_table(std::span<const LevelSequence> sequences) {
  ResonanceTable table;
  for (std::size_t i = 0; i < sequences.size(); ++i)
    for (double f : sequences[i].levels()) table.rows.push_back({static_cast<std::int64_t>(i), f, std::nullopt});
  return table;
}

std::vector<scattering::SMatrixSeries> SParamTable::series() const {
  std::vector<scattering::SMatrixSeries> out;
  std::map<std::int64_t, std::size_t> index;
  for (const auto& r : rows) {
    auto [it, inserted] = index.try_emplace(r.realization_id, out.size());
    if (inserted) {
      out.emplace_back();
      out.back().realization_id = r.realization_id;
    }
    out[it->second].grid.push_back(r.frequency);
    out[it->second].entries.push_back(r.s);
  }
  return out;
}

SParamTable sparam_table(std::span<const scattering::SMatrixSeries> series) {
  SParamTable table;
  for (const auto& s : series) {
    if (s.grid.size() != s.entries.size()) throw ConsistencyError("entries and grid differ in length");
    for (std::size_t g = 0; g < s.grid.size(); ++g) table.rows.push_back({s.realization_id, s.grid[g], s.entries[g]});
  }
  return table;
}

SParamTable parse_sparams(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front().text.empty() || lines.front().text.front() != '#')
    throw ParseError(source, 1, "missing '#' header line");
  if (normalized_header(lines.front().text) != kSParamHeader)
    throw ParseError(source, 1, "unexpected header '" + normalized_header(lines.front().text) + "'");
  SParamTable table;
  std::map<std::int64_t, double> last;
  std::map<std::int64_t, std::vector<std::pair<double, std::size_t>>> grids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.text.empty()) continue;
    const auto fields = split_fields(line.text);
    if (fields.size() != 10)
      throw ParseError(source, line.number, "expected 10 fields, got " + std::to_string(fields.size()));
    SParamRow row;
    row.realization_id = parse_int(fields[0], source, line.number);
    row.frequency = parse_double(fields[1], source, line.number);
    scattering::Complex* entries[] = {&row.s.aa, &row.s.ab, &row.s.ba, &row.s.bb};
    for (int k = 0; k < 4; ++k) {
      *entries[k] = {parse_double(fields[2 + 2 * k], source, line.number),
                     parse_double(fields[3 + 2 * k], source, line.number)};
      if (std::abs(*entries[k]) > 1.0 + kMagnitudeTolerance)
        throw DataError("magnitude " + format_double(std::abs(*entries[k])) + " exceeds 1 at " + source + ":" +
                        std::to_string(line.number));
    }
    check_order(last, row.realization_id, row.frequency, source, line.number);
    grids[row.realization_id].push_back({row.frequency, line.number});
    table.rows.push_back(row);
  }
  for (const auto& [id, grid] : grids) {
    if (grid.size() < 2) continue;
    const double step = (grid.back().first - grid.front().first) / static_cast<double>(grid.size() - 1);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double expected = grid.front().first + step * static_cast<double>(g);
      if (std::abs(grid[g].first - expected) > kGridTolerance)
        throw DataError("non-uniform grid at " + source + ":" + std::to_string(grid[g].second) + " (realization " +
                        std::to_string(id) + ")");
    }
  }
  return table;
}

SParamTable ingest_sparams(const std::filesystem::path& path) { return parse_sparams(read_file(path), path.string()); }

std::string format_sparams(const SParamTable& table) {
  std::string out = std::string("# ") + kSParamHeader + "\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.realization_id) + "," + format_double(r.frequency);
    for (const auto& z : {r.s.aa, r.s.ab, r.s.ba, r.s.bb}) out += "," + format_double(z.real()) + "," + format_double(z.imag());
    out += "\n";
  }
  return out;
}

void write_sparams(const std::filesystem::path& path, const SParamTable& table) {
  write_atomic(path, format_sparams(table));
}

}  // namespace levelstat::io
