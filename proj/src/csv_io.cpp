#include "cropcast/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "cropcast/error.hpp"

namespace cropcast::io {

namespace {

const std::set<std::string> kRawColumns = {"year", "rainfall_mm", "temperature_c",
                                           "maize_yield"};
const std::set<std::string> kLabelledColumns = {"year", "state", "observation"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

class RowError {
 public:
  RowError(const std::string& source, std::size_t line) : source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw InputError(source_ + ":" + std::to_string(line_) + ": " + message);
  }

 private:
  const std::string& source_;
  std::size_t line_;
};

int parse_int(const std::string& cell, const std::string& column, const RowError& where) {
  int value = 0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    where.fail("column " + column + " expects an integer, got '" + cell + "'");
  }
  return value;
}

double parse_real(const std::string& cell, const std::string& column, const RowError& where) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    where.fail("column " + column + " expects a number, got '" + cell + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string::npos ? comma : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

LoadedTable parse_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_number = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw InputError(source_name + ": file is empty (header row required)");

  std::map<std::string, std::size_t> columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!columns.emplace(header[c], c).second) {
      throw InputError(source_name + ": duplicate column '" + header[c] + "'");
    }
  }
  std::set<std::string> present;
  for (const auto& [name, index] : columns) present.insert(name);

  const bool raw = present == kRawColumns;
  const bool labelled = present == kLabelledColumns;
  if (!raw && !labelled) {
    std::string unknown;
    for (const auto& name : present) {
      if (!kRawColumns.count(name) && !kLabelledColumns.count(name)) {
        unknown += (unknown.empty() ? "" : ", ") + name;
      }
    }
    throw InputError(source_name + ": header must be either year,rainfall_mm,temperature_c,"
                     "maize_yield or year,state,observation" +
                     (unknown.empty() ? std::string() : " (unknown columns: " + unknown + ")"));
  }

  std::vector<estimation::ClimateYieldRecord> records;
  estimation::DiscretizedSeries series;
  std::optional<int> previous_year;

  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const RowError where(source_name, line_number);
    const auto cells = split_fields(line);
    if (cells.size() != header.size()) {
      where.fail("expected " + std::to_string(header.size()) + " fields, found " +
                 std::to_string(cells.size()));
    }
    const auto cell = [&](const char* name) -> const std::string& {
      return cells[columns.at(name)];
    };

    const int year = parse_int(cell("year"), "year", where);
    if (previous_year && year == *previous_year) {
      where.fail("duplicate year " + std::to_string(year));
    }
    if (previous_year && year < *previous_year) {
      where.fail("year " + std::to_string(year) + " is out of order (follows " +
                 std::to_string(*previous_year) + ")");
    }
    previous_year = year;

    if (raw) {
      estimation::ClimateYieldRecord rec;
      rec.year = year;
      rec.rainfall_mm = parse_real(cell("rainfall_mm"), "rainfall_mm", where);
      rec.temperature_c = parse_real(cell("temperature_c"), "temperature_c", where);
      rec.maize_yield = parse_real(cell("maize_yield"), "maize_yield", where);
      if (rec.rainfall_mm < 0.0) where.fail("rainfall_mm must be non-negative");
      if (rec.maize_yield < 0.0) where.fail("maize_yield must be non-negative");
      records.push_back(rec);
    } else {
      const int state = parse_int(cell("state"), "state", where);
      if (state < 1 || state > 4) {
        where.fail("state must be 1-4, got " + std::to_string(state));
      }
      const auto symbol = estimation::yield_levels().index_of(cell("observation"));
      if (!symbol) {
        where.fail("observation must be L, M or H, got '" + cell("observation") + "'");
      }
      series.years.push_back(year);
      series.states.push_back(static_cast<std::size_t>(state - 1));
      series.observations.push_back(*symbol);
    }
  }

  if (raw) {
    if (records.empty()) throw InputError(source_name + ": no data rows");
    return records;
  }
  if (series.size() == 0) throw InputError(source_name + ": no data rows");
  return series;
}

LoadedTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path.string());
  return parse_csv(in, path.string());
}

void write_series_csv(std::ostream& out, const estimation::DiscretizedSeries& series) {
  out << "year,state,observation\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out << series.years[t] << ',' << series.states[t] + 1 << ','
        << estimation::yield_levels().label(series.observations[t]) << '\n';
  }
}

}  // namespace cropcast::io
