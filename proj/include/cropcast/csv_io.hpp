#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "cropcast/estimation.hpp"

namespace cropcast::io {

// Raw mode:      year,rainfall_mm,temperature_c,maize_yield
// Labelled mode: year,state,observation   (state 1-4, observation L/M/H)
// Column order is free; the header decides the mode.
using LoadedTable =
    std::variant<std::vector<estimation::ClimateYieldRecord>, estimation::DiscretizedSeries>;

LoadedTable parse_csv(std::istream& in, const std::string& source_name = "<input>");
LoadedTable load_csv(const std::filesystem::path& path);

// Writes a series in labelled mode so it can be loaded back.
void write_series_csv(std::ostream& out, const estimation::DiscretizedSeries& series);

// Splits one line on commas and trims surrounding whitespace.
std::vector<std::string> split_fields(const std::string& line);

}  // namespace cropcast::io
