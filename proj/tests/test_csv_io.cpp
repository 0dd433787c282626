#include <sstream>

#include "doctest.h"
#include "fs_helpers.hpp"
#include "oracles.hpp"
#include "cropcast/csv_io.hpp"
#include "cropcast/error.hpp"

using namespace cropcast;
using estimation::ClimateYieldRecord;
using estimation::DiscretizedSeries;

namespace {

io::LoadedTable parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_csv(in, "t.csv");
}

}  // namespace

TEST_CASE("bundled fixture loads in labelled mode") {
  const auto table = io::load_csv(CROPCAST_FIXTURE);
  REQUIRE(std::holds_alternative<DiscretizedSeries>(table));
  const auto& s = std::get<DiscretizedSeries>(table);
  CHECK(s.size() == 32);
  CHECK(s.years.front() == 1990);
  CHECK(s.years.back() == 2021);
  CHECK(s.states == testing::kFixtureStates);
  CHECK(s.observations == testing::kFixtureObservations);
  CHECK_FALSE(s.thresholds.has_value());
}

TEST_CASE("raw mode with columns in any order") {
  const auto table = parse(
      "maize_yield, year,temperature_c,rainfall_mm\n"
      "1.5,2000,26.1,1200\n"
      "\n"
      "2.0,2001,26.4,1100.5\r\n");
  REQUIRE(std::holds_alternative<std::vector<ClimateYieldRecord>>(table));
  const auto& rows = std::get<std::vector<ClimateYieldRecord>>(table);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].year == 2001);
  CHECK(rows[1].rainfall_mm == 1100.5);
  CHECK(rows[1].temperature_c == 26.4);
  CHECK(rows[1].maize_yield == 2.0);
}

TEST_CASE("parse errors") {
  SUBCASE("empty file is an error, not an empty series") {
    CHECK_THROWS_WITH_AS(parse(""), doctest::Contains("empty"), InputError);
    CHECK_THROWS_AS(parse("year,state,observation\n"), InputError);
  }
  SUBCASE("out-of-order year names the row") {
    CHECK_THROWS_WITH_AS(parse("year,state,observation\n2001,1,L\n2000,1,L\n"),
                         doctest::Contains("t.csv:3: year 2000 is out of order"), InputError);
  }
  SUBCASE("duplicate year") {
    CHECK_THROWS_WITH_AS(parse("year,state,observation\n2001,1,L\n2001,2,M\n"),
                         doctest::Contains("t.csv:3: duplicate year"), InputError);
  }
  SUBCASE("non-numeric cell") {
    CHECK_THROWS_WITH_AS(
        parse("year,rainfall_mm,temperature_c,maize_yield\n2000,lots,26,1.0\n"),
        doctest::Contains("t.csv:2: column rainfall_mm"), InputError);
    CHECK_THROWS_AS(parse("year,state,observation\n2000.5,1,L\n"), InputError);
  }
  SUBCASE("unknown column") {
    CHECK_THROWS_WITH_AS(parse("year,state,observation,notes\n2000,1,L,x\n"),
                         doctest::Contains("unknown columns: notes"), InputError);
  }
  SUBCASE("labels out of range") {
    CHECK_THROWS_WITH_AS(parse("year,state,observation\n2000,5,L\n"),
                         doctest::Contains("state must be 1-4"), InputError);
    CHECK_THROWS_WITH_AS(parse("year,state,observation\n2000,0,L\n"),
                         doctest::Contains("state must be 1-4"), InputError);
    CHECK_THROWS_WITH_AS(parse("year,state,observation\n2000,1,X\n"),
                         doctest::Contains("observation must be L, M or H"), InputError);
  }
  SUBCASE("ragged row") {
    CHECK_THROWS_WITH_AS(parse("year,state,observation\n2000,1\n"),
                         doctest::Contains("expected 3 fields"), InputError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(io::load_csv("/nonexistent/file.csv"), InputError);
  }
}

TEST_CASE("write_series_csv round-trips") {
  const auto original = std::get<DiscretizedSeries>(io::load_csv(CROPCAST_FIXTURE));
  std::ostringstream out;
  io::write_series_csv(out, original);
  std::istringstream in(out.str());
  const auto back = std::get<DiscretizedSeries>(io::parse_csv(in));
  CHECK(back == original);
  CHECK(out.str() == testing::read_file(CROPCAST_FIXTURE));
}
