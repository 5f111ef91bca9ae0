#include <filesystem>
#include <string>

#include "doctest.h"
#include "stormreach/errors.hpp"
#include "stormreach/nowcast.hpp"
#include "stormreach/text_format.hpp"

using namespace stormreach;
using namespace std::chrono;

namespace {

const IssueTime kT0 = sys_days{year{2016} / December / 19} + hours(10) + minutes(30);

std::string header() { return std::string(nowcast_header()) + "\n"; }

const char* kFullRow =
    "1;120;0.5;39.0;12.3;0.3;0.7;38.8;39.2;45;30;0.6;39.1;0.7;39.2;0.8;39.3;0.9;39.4;1.0;39.5;1.1;39.6\n";

}  // namespace

TEST_CASE("header has the 23 schema columns") {
  const auto cols = split(nowcast_header(), ';');
  CHECK(cols.size() == 23);
  CHECK(cols.front() == "NUM");
  CHECK(cols[10] == "VKMH");
  CHECK(cols.back() == "LAT60");
}

TEST_CASE("full row maps field by field") {
  const auto f = parse_nowcast_text(header() + kFullRow, kT0);
  REQUIRE(f.cells.size() == 1);
  const auto& c = f.cells[0];
  CHECK(c.id == 1);
  CHECK(c.pixels == 120);
  CHECK(c.center.lon == 0.5);
  CHECK(c.center.lat == 39.0);
  CHECK(c.radius_km == 12.3);
  CHECK(c.west == 0.3);
  CHECK(c.east == 0.7);
  CHECK(c.south == 38.8);
  CHECK(c.north == 39.2);
  CHECK(c.heading_deg == 45);
  CHECK(c.speed_kmh == 30);
  CHECK(c.forecast_count() == 6);
  CHECK(c.center_forecasts[5]->lon == 1.1);
  CHECK(c.center_forecasts[5]->lat == 39.6);
}

TEST_CASE("blank forecast columns are absent, not zero") {
  const auto f = parse_nowcast_text(
      header() + "1;120;0.5;39.0;12.3;0.3;0.7;38.8;39.2;45;30;0.6;39.1;0.7;39.2;0.8;39.3;0.9;39.4;;;;\n", kT0);
  CHECK(f.cells[0].forecast_count() == 4);
  CHECK_FALSE(f.cells[0].center_forecasts[4].has_value());
  CHECK_FALSE(f.cells[0].center_forecasts[5].has_value());
}

TEST_CASE("schema violations") {
  SUBCASE("north below south") {
    CHECK_THROWS_AS(parse_nowcast_text(header() + "1;120;0.5;39.0;12;0.3;0.7;39.2;38.8;45;30;;;;;;;;;;;;\n", kT0),
                    SchemaError);
  }
  SUBCASE("duplicate id") {
    CHECK_THROWS_AS(parse_nowcast_text(header() + kFullRow + kFullRow, kT0), SchemaError);
  }
  SUBCASE("heading out of range") {
    CHECK_THROWS_AS(parse_nowcast_text(header() + "1;120;0.5;39.0;12;0.3;0.7;38.8;39.2;360;30;;;;;;;;;;;;\n", kT0),
                    SchemaError);
  }
}

TEST_CASE("malformed rows report line and column") {
  try {
    parse_nowcast_text(header() + kFullRow + "2;abc;0.5;39.0;12;0.3;0.7;38.8;39.2;45;30;;;;;;;;;;;;\n", kT0);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 2);
  }
  CHECK_THROWS_AS(parse_nowcast_text(header() + "1;120;0.5\n", kT0), ParseError);
  CHECK_THROWS_AS(parse_nowcast_text("NUM;WRONG\n", kT0), ParseError);
  // A forecast pair with only one coordinate is malformed.
  CHECK_THROWS_AS(
      parse_nowcast_text(header() + "1;120;0.5;39.0;12;0.3;0.7;38.8;39.2;45;30;0.6;;;;;;;;;;;\n", kT0), ParseError);
}

TEST_CASE("file names carry the issue time") {
  CHECK(nowcast_filename(kT0) == "nowcast_20161219_1030.csv");
  CHECK(issue_time_from_filename("nowcast_20161219_1030.csv") == kT0);
  CHECK_THROWS_AS(issue_time_from_filename("nowcast_2016121_1030.csv"), ParseError);
  CHECK_THROWS_AS(issue_time_from_filename("radar_20161219_1030.csv"), ParseError);
}

TEST_CASE("parse -> format -> parse is the identity") {
  const auto a = parse_nowcast_text(header() + kFullRow +
                                        "7;3;-1.25;36.5;1.5;-1.3;-1.2;36.45;36.55;359.5;0;-1.2;36.6;;;;;;;;;;\n",
                                    kT0);
  const auto b = parse_nowcast_text(format_nowcast(a), kT0);
  CHECK(a == b);
  CHECK(format_nowcast(a) == format_nowcast(b));

  const auto dir = std::filesystem::temp_directory_path() / "stormreach_nowcast_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = write_nowcast(dir, a);
  CHECK(path.filename() == "nowcast_20161219_1030.csv");
  CHECK(parse_nowcast(path) == a);
  auto later = a;
  later.issue_time += minutes(10);
  write_nowcast(dir, later);
  write_text_file((dir / "notes.txt").string(), "ignored");
  const auto archive = load_archive(dir);
  REQUIRE(archive.size() == 2);
  CHECK(archive[0].issue_time < archive[1].issue_time);
  std::filesystem::remove_all(dir);
}
