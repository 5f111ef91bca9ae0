#include "stormreach/nowcast.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <fmt/format.h>

#include "stormreach/errors.hpp"
#include "stormreach/text_format.hpp"

namespace stormreach {
namespace {

constexpr std::string_view kHeader =
    "NUM;NUPIX;LONCEN;LATCEN;RADIOE;LONOES;LONEST;LATSUR;LATNOR;DIRN;VKMH;"
    "LON10;LAT10;LON20;LAT20;LON30;LAT30;LON40;LAT40;LON50;LAT50;LON60;LAT60";
constexpr std::size_t kColumns = 11 + 2 * kMaxForecastHorizons;

struct RowParser {
  std::size_t line;
  const std::vector<std::string_view>& fields;

  [[noreturn]] void fail(std::size_t col, std::string_view what) const {
    throw ParseError(fmt::format("line {}, column {}: {}", line, col + 1, what), line, col + 1);
  }

  double real(std::size_t col) const {
    double v{};
    if (!parse_double(fields[col], v) || !std::isfinite(v))
      fail(col, fmt::format("expected a number, got '{}'", trim(fields[col])));
    return v;
  }

  int integer(std::size_t col) const {
    int v{};
    if (!parse_int(fields[col], v)) fail(col, fmt::format("expected an integer, got '{}'", trim(fields[col])));
    return v;
  }

  bool blank(std::size_t col) const { return trim(fields[col]).empty(); }
};

}  // namespace

int StormCellObservation::forecast_count() const {
  return static_cast<int>(std::count_if(center_forecasts.begin(), center_forecasts.end(),
                                        [](const auto& f) { return f.has_value(); }));
}

const StormCellObservation* NowcastFile::find(int id) const {
  auto it = std::find_if(cells.begin(), cells.end(), [id](const auto& c) { return c.id == id; });
  return it == cells.end() ? nullptr : &*it;
}

std::string_view nowcast_header() { return kHeader; }

void validate_observation(const StormCellObservation& o) {
  auto bad = [&](std::string_view what) {
    throw SchemaError(fmt::format("cell {}: {}", o.id, what));
  };
  if (o.south > o.north) bad("LATSUR > LATNOR");
  if (o.center.lat < o.south || o.center.lat > o.north) bad("LATCEN outside [LATSUR, LATNOR]");
  if (o.west > o.east) bad("LONOES > LONEST");
  if (o.center.lon < o.west || o.center.lon > o.east) bad("LONCEN outside [LONOES, LONEST]");
  if (o.pixels < 1) bad("NUPIX < 1");
  if (o.speed_kmh < 0) bad("negative speed");
  if (!(o.heading_deg >= 0.0 && o.heading_deg < 360.0)) bad("DIRN outside [0, 360)");
}

NowcastFile parse_nowcast_text(std::string_view text, IssueTime issue_time) {
  NowcastFile file{issue_time, {}};
  std::set<int> ids;
  const auto lines = split(text, '\n');
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kHeader) throw ParseError(fmt::format("line {}: unexpected header", lineno), lineno, 1);
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ';');
    if (fields.size() != kColumns)
      throw ParseError(fmt::format("line {}: expected {} columns, found {}", lineno, kColumns, fields.size()),
                       lineno, std::min(fields.size(), kColumns) + 1);
    RowParser p{lineno, fields};
    StormCellObservation o;
    o.id = p.integer(0);
    o.pixels = p.integer(1);
    o.center = {p.real(2), p.real(3)};
    o.radius_km = p.real(4);
    o.west = p.real(5);
    o.east = p.real(6);
    o.south = p.real(7);
    o.north = p.real(8);
    o.heading_deg = p.real(9);
    o.speed_kmh = p.real(10);
    for (int k = 0; k < kMaxForecastHorizons; ++k) {
      const std::size_t lon_col = 11 + 2 * k;
      const bool lon_blank = p.blank(lon_col);
      const bool lat_blank = p.blank(lon_col + 1);
      if (lon_blank && lat_blank) continue;
      if (lon_blank != lat_blank) p.fail(lon_blank ? lon_col : lon_col + 1, "forecast pair half blank");
      o.center_forecasts[k] = GeoPoint{p.real(lon_col), p.real(lon_col + 1)};
    }
    validate_observation(o);
    if (!ids.insert(o.id).second) throw SchemaError(fmt::format("line {}: duplicate cell ID {}", lineno, o.id));
    file.cells.push_back(o);
  }
  if (!header_seen) throw ParseError("missing header line", 1, 1);
  return file;
}

NowcastFile parse_nowcast(const std::filesystem::path& path) {
  const auto t = issue_time_from_filename(path.filename().string());
  return parse_nowcast_text(read_text_file(path.string()), t);
}

std::string format_nowcast(const NowcastFile& file) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& o : file.cells) {
    out += fmt::format("{};{};{};{};{};{};{};{};{};{};{}", o.id, o.pixels, format_double(o.center.lon),
                       format_double(o.center.lat), format_double(o.radius_km), format_double(o.west),
                       format_double(o.east), format_double(o.south), format_double(o.north),
                       format_double(o.heading_deg), format_double(o.speed_kmh));
    for (const auto& f : o.center_forecasts) {
      if (f)
        out += fmt::format(";{};{}", format_double(f->lon), format_double(f->lat));
      else
        out += ";;";
    }
    out += '\n';
  }
  return out;
}

std::filesystem::path write_nowcast(const std::filesystem::path& dir, const NowcastFile& file) {
  auto path = dir / nowcast_filename(file.issue_time);
  write_text_file(path.string(), format_nowcast(file));
  return path;
}

std::string format_issue_time(IssueTime t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return fmt::format("{:04}{:02}{:02}_{:02}{:02}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count());
}

std::string nowcast_filename(IssueTime t) { return "nowcast_" + format_issue_time(t) + ".csv"; }

IssueTime issue_time_from_filename(std::string_view name) {
  using namespace std::chrono;
  constexpr std::string_view prefix = "nowcast_";
  constexpr std::string_view suffix = ".csv";
  auto bad = [&] { throw ParseError(fmt::format("file name '{}' is not nowcast_YYYYMMDD_HHMM.csv", name)); };
  if (name.size() != prefix.size() + 13 + suffix.size() || name.substr(0, prefix.size()) != prefix ||
      name.substr(name.size() - suffix.size()) != suffix)
    bad();
  const auto stamp = name.substr(prefix.size(), 13);
  if (stamp[8] != '_') bad();
  int y{}, mo{}, d{}, h{}, mi{};
  if (!parse_int(stamp.substr(0, 4), y) || !parse_int(stamp.substr(4, 2), mo) || !parse_int(stamp.substr(6, 2), d) ||
      !parse_int(stamp.substr(9, 2), h) || !parse_int(stamp.substr(11, 2), mi))
    bad();
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || h < 0 || mi < 0) bad();
  return IssueTime{sys_days{ymd}.time_since_epoch() + hours{h} + minutes{mi}};
}

std::vector<NowcastFile> load_archive(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("archive directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("nowcast_", 0) == 0 && entry.path().extension() == ".csv")
      paths.push_back(entry.path());
  }
  std::vector<NowcastFile> files;
  files.reserve(paths.size());
  for (const auto& p : paths) files.push_back(parse_nowcast(p));
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.issue_time < b.issue_time; });
  return files;
}

}  // namespace stormreach
