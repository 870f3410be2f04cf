#include "topic_grids/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "topic_grids/error.hpp"

namespace topic_grids {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    out.emplace_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  for (auto& field : out) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    field = b == std::string::npos ? "" : field.substr(b, e - b + 1);
  }
  return out;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DomainError("line " + std::to_string(line) + ": '" + s + "' is not a finite number");
  }
  return v;
}

long parse_long(const std::string& s, std::size_t line) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DomainError("line " + std::to_string(line) + ": '" + s + "' is not an integer");
  }
  return v;
}

template <typename Row>
std::vector<Row> indexed_rows(const std::vector<std::string>& lines, const std::string& header,
                              std::size_t columns, auto&& parse_row) {
  if (lines.empty() || split(lines[0], ',') != split(header, ',')) {
    throw DomainError("expected CSV header '" + header + "'");
  }
  const std::size_t n = lines.size() - 1;
  std::vector<Row> rows(n);
  std::vector<bool> seen(n, false);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto fields = split(lines[l], ',');
    if (fields.size() != columns) {
      throw DomainError("line " + std::to_string(l + 1) + ": expected " + std::to_string(columns) + " fields");
    }
    const long idx = parse_long(fields[0], l + 1);
    if (idx < 0 || static_cast<std::size_t>(idx) >= n || seen[static_cast<std::size_t>(idx)]) {
      throw DomainError("line " + std::to_string(l + 1) + ": index " + fields[0] +
                        " is out of range or repeated");
    }
    seen[static_cast<std::size_t>(idx)] = true;
    rows[static_cast<std::size_t>(idx)] = parse_row(fields, l + 1);
  }
  return rows;
}

}  // namespace

std::vector<Point2D> read_points_csv(std::string_view text) {
  return indexed_rows<Point2D>(lines_of(text), "idx,x,y", 3, [](const auto& f, std::size_t line) {
    return Point2D{parse_double(f[1], line), parse_double(f[2], line)};
  });
}

std::string write_points_csv(const std::vector<Point2D>& points) {
  std::string out = "idx,x,y\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out += std::to_string(i) + "," + format_double(points[i].x) + "," + format_double(points[i].y) + "\n";
  }
  return out;
}

std::string write_placement_csv(const Placement& placement) {
  std::string out = "idx,col,row,path\n";
  for (std::size_t i = 0; i < placement.cells.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(placement.cells[i].col) + "," +
           std::to_string(placement.cells[i].row) + "," +
           (i < placement.paths.size() ? placement.paths[i].str() : std::string()) + "\n";
  }
  return out;
}

Placement read_placement_csv(std::string_view text) {
  struct Row {
    GridCoord cell;
    AllocationString path;
  };
  const auto rows = indexed_rows<Row>(lines_of(text), "idx,col,row,path", 4, [](const auto& f, std::size_t line) {
    return Row{{static_cast<int>(parse_long(f[1], line)), static_cast<int>(parse_long(f[2], line))},
               AllocationString(f[3])};
  });
  Placement p;
  p.h = grid_exponent_for(rows.size());
  if (p.h < 0) throw SizeError("placement size must be a power of 4");
  std::vector<bool> used(rows.size(), false);
  for (const auto& row : rows) {
    if (resolve_allocation(row.path, p.h) != row.cell) {
      throw DomainError("placement path " + row.path.str() + " does not resolve to its cell");
    }
    const auto slot = static_cast<std::size_t>(row.cell.row * p.side() + row.cell.col);
    if (used[slot]) throw DomainError("placement assigns a cell twice");
    used[slot] = true;
    p.cells.push_back(row.cell);
    p.paths.push_back(row.path);
  }
  return p;
}

DistanceMatrix read_distance_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw DomainError("distance CSV is empty");
  const long n = parse_long(split(lines[0], ',')[0], 1);
  if (n < 0 || lines.size() != static_cast<std::size_t>(n) + 1) {
    throw DomainError("distance CSV must have n = " + std::to_string(n) + " rows after the header");
  }
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * n));
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto fields = split(lines[l], ',');
    if (fields.size() != static_cast<std::size_t>(n)) {
      throw DomainError("line " + std::to_string(l + 1) + ": expected " + std::to_string(n) + " values");
    }
    for (const auto& f : fields) values.push_back(parse_double(f, l + 1));
  }
  return DistanceMatrix(static_cast<std::size_t>(n), std::move(values));
}

std::string write_distance_csv(const DistanceMatrix& d) {
  std::string out = std::to_string(d.size()) + "\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j > 0) out += ',';
      out += format_double(d(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace topic_grids
