#include "topic_grids/topology_metrics.hpp"

#include <nlohmann/json.hpp>

#include "topic_grids/error.hpp"

namespace topic_grids {

std::uint64_t constraint_count(std::uint64_t n) {
  if (n < 2) throw DomainError("constraint_count needs at least two points");
  return n * (n - 1);
}

namespace {

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }
inline int sign_of(int v) { return (v > 0) - (v < 0); }

}  // namespace

ConstraintReport evaluate(std::span<const Point2D> points, const Placement& placement) {
  if (placement.cells.size() != points.size()) {
    throw DomainError("placement covers " + std::to_string(placement.cells.size()) +
                      " indices but there are " + std::to_string(points.size()) + " points");
  }
  ConstraintReport r;
  r.n = points.size();
  r.total = constraint_count(r.n);

  const auto& cells = placement.cells;
  std::uint64_t strict = 0;
  std::uint64_t loose = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point2D pi = points[i];
    const GridCoord ci = cells[i];
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const Point2D pj = points[j];
      const GridCoord cj = cells[j];

      const int sx = sign_of(pi.x - pj.x);
      const int gx = sign_of(ci.col - cj.col);
      const int sy = sign_of(pi.y - pj.y);
      const int gy = sign_of(ci.row - cj.row);

      const bool vx = sx != gx;
      const bool vy = sy != gy;
      strict += static_cast<std::uint64_t>(vx) + static_cast<std::uint64_t>(vy);
      loose += static_cast<std::uint64_t>(vx && gx != 0) + static_cast<std::uint64_t>(vy && gy != 0);
    }
  }
  r.violations_strict = strict;
  r.violations_loose = loose;
  r.err_I = static_cast<double>(strict) / static_cast<double>(r.total);
  r.err_II = static_cast<double>(loose) / static_cast<double>(r.total);
  return r;
}

nlohmann::json to_json(const ConstraintReport& report) {
  return {{"n", report.n},
          {"total", report.total},
          {"violations_strict", report.violations_strict},
          {"violations_loose", report.violations_loose},
          {"err_I", report.err_I},
          {"err_II", report.err_II}};
}

}  // namespace topic_grids
