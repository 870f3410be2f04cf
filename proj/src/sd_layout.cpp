#include "topic_grids/sd_layout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topic_grids/error.hpp"

namespace topic_grids {

AllocationString::AllocationString(std::string path) : path_(std::move(path)) {
  for (char c : path_) {
    if (c != 'L' && c != 'R') {
      throw DomainError("allocation string may only contain 'L' and 'R'");
    }
  }
}

int grid_exponent_for(std::size_t n) {
  int h = 0;
  std::size_t cells = 1;
  while (cells < n) {
    cells *= 4;
    ++h;
  }
  return cells == n ? h : -1;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> rank_split(
    std::span<const Point2D> points, std::span<const std::size_t> indices, int axis) {
  if (indices.size() < 2 || indices.size() % 2 != 0) {
    throw InvariantError("rank_split needs an even subset of at least two points");
  }
  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = points[a][axis];
    const double vb = points[b][axis];
    return va < vb || (va == vb && a < b);
  });
  const auto half = static_cast<std::ptrdiff_t>(order.size() / 2);
  return {std::vector<std::size_t>(order.begin(), order.begin() + half),
          std::vector<std::size_t>(order.begin() + half, order.end())};
}

GridCoord resolve_allocation(const AllocationString& path, int h) {
  if (h < 0 || path.depth() != static_cast<std::size_t>(2 * h)) {
    throw DomainError("allocation string length " + std::to_string(path.depth()) +
                      " does not match 2h = " + std::to_string(2 * h));
  }
  GridCoord cell;
  for (std::size_t d = 0; d < path.depth(); ++d) {
    const int bit = path[d] == 'R' ? 1 : 0;
    if (d % 2 == 0) {
      cell.col = (cell.col << 1) | bit;
    } else {
      cell.row = (cell.row << 1) | bit;
    }
  }
  return cell;
}

namespace {

void split_recursive(std::span<const Point2D> points, std::span<const std::size_t> subset,
                     int depth, AllocationString& prefix, Placement& out) {
  if (subset.size() == 1) {
    const std::size_t i = subset.front();
    out.paths[i] = prefix;
    out.cells[i] = resolve_allocation(prefix, out.h);
    return;
  }
  auto [lower, upper] = rank_split(points, subset, depth % 2);
  prefix.push('L');
  split_recursive(points, lower, depth + 1, prefix, out);
  prefix.pop();
  prefix.push('R');
  split_recursive(points, upper, depth + 1, prefix, out);
  prefix.pop();
}

}  // namespace

Placement split_diffuse(std::span<const Point2D> points, int h) {
  if (h < 0 || h > 15 || grid_exponent_for(points.size()) != h) {
    throw SizeError("size must be a power of 4 matching the grid: got " +
                    std::to_string(points.size()) + " points for h = " + std::to_string(h));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw DomainError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  Placement out;
  out.h = h;
  out.cells.resize(points.size());
  out.paths.resize(points.size());

  std::vector<std::size_t> all(points.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  AllocationString prefix;
  split_recursive(points, all, 0, prefix, out);
  return out;
}

}  // namespace topic_grids
