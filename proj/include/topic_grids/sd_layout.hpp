#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace topic_grids {

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : y; }
  bool operator==(const Point2D&) const = default;
};

struct GridCoord {
  int col = 0;
  int row = 0;

  int operator[](int axis) const { return axis == 0 ? col : row; }
  bool operator==(const GridCoord&) const = default;
  auto operator<=>(const GridCoord&) const = default;
};

// Split path of one point: symbol d is 'L' or 'R' and refers to axis d % 2.
class AllocationString {
 public:
  AllocationString() = default;
  explicit AllocationString(std::string path);

  const std::string& str() const { return path_; }
  std::size_t depth() const { return path_.size(); }
  char operator[](std::size_t d) const { return path_[d]; }

  void push(char symbol) { path_.push_back(symbol); }
  void pop() { path_.pop_back(); }

  bool operator==(const AllocationString&) const = default;

 private:
  std::string path_;
};

// Bijection from point index onto the cells of a 2^h x 2^h grid.
struct Placement {
  int h = 0;
  std::vector<GridCoord> cells;
  std::vector<AllocationString> paths;

  int side() const { return 1 << h; }
  std::size_t size() const { return cells.size(); }
  bool operator==(const Placement&) const = default;
};

// Number of points on a 2^h x 2^h grid; 0 if n is not a power of four.
// Returns h such that 4^h == n, or -1.
int grid_exponent_for(std::size_t n);

// Recursive median split on alternating axes (x first). The half sent to
// 'L' occupies the lower-coordinate half of the remaining region.
// Throws SizeError unless points.size() == 4^h, DomainError on NaN/Inf.
Placement split_diffuse(std::span<const Point2D> points, int h);

// Splits `indices` (into `points`) into equal halves ordered by the
// coordinate on `axis`; ties go by ascending index.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> rank_split(
    std::span<const Point2D> points, std::span<const std::size_t> indices, int axis);

// Even depths are col bits, odd depths row bits, most significant first.
GridCoord resolve_allocation(const AllocationString& path, int h);

}  // namespace topic_grids
