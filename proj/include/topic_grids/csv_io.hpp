#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "topic_grids/embedding.hpp"
#include "topic_grids/sd_layout.hpp"

namespace topic_grids {

// Shortest round-trip decimal form.
std::string format_double(double v);

// Header `idx,x,y`; every index 0..n-1 exactly once, any row order.
std::vector<Point2D> read_points_csv(std::string_view text);
std::string write_points_csv(const std::vector<Point2D>& points);

// Header `idx,col,row,path`, rows by index.
std::string write_placement_csv(const Placement& placement);
Placement read_placement_csv(std::string_view text);

// First line holds n, then n rows of n comma-separated values.
DistanceMatrix read_distance_csv(std::string_view text);
std::string write_distance_csv(const DistanceMatrix& d);

}  // namespace topic_grids
