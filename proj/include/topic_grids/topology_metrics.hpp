#pragma once

#include <cstdint>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "topic_grids/sd_layout.hpp"

namespace topic_grids {

// Pairwise per-axis order constraints between points and their grid cells.
// err_I counts every sign disagreement; err_II forgives constraints whose
// two cells share the coordinate on that axis.
struct ConstraintReport {
  std::uint64_t n = 0;
  std::uint64_t total = 0;
  std::uint64_t violations_strict = 0;
  std::uint64_t violations_loose = 0;
  double err_I = 0.0;
  double err_II = 0.0;
};

// n(n-1): one constraint per unordered pair per axis.
std::uint64_t constraint_count(std::uint64_t n);

ConstraintReport evaluate(std::span<const Point2D> points, const Placement& placement);

nlohmann::json to_json(const ConstraintReport& report);

}  // namespace topic_grids
