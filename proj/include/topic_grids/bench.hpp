#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "topic_grids/sd_layout.hpp"

namespace topic_grids {

// U: i.i.d. uniform on the unit square.
// G: axes with standard deviations 2 and 1, rotated by pi/4.
enum class SamplerKind { kUniform, kGaussian };

SamplerKind parse_sampler(const std::string& name);
std::string to_string(SamplerKind kind);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kUniform;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

std::vector<Point2D> sample_uniform(std::size_t n, std::uint64_t seed);
std::vector<Point2D> sample_gaussian(std::size_t n, std::uint64_t seed);
std::vector<Point2D> sample(const SamplerSpec& spec);

struct BenchmarkRow {
  int h = 0;
  SamplerKind sampler = SamplerKind::kUniform;
  int trials = 0;
  std::uint64_t constraints = 0;
  double mean_err_I = 0.0;
  double mean_err_II = 0.0;
  double std_err_I = 0.0;
  double std_err_II = 0.0;

  int side() const { return 1 << h; }
};

struct BenchmarkReport {
  std::uint64_t master_seed = 0;
  std::vector<BenchmarkRow> rows;

  const BenchmarkRow* find(int side, SamplerKind sampler) const;
};

struct BenchmarkConfig {
  std::vector<int> layouts;  // grid side lengths, each a power of two
  std::vector<SamplerKind> samplers;
  std::map<int, int> trials;  // side -> trials; missing sides use default_trials()
  std::uint64_t master_seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

// 1000 trials up to 16x16, 100 for 32x32, 20 beyond.
int default_trials(int side);

std::uint64_t trial_seed(std::uint64_t master, SamplerKind sampler, int h, int trial);

// Rows are ordered sampler-major then by layout, as in the published table.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg);

nlohmann::json to_json(const BenchmarkReport& report);
// Aligned text table: Layout, Sampling, Constraints, Err_I, Err_II.
std::string format_table(const BenchmarkReport& report);

// "1000" applies to all layouts; "4:1000,64:20" maps sides to counts.
std::map<int, int> parse_trials(const std::string& spec, const std::vector<int>& layouts);

}  // namespace topic_grids
