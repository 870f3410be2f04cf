#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "topic_grids/bench.hpp"
#include "topic_grids/error.hpp"

using namespace topic_grids;

TEST_CASE("sample_uniform: support, mean, determinism") {
  const auto small = sample_uniform(4096, 3);
  for (const auto& p : small) CHECK((p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0));
  CHECK(sample_uniform(4096, 3) == small);
  CHECK(sample_uniform(4096, 4) != small);

  const auto big = sample_uniform(100000, 11);
  double mx = 0.0, my = 0.0;
  for (const auto& p : big) {
    mx += p.x;
    my += p.y;
  }
  CHECK(std::abs(mx / 1e5 - 0.5) < 0.01);
  CHECK(std::abs(my / 1e5 - 0.5) < 0.01);
  CHECK_THROWS_AS(sample_uniform(0, 1), DomainError);
}

TEST_CASE("sample_gaussian: projected spreads, mean, determinism") {
  const auto pts = sample_gaussian(100000, 13);
  const double r = 1.0 / std::numbers::sqrt2;
  double mx = 0.0, my = 0.0, major = 0.0, minor = 0.0, major2 = 0.0, minor2 = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
    const double u = r * (p.x + p.y);
    const double v = r * (-p.x + p.y);
    major += u;
    minor += v;
    major2 += u * u;
    minor2 += v * v;
  }
  const double n = 1e5;
  CHECK(std::abs(mx / n) < 0.02);
  CHECK(std::abs(my / n) < 0.02);
  const double sd_major = std::sqrt(major2 / n - std::pow(major / n, 2));
  const double sd_minor = std::sqrt(minor2 / n - std::pow(minor / n, 2));
  CHECK(std::abs(sd_major - 2.0) / 2.0 < 0.02);
  CHECK(std::abs(sd_minor - 1.0) < 0.02);
  CHECK(sample_gaussian(1000, 13) == sample_gaussian(1000, 13));
}

TEST_CASE("run_benchmark: reproducible and independent of thread count") {
  BenchmarkConfig cfg;
  cfg.layouts = {4, 8};
  cfg.samplers = {SamplerKind::kUniform, SamplerKind::kGaussian};
  cfg.trials = {{4, 50}, {8, 20}};
  cfg.master_seed = 42;
  cfg.threads = 1;
  const auto a = run_benchmark(cfg);
  cfg.threads = 4;
  const auto b = run_benchmark(cfg);
  CHECK(to_json(a).dump() == to_json(b).dump());
  REQUIRE(a.rows.size() == 4);
  CHECK(a.rows[0].sampler == SamplerKind::kUniform);
  CHECK(a.rows[0].side() == 4);
  CHECK(a.rows[0].constraints == 240);
  CHECK(a.rows[3].side() == 8);
  CHECK(a.rows[3].trials == 20);
  for (const auto& row : a.rows) {
    CHECK((row.mean_err_I >= 0.0 && row.mean_err_I <= 1.0));
    CHECK(row.mean_err_II <= row.mean_err_I);
  }
  // With continuous samples every same-column or same-row pair is a strict
  // violation and nothing else differs: err_I - err_II = 2 * side * C(side, 2) / n(n-1).
  const auto* u4 = a.find(4, SamplerKind::kUniform);
  REQUIRE(u4 != nullptr);
  CHECK(u4->mean_err_I - u4->mean_err_II == doctest::Approx(48.0 / 240.0));
}

TEST_CASE("run_benchmark: trial seeds do not collide across rows") {
  CHECK(trial_seed(1, SamplerKind::kUniform, 2, 0) != trial_seed(1, SamplerKind::kGaussian, 2, 0));
  CHECK(trial_seed(1, SamplerKind::kUniform, 2, 0) != trial_seed(1, SamplerKind::kUniform, 3, 0));
  CHECK(trial_seed(1, SamplerKind::kUniform, 2, 0) != trial_seed(1, SamplerKind::kUniform, 2, 1));
  CHECK(trial_seed(1, SamplerKind::kUniform, 2, 0) != trial_seed(2, SamplerKind::kUniform, 2, 0));
}

TEST_CASE("run_benchmark: bad layouts and trial specs") {
  BenchmarkConfig cfg;
  cfg.layouts = {6};
  cfg.samplers = {SamplerKind::kUniform};
  CHECK_THROWS_AS(run_benchmark(cfg), DomainError);
  CHECK_THROWS_AS(parse_trials("x", {4}), DomainError);
  CHECK_THROWS_AS(parse_trials("4:0", {4}), DomainError);
  CHECK(parse_trials("100", {4, 8}) == std::map<int, int>{{4, 100}, {8, 100}});
  CHECK(parse_trials("4:10,64:2", {4, 64}) == std::map<int, int>{{4, 10}, {64, 2}});
  CHECK(default_trials(16) == 1000);
  CHECK(default_trials(32) == 100);
  CHECK(default_trials(64) == 20);
  CHECK_THROWS_AS(parse_sampler("X"), DomainError);
}

TEST_CASE("format_table mirrors the published columns") {
  BenchmarkConfig cfg;
  cfg.layouts = {64};
  cfg.samplers = {SamplerKind::kUniform};
  cfg.trials = {{64, 1}};
  const auto table = format_table(run_benchmark(cfg));
  CHECK(table.rfind("Layout  Sampling   Constraints    Err_I   Err_II", 0) == 0);
  CHECK(table.find("64x64   U           16,773,120") != std::string::npos);
}
