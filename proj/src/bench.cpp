#include "topic_grids/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "topic_grids/error.hpp"
#include "topic_grids/random.hpp"
#include "topic_grids/topology_metrics.hpp"

namespace topic_grids {

SamplerKind parse_sampler(const std::string& name) {
  if (name == "U" || name == "u") return SamplerKind::kUniform;
  if (name == "G" || name == "g") return SamplerKind::kGaussian;
  throw DomainError("unknown sampler '" + name + "' (expected U or G)");
}

std::string to_string(SamplerKind kind) { return kind == SamplerKind::kUniform ? "U" : "G"; }

std::vector<Point2D> sample_uniform(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sampler needs n >= 1");
  Rng rng(seed);
  std::vector<Point2D> pts(n);
  for (auto& p : pts) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  return pts;
}

std::vector<Point2D> sample_gaussian(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sampler needs n >= 1");
  Rng rng(seed);
  const double c = std::cos(std::numbers::pi / 4.0);
  const double s = std::sin(std::numbers::pi / 4.0);
  std::vector<Point2D> pts(n);
  for (auto& p : pts) {
    const double u = 2.0 * rng.normal();
    const double v = rng.normal();
    p.x = c * u - s * v;
    p.y = s * u + c * v;
  }
  return pts;
}

std::vector<Point2D> sample(const SamplerSpec& spec) {
  return spec.kind == SamplerKind::kUniform ? sample_uniform(spec.n, spec.seed)
                                            : sample_gaussian(spec.n, spec.seed);
}

const BenchmarkRow* BenchmarkReport::find(int side, SamplerKind sampler) const {
  for (const auto& row : rows) {
    if (row.side() == side && row.sampler == sampler) return &row;
  }
  return nullptr;
}

int default_trials(int side) {
  if (side <= 16) return 1000;
  if (side <= 32) return 100;
  return 20;
}

std::uint64_t trial_seed(std::uint64_t master, SamplerKind sampler, int h, int trial) {
  return derive_seed(master, static_cast<std::uint64_t>(sampler) + 1,
                     static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(trial));
}

namespace {

int exponent_of_side(int side) {
  if (side < 1 || (side & (side - 1)) != 0) {
    throw DomainError("layout side " + std::to_string(side) + " is not a power of two");
  }
  int h = 0;
  while ((1 << h) < side) ++h;
  return h;
}

struct TrialJob {
  std::size_t row = 0;
  int trial = 0;
};

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
  BenchmarkReport report;
  report.master_seed = cfg.master_seed;

  std::vector<TrialJob> jobs;
  for (SamplerKind sampler : cfg.samplers) {
    for (int side : cfg.layouts) {
      BenchmarkRow row;
      row.h = exponent_of_side(side);
      row.sampler = sampler;
      const auto it = cfg.trials.find(side);
      row.trials = it != cfg.trials.end() ? it->second : default_trials(side);
      if (row.trials < 1) throw DomainError("trials must be >= 1 for layout " + std::to_string(side));
      const std::size_t n = std::size_t{1} << (2 * row.h);
      row.constraints = n >= 2 ? constraint_count(n) : 0;
      for (int t = 0; t < row.trials; ++t) jobs.push_back({report.rows.size(), t});
      report.rows.push_back(row);
    }
  }

  // One result slot per job; aggregation below runs in a fixed order, so
  // the report does not depend on scheduling.
  std::vector<ConstraintReport> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const BenchmarkRow& row = report.rows[jobs[j].row];
      try {
        const SamplerSpec spec{row.sampler, std::size_t{1} << (2 * row.h),
                               trial_seed(cfg.master_seed, row.sampler, row.h, jobs[j].trial)};
        const auto points = sample(spec);
        results[j] = evaluate(points, split_diffuse(points, row.h));
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::make_exception_ptr(std::runtime_error(
              "trial " + std::to_string(jobs[j].trial) + " of " + std::to_string(row.side()) + "x" +
              std::to_string(row.side()) + " " + to_string(row.sampler) + ": " + e.what()));
        }
        next = jobs.size();
      }
    }
  };
  unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);

  std::vector<double> sum1(report.rows.size(), 0.0), sum2(report.rows.size(), 0.0);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    sum1[jobs[j].row] += results[j].err_I;
    sum2[jobs[j].row] += results[j].err_II;
  }
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const double t = report.rows[r].trials;
    report.rows[r].mean_err_I = sum1[r] / t;
    report.rows[r].mean_err_II = sum2[r] / t;
  }
  std::vector<double> ss1(report.rows.size(), 0.0), ss2(report.rows.size(), 0.0);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& row = report.rows[jobs[j].row];
    ss1[jobs[j].row] += std::pow(results[j].err_I - row.mean_err_I, 2);
    ss2[jobs[j].row] += std::pow(results[j].err_II - row.mean_err_II, 2);
  }
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const int t = report.rows[r].trials;
    if (t > 1) {
      report.rows[r].std_err_I = std::sqrt(ss1[r] / (t - 1));
      report.rows[r].std_err_II = std::sqrt(ss2[r] / (t - 1));
    }
  }
  return report;
}

nlohmann::json to_json(const BenchmarkReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"layout", std::to_string(row.side()) + "x" + std::to_string(row.side())},
                    {"h", row.h},
                    {"sampler", to_string(row.sampler)},
                    {"trials", row.trials},
                    {"constraints", row.constraints},
                    {"mean_err_I", row.mean_err_I},
                    {"mean_err_II", row.mean_err_II},
                    {"std_err_I", row.std_err_I},
                    {"std_err_II", row.std_err_II}});
  }
  return {{"master_seed", report.master_seed}, {"rows", rows}};
}

namespace {

std::string with_thousands(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace

std::string format_table(const BenchmarkReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "Layout" << std::setw(10) << "Sampling" << std::right
     << std::setw(12) << "Constraints" << std::setw(9) << "Err_I" << std::setw(9) << "Err_II"
     << std::setw(8) << "Trials" << '\n';
  for (const auto& row : report.rows) {
    const std::string layout = std::to_string(row.side()) + "x" + std::to_string(row.side());
    os << std::left << std::setw(8) << layout << std::setw(10) << to_string(row.sampler)
       << std::right << std::setw(12) << with_thousands(row.constraints) << std::fixed
       << std::setprecision(4) << std::setw(9) << row.mean_err_I << std::setw(9)
       << row.mean_err_II << std::setw(8) << row.trials << '\n';
  }
  return os.str();
}

std::map<int, int> parse_trials(const std::string& spec, const std::vector<int>& layouts) {
  std::map<int, int> out;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      throw DomainError("bad trials spec '" + spec + "'");
    }
    if (used != s.size() || v < 1) throw DomainError("bad trials spec '" + spec + "'");
    return v;
  };
  if (spec.find(':') == std::string::npos) {
    const int v = to_int(spec);
    for (int side : layouts) out[side] = v;
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw DomainError("bad trials spec '" + spec + "'");
    out[to_int(item.substr(0, colon))] = to_int(item.substr(colon + 1));
  }
  return out;
}

}  // namespace topic_grids
