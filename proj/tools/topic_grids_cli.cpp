// Command-line front end: layout, embed, evaluate, bench, fixture, pipeline, serve.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "topic_grids/api.hpp"
#include "topic_grids/bench.hpp"
#include "topic_grids/csv_io.hpp"
#include "topic_grids/embedding.hpp"
#include "topic_grids/error.hpp"
#include "topic_grids/fixture.hpp"
#include "topic_grids/sd_layout.hpp"
#include "topic_grids/snapshot.hpp"
#include "topic_grids/topology_metrics.hpp"

namespace tg = topic_grids;

namespace {

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    tg::write_file(out_path, content);
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--layouts", "'" + item + "' is not an integer");
    }
  }
  return out;
}

const char* env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split-diffuse topic grids"};
  app.require_subcommand(1);

  // layout
  std::string layout_in, layout_out;
  int layout_h = -1;
  auto* layout = app.add_subcommand("layout", "Place 4^h points on a 2^h x 2^h grid");
  layout->add_option("input", layout_in, "Points CSV (idx,x,y)")->required()->check(CLI::ExistingFile);
  layout->add_option("--exponent", layout_h, "Grid exponent; inferred from the point count when omitted");
  layout->add_option("-o,--output", layout_out, "Placement CSV (default stdout)");

  // embed
  std::string embed_in, embed_out, embed_method = "mds";
  tg::EmbeddingConfig embed_cfg;
  auto* embed = app.add_subcommand("embed", "Embed a distance matrix in 2-D");
  embed->add_option("input", embed_in, "Distance CSV (n, then n rows)")->required()->check(CLI::ExistingFile);
  embed->add_option("--method", embed_method, "mds or tsne")->check(CLI::IsMember({"mds", "tsne"}));
  embed->add_option("--perplexity", embed_cfg.tsne_perplexity);
  embed->add_option("--iterations", embed_cfg.tsne_iterations)->check(CLI::PositiveNumber);
  embed->add_option("--learning-rate", embed_cfg.tsne_learning_rate);
  embed->add_option("--exaggeration", embed_cfg.tsne_early_exaggeration);
  embed->add_option("--seed", embed_cfg.seed);
  embed->add_option("-o,--output", embed_out, "Points CSV (default stdout)");

  // evaluate
  std::string eval_points, eval_placement;
  auto* evaluate = app.add_subcommand("evaluate", "Topology-preservation report for a placement");
  evaluate->add_option("points", eval_points, "Points CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("placement", eval_placement, "Placement CSV")->required()->check(CLI::ExistingFile);

  // bench
  std::string bench_layouts = "4,8,16,32,64", bench_samplers = "U,G", bench_trials, bench_json;
  std::uint64_t bench_seed = 7;
  unsigned bench_threads = 0;
  auto* bench = app.add_subcommand("bench", "Monte-Carlo Err_I / Err_II benchmark");
  bench->add_option("--layouts", bench_layouts, "Comma-separated grid sides");
  bench->add_option("--samplers", bench_samplers, "Comma-separated samplers: U, G");
  bench->add_option("--seed", bench_seed, "Master seed");
  bench->add_option("--trials", bench_trials, "N for every layout, or side:N,side:N");
  bench->add_option("--threads", bench_threads, "Worker threads (0 = all cores)");
  bench->add_option("--json", bench_json, "Also write the JSON report here ('-' for stdout)");

  // fixture
  std::string fixture_out;
  tg::SyntheticLogConfig fixture_cfg;
  auto* fixture = app.add_subcommand("fixture", "Generate the synthetic access log");
  fixture->add_option("--seed", fixture_cfg.seed);
  fixture->add_option("-o,--output", fixture_out, "JSONL output (default stdout)");

  // pipeline
  std::string pipe_log, pipe_out, pipe_metric = "cosine", pipe_embedding = "mds", pipe_window, pipe_period;
  tg::PipelineConfig pipe_cfg;
  auto* pipeline = app.add_subcommand("pipeline", "Fit topics, place them, and write a snapshot");
  pipeline->add_option("log", pipe_log, "Access log JSONL")->required()->check(CLI::ExistingFile);
  pipeline->add_option("-o,--output", pipe_out, "Snapshot directory")->required();
  pipeline->add_option("--topics", pipe_cfg.lda.topics, "Topic count (a power of 4)");
  pipeline->add_option("--alpha", pipe_cfg.lda.alpha, "Dirichlet prior on document topics (default 50/K)");
  pipeline->add_option("--beta", pipe_cfg.lda.beta);
  pipeline->add_option("--iterations", pipe_cfg.lda.iterations)->check(CLI::PositiveNumber);
  pipeline->add_option("--averaged", pipe_cfg.lda.averaged)->check(CLI::PositiveNumber);
  pipeline->add_option("--seed", pipe_cfg.lda.seed);
  pipeline->add_option("--metric", pipe_metric)->check(CLI::IsMember({"cosine", "euclidean"}));
  pipeline->add_option("--embedding", pipe_embedding)->check(CLI::IsMember({"mds", "tsne"}));
  pipeline->add_option("--window", pipe_window, "Current window START/END (default trailing day)");
  pipeline->add_option("--period", pipe_period, "History period START/END (default full log)");
  pipeline->add_flag("--anonymize", pipe_cfg.anonymize_labels, "Replace labels with hashed stand-ins");
  pipeline->add_option("--max-malformed", pipe_cfg.max_malformed_fraction, "Tolerated malformed-line fraction");

  // serve
  std::string serve_dir = env_or("TOPIC_GRIDS_SNAPSHOT", "");
  tg::ServeOptions serve_opts;
  serve_opts.port = std::atoi(env_or("TOPIC_GRIDS_PORT", "8080"));
  serve_opts.cors_origin = env_or("TOPIC_GRIDS_CORS_ORIGIN", "");
  auto* serve = app.add_subcommand("serve", "Serve a snapshot over a read-only JSON API");
  serve->add_option("snapshot", serve_dir, "Snapshot directory (or TOPIC_GRIDS_SNAPSHOT)");
  serve->add_option("--host", serve_opts.host);
  serve->add_option("--port", serve_opts.port, "Port (or TOPIC_GRIDS_PORT)");
  serve->add_option("--cors-origin", serve_opts.cors_origin, "Allowed UI origin (or TOPIC_GRIDS_CORS_ORIGIN)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (layout->parsed()) {
      const auto points = tg::read_points_csv(tg::read_file(layout_in));
      int h = layout_h;
      if (h < 0) {
        h = tg::grid_exponent_for(points.size());
        if (h < 0) throw tg::SizeError("size must be a power of 4 (got " + std::to_string(points.size()) + " points)");
      }
      emit(layout_out, tg::write_placement_csv(tg::split_diffuse(points, h)));
    } else if (embed->parsed()) {
      embed_cfg.method = tg::parse_method(embed_method);
      emit(embed_out, tg::write_points_csv(tg::embed(tg::read_distance_csv(tg::read_file(embed_in)), embed_cfg)));
    } else if (evaluate->parsed()) {
      const auto points = tg::read_points_csv(tg::read_file(eval_points));
      const auto placement = tg::read_placement_csv(tg::read_file(eval_placement));
      std::cout << tg::to_json(tg::evaluate(points, placement)).dump(2) << "\n";
    } else if (bench->parsed()) {
      tg::BenchmarkConfig cfg;
      cfg.layouts = parse_int_list(bench_layouts);
      std::stringstream ss(bench_samplers);
      for (std::string s; std::getline(ss, s, ',');) cfg.samplers.push_back(tg::parse_sampler(s));
      if (!bench_trials.empty()) cfg.trials = tg::parse_trials(bench_trials, cfg.layouts);
      cfg.master_seed = bench_seed;
      cfg.threads = bench_threads;
      const auto report = tg::run_benchmark(cfg);
      if (bench_json == "-") {
        std::cout << tg::to_json(report).dump(2) << "\n";
      } else {
        std::cout << tg::format_table(report);
        if (!bench_json.empty()) tg::write_file(bench_json, tg::to_json(report).dump(2) + "\n");
      }
    } else if (fixture->parsed()) {
      emit(fixture_out, tg::to_jsonl(tg::make_synthetic_log(fixture_cfg).entries));
    } else if (pipeline->parsed()) {
      pipe_cfg.metric = tg::parse_metric(pipe_metric);
      pipe_cfg.embedding.method = tg::parse_method(pipe_embedding);
      pipe_cfg.embedding.seed = pipe_cfg.lda.seed;
      if (!pipe_window.empty()) pipe_cfg.window = tg::parse_window(pipe_window);
      if (!pipe_period.empty()) pipe_cfg.period = tg::parse_window(pipe_period);
      const auto snap = tg::run_pipeline(tg::read_file(pipe_log), pipe_cfg);
      tg::write_snapshot(snap, pipe_out);
      std::cout << "snapshot " << snap.version << ": " << snap.model->K << " topics on a "
                << snap.placement.side() << "x" << snap.placement.side() << " grid, " << snap.grids.size()
                << " users -> " << pipe_out << "\n";
    } else if (serve->parsed()) {
      if (serve_dir.empty()) throw tg::DomainError("no snapshot directory given");
      tg::serve_api(std::make_shared<const tg::Snapshot>(tg::load_snapshot(serve_dir)), serve_opts);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
