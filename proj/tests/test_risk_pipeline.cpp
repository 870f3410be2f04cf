#include <doctest.h>

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "topic_grids/error.hpp"
#include "topic_grids/fixture.hpp"
#include "topic_grids/random.hpp"
#include "topic_grids/risk_pipeline.hpp"

using namespace topic_grids;

namespace {

const std::vector<std::string> kFruit = {"apple", "banana", "cherry", "grape", "lemon", "mango", "melon", "peach"};
const std::vector<std::string> kTools = {"anvil", "bolt", "chisel", "drill", "hammer", "nail", "pliers", "wrench"};
const std::vector<std::string> kBirds = {"crow", "eagle", "finch", "heron", "raven", "robin", "swan", "wren"};
const std::vector<std::string> kStone = {"basalt", "chalk", "flint", "granite", "marble", "quartz", "shale", "slate"};

constexpr Timestamp kDay = 86400;
constexpr Timestamp kStart = 1451606400;  // 2016-01-01

LogEntry access(Timestamp ts, const std::string& user, const std::string& group, Rng& rng,
                const std::vector<std::string>& theme) {
  LogEntry e;
  e.ts = ts;
  e.user = user;
  e.action = "read";
  e.path = "/" + theme[rng.below(theme.size())] + "/" + theme[rng.below(theme.size())] + "." +
           theme[rng.below(theme.size())];
  e.meta = theme[rng.below(theme.size())];
  e.group = group;
  return e;
}

// u1 works on fruit for nine days, then on tools on day ten. Peers u2, u3
// share u1's group; u4 is in another group.
std::vector<LogEntry> four_theme_log() {
  Rng rng(10);
  std::vector<LogEntry> log;
  for (int day = 0; day < 10; ++day) {
    for (int i = 0; i < 12; ++i) {
      const Timestamp ts = kStart + day * kDay + 3600 + i * 600;
      log.push_back(access(ts, "u1", "ops", rng, day < 9 ? kFruit : kTools));
      log.push_back(access(ts + 1, "u2", "ops", rng, i % 2 == 0 ? kFruit : kBirds));
      log.push_back(access(ts + 2, "u3", "ops", rng, kBirds));
      log.push_back(access(ts + 3, "u4", "dev", rng, i % 2 == 0 ? kTools : kStone));
    }
  }
  return log;
}

struct Fitted {
  std::shared_ptr<const TopicModel> model;
  std::unique_ptr<ActivityIndex> index;
  Placement placement;
  std::vector<std::string> labels;
  TimeWindow period{kStart, kStart + 10 * kDay};
  TimeWindow last_day{kStart + 9 * kDay, kStart + 10 * kDay};
};

const Fitted& fitted() {
  static const Fitted f = [] {
    Fitted out;
    const auto log = four_theme_log();
    std::vector<std::string> docs;
    for (const auto& e : log) docs.push_back(content_document(e));
    LdaConfig cfg;
    cfg.topics = 4;
    cfg.iterations = 300;
    cfg.averaged = 50;
    cfg.seed = 3;
    out.model = std::make_shared<const TopicModel>(fit_lda(build_corpus(docs), cfg));
    out.index = std::make_unique<ActivityIndex>(log, out.model, out.period);
    out.placement = build_topic_placement(*out.model, DistanceMetric::kCosine, EmbeddingConfig{});
    for (int k = 0; k < 4; ++k) out.labels.push_back(topic_label(*out.model, k).label);
    return out;
  }();
  return f;
}

ActivityVector with_mass(std::vector<double> mass) {
  ActivityVector v;
  v.window = {0, 1};
  v.mass = std::move(mass);
  return v;
}

}  // namespace

TEST_CASE("timestamps round trip and reject junk") {
  CHECK(parse_timestamp("2016-01-01T00:00:00Z") == kStart);
  CHECK(parse_timestamp("2016-02-29T12:34:56+00:00") == kStart + 59 * kDay + 12 * 3600 + 34 * 60 + 56);
  CHECK(format_timestamp(kStart + 59 * kDay + 45296) == "2016-02-29T12:34:56Z");
  CHECK(format_timestamp(0) == "1970-01-01T00:00:00Z");
  CHECK_THROWS_AS(parse_timestamp("2016-02-30T00:00:00Z"), DomainError);
  CHECK_THROWS_AS(parse_timestamp("2016-01-01T00:00:00"), DomainError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), DomainError);
}

TEST_CASE("parse_log: single well-formed line") {
  const auto parsed = parse_log(R"({"ts":"2016-01-01T00:00:00Z","user":"u1","action":"read","path":"/a/b.txt"})");
  REQUIRE(parsed.entries.size() == 1);
  const auto& e = parsed.entries[0];
  CHECK(e.ts == kStart);
  CHECK(e.user == "u1");
  CHECK(e.action == "read");
  CHECK(e.path == "/a/b.txt");
  CHECK(e.meta.empty());
  CHECK_FALSE(e.group.has_value());
  CHECK(parsed.failures.empty());
}

TEST_CASE("parse_log: malformed lines are reported, not dropped silently") {
  std::string text;
  for (int i = 0; i < 100; ++i) {
    if (i == 40) text += "not json\n";
    text += R"({"ts":"2016-01-01T00:00:00Z","user":"u1","action":"read","path":"/a"})" "\n";
  }
  const auto parsed = parse_log(text);
  CHECK(parsed.entries.size() == 100);
  REQUIRE(parsed.failures.size() == 1);
  CHECK(parsed.failures[0].line == 41);
}

TEST_CASE("parse_log: too many malformed lines is an ingest error") {
  std::string text;
  for (int i = 0; i < 100; ++i) {
    text += i % 2 == 0 ? std::string(R"({"ts":"2016-01-01T00:00:00Z","user":"u1","action":"read"})")
                       : std::string(R"({"user":"u1"})");
    text += "\n";
  }
  CHECK_THROWS_AS(parse_log(text), IngestError);
  CHECK_NOTHROW(parse_log(text, 0.5));
  CHECK_THROWS_AS(parse_log(""), IngestError);
  CHECK_THROWS_AS(parse_log("\n\n"), IngestError);
  CHECK_THROWS_AS(parse_log(R"({"ts":"2016-01-01T00:00:00Z","user":"","action":"read"})"), IngestError);
}

TEST_CASE("content_document examples") {
  LogEntry e;
  e.path = "/a/payroll.xlsx";
  e.meta = "finance export";
  CHECK(content_document(e) == "/a/payroll.xlsx finance export");
  e.meta.clear();
  CHECK(content_document(e) == "/a/payroll.xlsx");
  e.path.clear();
  CHECK(content_document(e).empty());
}

TEST_CASE("risk_vector examples") {
  CHECK(risk_vector(with_mass({2, 3, 5}), with_mass({2, 3, 5})) == std::vector<double>{0, 0, 0});
  const auto r = risk_vector(with_mass({1, 0}), with_mass({0, 1}));
  CHECK(std::abs(r[0] - 1.0) < 1e-5);
  CHECK(r[1] == 0.0);
  const auto r2 = risk_vector(with_mass({0.5, 0.5}), with_mass({0.75, 0.25}));
  CHECK(r2[0] == 0.0);
  CHECK(r2[1] == doctest::Approx(0.25).epsilon(1e-5));
  CHECK_THROWS_AS(risk_vector(with_mass({1, 2}), with_mass({1, 2, 3})), DomainError);
}

TEST_CASE("property: total risk lies in [0, 1) and vanishes only on equal distributions") {
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t K = 1 + rng.below(64);
    std::vector<double> a(K), b(K);
    for (std::size_t k = 0; k < K; ++k) {
      a[k] = rng.uniform() < 0.3 ? 0.0 : rng.uniform() * 10.0;
      b[k] = rng.uniform() < 0.3 ? 0.0 : rng.uniform() * 10.0;
    }
    const auto r = risk_vector(with_mass(a), with_mass(b));
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    REQUIRE(total >= 0.0);
    REQUIRE(total < 1.0);
    REQUIRE(std::all_of(r.begin(), r.end(), [](double v) { return v >= 0.0; }));
    const auto same = risk_vector(with_mass(a), with_mass(a));
    REQUIRE(std::accumulate(same.begin(), same.end(), 0.0) == 0.0);
    if (total == 0.0) REQUIRE(smoothed_distribution(a) == smoothed_distribution(b));
  }
}

TEST_CASE("activity_vector: empty, single and additive selections") {
  const auto& f = fitted();
  const ActivityIndex& index = *f.index;
  const TimeWindow nothing{kStart - 10 * kDay, kStart - 9 * kDay};
  const auto zero = activity_vector(index, "u1", Scope::kCurrent, nothing);
  CHECK(zero.mass == std::vector<double>(4, 0.0));

  const auto& e0 = index.entries()[0];
  REQUIRE(e0.user == "u1");
  const TimeWindow one{e0.ts, e0.ts + 1};
  CHECK(activity_vector(index, "u1", Scope::kCurrent, one).mass == index.relevance(0));

  const auto& e4 = index.entries()[4];
  REQUIRE(e4.user == "u1");
  const TimeWindow two{e0.ts, e4.ts + 1};
  const auto both = activity_vector(index, "u1", Scope::kCurrent, two).mass;
  for (std::size_t k = 0; k < 4; ++k) CHECK(both[k] == doctest::Approx(index.relevance(0)[k] + index.relevance(4)[k]));

  CHECK_THROWS_AS(parse_scope("SIDEWAYS"), DomainError);
  CHECK_THROWS_AS(activity_vector(index, "u1", Scope::kCurrent, TimeWindow{5, 5}), DomainError);
}

TEST_CASE("activity index: scope rules and peers") {
  const auto& f = fitted();
  const ActivityIndex& index = *f.index;
  CHECK(index.peers_of("u1") == std::vector<std::string>{"u2", "u3"});
  CHECK(index.peers_of("u4").empty());
  for (std::size_t i : index.select("u1", Scope::kSelfHistory, f.last_day)) {
    CHECK(index.entries()[i].user == "u1");
    CHECK(index.entries()[i].ts < f.last_day.start);
  }
  for (std::size_t i : index.select("u1", Scope::kPeerHistory, f.last_day)) {
    CHECK(index.entries()[i].user != "u1");
    CHECK(index.entries()[i].user != "u4");
  }
  CHECK(index.select("u1", Scope::kCurrent, f.last_day).size() == 12);
  CHECK(index.select("u1", Scope::kSelfHistory, f.last_day).size() == 108);
  CHECK(index.select("u1", Scope::kPeerHistory, f.last_day).size() == 240);
}

TEST_CASE("property: activity vectors are additive over disjoint windows") {
  const auto& f = fitted();
  for (int split = 1; split < 10; ++split) {
    const Timestamp mid = kStart + split * kDay;
    const auto a = activity_vector(*f.index, "u2", Scope::kCurrent, {kStart, mid}).mass;
    const auto b = activity_vector(*f.index, "u2", Scope::kCurrent, {mid, kStart + 10 * kDay}).mass;
    const auto all = activity_vector(*f.index, "u2", Scope::kCurrent, f.period).mass;
    for (std::size_t k = 0; k < 4; ++k) CHECK(all[k] == doctest::Approx(a[k] + b[k]).epsilon(1e-12));
  }
}

TEST_CASE("assemble_topic_grids: planted shift lands on the new topic's cell") {
  const auto& f = fitted();
  const auto g = assemble_topic_grids(*f.index, f.placement, f.labels, "u1", f.last_day);
  const int tools = topic_for_words(*f.model, kTools);
  const int fruit = topic_for_words(*f.model, kFruit);
  REQUIRE(tools != fruit);
  const auto argmax = std::max_element(g.self_risk.begin(), g.self_risk.end()) - g.self_risk.begin();
  CHECK(argmax == tools);
  CHECK(g.placement.cells[static_cast<std::size_t>(argmax)] == f.placement.cells[static_cast<std::size_t>(tools)]);
  CHECK(g.total_self_risk() > 0.5);
  CHECK(g.total_self_risk() < 1.0);
  CHECK(g.total_peer_risk() > 0.5);
  for (const auto* v : {&g.current, &g.self_history, &g.self_risk, &g.peer_history, &g.peer_risk}) {
    CHECK(v->size() == 4);
    CHECK(std::all_of(v->begin(), v->end(), [](double x) { return x >= 0.0; }));
  }
}

TEST_CASE("assemble_topic_grids: idle user gets zero current and risk") {
  const auto& f = fitted();
  const TimeWindow later{kStart + 20 * kDay, kStart + 21 * kDay};
  const auto g = assemble_topic_grids(*f.index, f.placement, f.labels, "u3", later);
  CHECK(g.current == std::vector<double>(4, 0.0));
  CHECK(g.self_risk == std::vector<double>(4, 0.0));
  CHECK(g.peer_risk == std::vector<double>(4, 0.0));
  CHECK(std::accumulate(g.self_history.begin(), g.self_history.end(), 0.0) > 0.0);
}

TEST_CASE("assemble_topic_grids: replaying history gives zero self risk") {
  const auto& f = fitted();
  std::vector<LogEntry> log;
  Rng rng(1);
  for (int i = 0; i < 6; ++i) log.push_back(access(kStart + i * 60, "r1", "x", rng, kBirds));
  const std::size_t n = log.size();
  for (std::size_t i = 0; i < n; ++i) {
    LogEntry again = log[i];
    again.ts += kDay;
    log.push_back(again);
  }
  const ActivityIndex index(log, f.model, {kStart, kStart + 2 * kDay});
  const auto g = assemble_topic_grids(index, f.placement, f.labels, "r1", {kStart + kDay, kStart + 2 * kDay});
  CHECK(g.self_risk == std::vector<double>(4, 0.0));
  CHECK(g.current == g.self_history);
}

TEST_CASE("topic grid JSON and SVG") {
  const auto& f = fitted();
  const auto g = assemble_topic_grids(*f.index, f.placement, f.labels, "u1", f.last_day);
  const auto j = to_json(g);
  CHECK(j.at("user") == "u1");
  CHECK(j.at("h") == 1);
  CHECK(j.at("window").at("start") == "2016-01-10T00:00:00Z");
  REQUIRE(j.at("cells").size() == 4);
  for (const auto& cell : j.at("cells")) {
    for (const char* key : {"k", "col", "row", "label", "current", "self_history", "self_risk", "peer_history", "peer_risk"}) {
      CHECK(cell.contains(key));
    }
  }
  CHECK(j.at("totals").at("self_risk").get<double>() == doctest::Approx(g.total_self_risk()));
  const auto svg = render_svg(g);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 20);
  for (const char* title : {"current", "self history", "self risk", "peer history", "peer risk"}) {
    CHECK(svg.find(std::string(">") + title + "<") != std::string::npos);
  }
}

TEST_CASE("build_topic_placement requires a power-of-four topic count") {
  TopicModel m;
  m.K = 3;
  m.vocabulary = {"aaa", "bbb"};
  m.topic_word = {{1, 0}, {0, 1}, {0.5, 0.5}};
  CHECK_THROWS_AS(build_topic_placement(m, DistanceMetric::kCosine, EmbeddingConfig{}), SizeError);
}
