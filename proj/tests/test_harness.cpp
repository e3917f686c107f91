#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "qvol/harness.hpp"

using namespace qvol;

TEST_CASE("config parsing handles comments, whitespace, and reserved keys") {
  ExperimentConfig c = ExperimentConfig::parse(
      "# an experiment\n"
      "kind = teleport-verify\n"
      "\n"
      "n = 2\n"
      "trials = 25   \n"
      "seed = 77\n"
      "workers = 3\n"
      "label = alpha = beta\n");
  CHECK(c.kind == "teleport-verify");
  CHECK(c.seed == 77);
  CHECK(c.workers == 3);
  CHECK(c.get_int("n") == 2);
  CHECK(c.get_int("trials") == 25);
  // Only the first '=' splits: values may contain '='.
  CHECK(c.get_str("label") == "alpha = beta");
  CHECK(c.has("n"));
  CHECK(!c.has("missing"));
  CHECK(c.get_int("missing", 9) == 9);
  CHECK(c.get_real("missing", 0.5) == doctest::Approx(0.5));
  CHECK(c.get_str("missing", "x") == "x");

  CHECK_THROWS_AS(ExperimentConfig::parse("kind = a\nkind = b\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::parse("novalue\n"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::parse("n = 2\nn = 3\n"),
                  std::invalid_argument);

  ExperimentConfig bad = ExperimentConfig::parse("x = notanumber\n");
  CHECK_THROWS_AS(bad.get_int("x"), std::invalid_argument);
  CHECK_THROWS_AS(bad.get_real("x"), std::invalid_argument);
  CHECK_THROWS_AS(bad.get_int("absent"), std::invalid_argument);
}

TEST_CASE("config serialization round-trips and sorts canonically") {
  ExperimentConfig c;
  c.kind = "design-check";
  c.seed = 5;
  c.workers = 2;
  c.params["zeta"] = "1";
  c.params["alpha"] = "2";
  std::string text = c.serialize();
  ExperimentConfig back = ExperimentConfig::parse(text);
  CHECK(back.kind == c.kind);
  CHECK(back.seed == c.seed);
  CHECK(back.workers == c.workers);
  CHECK(back.params == c.params);
  CHECK(back.serialize() == text);
  // Sorted output: alpha precedes zeta.
  CHECK(text.find("alpha") < text.find("zeta"));
}

TEST_CASE("config digests ignore the worker count but track the rest") {
  ExperimentConfig a = ExperimentConfig::parse(
      "kind = accdim\nm = 3\nseed = 9\nworkers = 1\n");
  ExperimentConfig b = ExperimentConfig::parse(
      "kind = accdim\nm = 3\nseed = 9\nworkers = 7\n");
  CHECK(a.digest() == b.digest());
  CHECK(a.digest().size() == 16);  // 64-bit hex

  ExperimentConfig c = ExperimentConfig::parse(
      "kind = accdim\nm = 4\nseed = 9\nworkers = 1\n");
  CHECK(a.digest() != c.digest());
  ExperimentConfig d = ExperimentConfig::parse(
      "kind = accdim\nm = 3\nseed = 10\nworkers = 1\n");
  CHECK(a.digest() != d.digest());
}

TEST_CASE("int lists parse comma-separated values") {
  ExperimentConfig c = ExperimentConfig::parse("k_values = 2,3, 5\n");
  CHECK(c.get_int_list("k_values") == std::vector<long long>{2, 3, 5});
  ExperimentConfig bad = ExperimentConfig::parse("k_values = 2,,3\n");
  CHECK_THROWS_AS(bad.get_int_list("k_values"), std::invalid_argument);
}

TEST_CASE("result records survive the line format") {
  ResultRecord r;
  r.kind = "design-check";
  r.config_digest = "0123456789abcdef";
  r.seed = 42;
  r.pass = true;
  r.wall_ms = 12.5;
  r.payload = {{"alpha", 1}, {"beta", {1, 2, 3}}};
  std::string line = r.to_line();
  CHECK(line.find('\n') == std::string::npos);
  ResultRecord back = ResultRecord::from_line(line);
  CHECK(back.kind == r.kind);
  CHECK(back.config_digest == r.config_digest);
  CHECK(back.seed == r.seed);
  CHECK(back.artifact_version == kArtifactVersion);
  CHECK(back.pass == r.pass);
  CHECK(back.payload == r.payload);
  CHECK_THROWS_AS(ResultRecord::from_line("not json"), std::runtime_error);
}

TEST_CASE("parallel_for covers every index exactly once and rethrows") {
  const std::size_t count = 1000;
  std::vector<int> hits(count, 0);
  parallel_for(count, 4, [&](std::size_t i) { hits[i] += 1; });
  for (std::size_t i = 0; i < count; ++i) CHECK(hits[i] == 1);

  // Worker count above the index count is fine.
  std::atomic<int> total{0};
  parallel_for(3, 16, [&](std::size_t) { total.fetch_add(1); });
  CHECK(total.load() == 3);

  CHECK_THROWS_AS(parallel_for(10, 2,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("x");
                               }),
                  std::runtime_error);
}

TEST_CASE("experiment kinds form a stable append-only registry") {
  const auto& kinds = experiment_kinds();
  REQUIRE(kinds.size() >= 7);
  CHECK(kinds[0] == "teleport-verify");
  CHECK(kinds[1] == "spacetime-random");
  CHECK(kinds[2] == "spacetime-clifford");
  CHECK(kinds[3] == "shadow-run");
  CHECK(kinds[4] == "design-check");
  CHECK(kinds[5] == "accdim");
  CHECK(kinds[6] == "bounds-table");
}

TEST_CASE("teleport experiment passes and reports its statistics") {
  ExperimentConfig c = ExperimentConfig::parse(
      "kind = teleport-verify\nn = 1\nt = 2\ntrials = 10\nseed = 3\n");
  ResultRecord r = run(c);
  CHECK(r.pass);
  CHECK(r.kind == "teleport-verify");
  CHECK(r.config_digest == c.digest());
  CHECK(r.seed == 3);
  CHECK(r.payload.at("trials").get<int>() == 10);
  CHECK(r.payload.at("min_fidelity").get<double>() >= 1.0 - 1e-9);
  CHECK(r.payload.at("fidelities").size() == 10);
  CHECK(r.wall_ms >= 0.0);
}

TEST_CASE("unknown kinds and missing parameters fail loudly") {
  ExperimentConfig c;
  c.kind = "no-such-kind";
  CHECK_THROWS_AS(run(c), std::invalid_argument);

  ExperimentConfig missing = ExperimentConfig::parse(
      "kind = spacetime-random\nt = 4\n");  // n is required
  CHECK_THROWS_AS(run(missing), std::invalid_argument);
}

TEST_CASE("payloads are identical across worker counts and replays") {
  for (const char* text :
       {"kind = teleport-verify\nn = 2\nt = 2\ntrials = 8\nseed = 11\n",
        "kind = accdim\nm = 3\nn = 1\nd_max = 2\npoints = 3\nseed = 5\n",
        "kind = shadow-run\nn = 1\nensemble = global-stab\nmode = formula\n"
        "state = haar-pure\nepsilon = 0.4\ndelta = 0.3\nseed = 2\n"}) {
    ExperimentConfig one = ExperimentConfig::parse(text);
    one.workers = 1;
    ExperimentConfig many = ExperimentConfig::parse(text);
    many.workers = 3;
    ResultRecord r1 = run(one);
    ResultRecord r2 = run(many);
    ResultRecord r3 = run(one);
    CHECK(r1.payload.dump() == r2.payload.dump());
    CHECK(r1.payload.dump() == r3.payload.dump());
    CHECK(r1.config_digest == r2.config_digest);
  }
}

TEST_CASE("spacetime experiments verify conversion and depth budgets") {
  ExperimentConfig c = ExperimentConfig::parse(
      "kind = spacetime-random\nn = 2\nt = 4\nk_values = 2,3\ntrials = 3\n"
      "seed = 7\n");
  ResultRecord r = run(c);
  CHECK(r.pass);
  const auto& per_k = r.payload.at("per_k");
  REQUIRE(per_k.size() == 2);
  CHECK(per_k[0].at("k").get<int>() == 2);
  CHECK(per_k[0].at("depth_budget").get<int>() == 4 / 2 + 4);
  CHECK(per_k[0].at("qubits").get<int>() == 4);
  CHECK(per_k[1].at("qubits").get<int>() == 6);
  CHECK(per_k[0].at("min_fidelity").get<double>() >= 1.0 - 1e-9);

  ExperimentConfig cl = ExperimentConfig::parse(
      "kind = spacetime-clifford\nn = 3\nt = 6\nk = 3\ntrials = 4\nseed = 13\n");
  ResultRecord rc = run(cl);
  CHECK(rc.pass);
  CHECK(rc.payload.at("per_k")[0].at("depth_ok").get<bool>());
}

TEST_CASE("shadow experiment estimates its observables within epsilon") {
  ExperimentConfig c = ExperimentConfig::parse(
      "kind = shadow-run\nn = 1\nensemble = global-stab\nmode = formula\n"
      "state = haar-pure\nepsilon = 0.3\ndelta = 0.2\nseed = 19\n");
  ResultRecord r = run(c);
  CHECK(r.pass);
  const auto& errors = r.payload.at("errors");
  for (const auto& e : errors) CHECK(e.get<double>() <= 0.3);
  CHECK(r.payload.at("plan_b").get<long long>() >= 1);
  CHECK(r.payload.at("plan_k").get<long long>() >= 1);
  CHECK(r.payload.at("convergence").size() >= 1);
}

TEST_CASE("design check flags exact designs and near-misses") {
  ExperimentConfig c = ExperimentConfig::parse(
      "kind = design-check\nensemble = stabilizer\nn = 1\nt = 3\nseed = 23\n");
  ResultRecord r = run(c);
  CHECK(r.pass);
  CHECK(r.payload.at("is_design").get<bool>());

  ExperimentConfig c4 = ExperimentConfig::parse(
      "kind = design-check\nensemble = stabilizer\nn = 1\nt = 4\nseed = 23\n");
  ResultRecord r4 = run(c4);
  CHECK(r4.pass);  // the frame-potential bound still holds
  CHECK(!r4.payload.at("is_design").get<bool>());
}

TEST_CASE("bounds table emits the accounting grid") {
  ExperimentConfig c = ExperimentConfig::parse(
      "kind = bounds-table\nm_values = 4,6\nn_values = 4\nd_values = 100,160\n"
      "seed = 1\n");
  ResultRecord r = run(c);
  CHECK(r.pass);
  const auto& rows = r.payload.at("rows");
  REQUIRE(rows.size() == 4);
  bool found = false;
  for (const auto& row : rows)
    if (row.at("m") == 4 && row.at("d") == 160) {
      found = true;
      CHECK(row.at("thm_bound").get<double>() == doctest::Approx(0.8));
    }
  CHECK(found);

  std::string table = emit_plot_data(r, "bounds");
  CHECK(table.find("thm_bound") != std::string::npos);
  CHECK(table.find("0.8") != std::string::npos);
  CHECK_THROWS_AS(emit_plot_data(r, "nonsense"), std::invalid_argument);
}

TEST_CASE("plot series render tab-separated tables with headers") {
  ExperimentConfig c = ExperimentConfig::parse(
      "kind = teleport-verify\nn = 1\nt = 2\ntrials = 4\nseed = 3\n");
  ResultRecord r = run(c);
  std::string fid = emit_plot_data(r, "fidelities");
  CHECK(fid.substr(0, fid.find('\n')).find('\t') != std::string::npos);
  // Header plus one row per trial.
  int lines = 0;
  for (char ch : fid)
    if (ch == '\n') ++lines;
  CHECK(lines == 5);
}
