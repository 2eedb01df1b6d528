#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>
#include <sys/wait.h>

#include <json.hpp>

#include "fedleak/experiments.hpp"

using namespace fedleak;
using namespace fedleak::experiments;

namespace {

std::vector<Diagnostic> diagnostics_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.diagnostics();
  }
  return {};
}

bool has(const std::vector<Diagnostic>& d, const std::string& field, int line = -1) {
  for (const auto& x : d)
    if (x.field == field && (line < 0 || x.line == line)) return true;
  return false;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fedleak_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FEDLEAK_RUN_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("every preset passes validation") {
    for (const auto& id : scenario_ids()) {
      CAPTURE(id);
      CHECK(check_config(preset(id)).empty());
      CHECK(diagnostics_of("{\"scenario\": \"" + id + "\"}").empty());
    }
  }

  TEST_CASE("values override the preset") {
    const auto c = parse_config(R"({
      "scenario": "zvar_sweep",
      "seed": 42,
      "protocol": {"rho": 0.7, "solver": "exact"},
      "adversary": {"corrupt": [1, 2], "trials": 3},
      "sweep": [0, 1e-3]
    })");
    CHECK(c.seed == 42);
    CHECK(c.protocol.rho == 0.7);
    CHECK(c.protocol.solver == "exact");
    CHECK(c.protocol.theta == 1.0);
    CHECK(c.graph.kind == "ring");
    CHECK(c.adversary.corrupt == std::vector<int>{1, 2});
    CHECK(c.sweep == std::vector<double>{0.0, 1e-3});
  }

  TEST_CASE("unknown keys are named with their line") {
    const auto d = diagnostics_of("{\n  \"scenario\": \"toy_mi\",\n  \"graph\": {\n    \"nodez\": 3\n  },\n  \"sed\": 1\n}\n");
    CHECK(has(d, "graph.nodez", 4));
    CHECK(has(d, "sed", 6));
  }

  TEST_CASE("non-positive rho is a diagnostic naming the field") {
    const auto d = diagnostics_of("{\"scenario\": \"zvar_sweep\",\n\"protocol\": {\"rho\": 0}}");
    REQUIRE(d.size() == 1);
    CHECK(d[0].field == "protocol.rho");
    CHECK(d[0].line == 2);
    CHECK(format_diagnostic(d[0], "cfg.json") == "cfg.json:2: protocol.rho: must be > 0");
  }

  TEST_CASE("a corrupt fraction above one is a diagnostic") {
    CHECK(has(diagnostics_of(R"({"scenario": "mia_auc", "adversary": {"corrupt_fraction": 1.5}})"),
              "adversary.corrupt_fraction", 1));
  }

  TEST_CASE("type errors and range errors") {
    const auto d = diagnostics_of(R"({"scenario": "toy_mi",
      "protocol": {"theta": "one", "t_max": 2.5},
      "graph": {"kind": "torus"},
      "adversary": {"corrupt": [9]}})");
    CHECK(has(d, "protocol.theta", 2));
    CHECK(has(d, "protocol.t_max", 2));
    CHECK(has(d, "graph.kind", 3));
    CHECK(has(d, "adversary.corrupt", 4));
  }

  TEST_CASE("scenario problems") {
    CHECK(has(diagnostics_of(R"({"seed": 1})"), "scenario"));
    CHECK(has(diagnostics_of(R"({"scenario": "fig99"})"), "scenario", 1));
    CHECK_THROWS_AS(preset("fig99"), ConfigError);
  }

  TEST_CASE("malformed JSON reports the line") {
    const auto d = diagnostics_of("{\n\"scenario\": \"toy_mi\",\n\"seed\": ,\n}");
    REQUIRE(d.size() == 1);
    CHECK(d[0].field == "<document>");
    CHECK(d[0].line == 3);
  }

  TEST_CASE("resolved config survives a JSON round trip") {
    auto c = preset("mia_auc");
    c.graph.radius = 0.55;
    c.adversary.corrupt_fraction = 0.25;
    c.seed = 18446744073709551615ULL;
    const auto back = parse_config(to_json(c));
    CHECK(to_json(back) == to_json(c));
  }

  TEST_CASE("files") {
    const auto dir = scratch_dir("files");
    std::ofstream(dir / "ok.json") << R"({"scenario": "lemma1_check"})";
    std::ofstream(dir / "bad.json") << "{\"scenario\": \"lemma1_check\",\n\"bogus\": 1}";
    CHECK(validate_config(dir / "ok.json").empty());
    CHECK(has(validate_config(dir / "bad.json"), "bogus", 2));
    CHECK_FALSE(validate_config(dir / "missing.json").empty());
  }
}

TEST_SUITE("runs") {
  TEST_CASE("trial seeds follow splitmix64") {
    // First output of the reference generator seeded with 0.
    CHECK(trial_seed(0, 0) == 0xe220a8397b1dcdafULL);
    CHECK(trial_seed(5, 2) == trial_seed(7, 0));
  }

  TEST_CASE("toy scenario rows and the corollary route") {
    auto c = preset("toy_mi");
    c.adversary.trials = 4;
    const auto r = run_scenario(c);
    CHECK(r.rows.size() == 4 * 6);
    for (const auto& row : r.rows) CHECK(row.scenario == "toy_mi");
    CHECK(mean_metric(r, "i_dfl") <= mean_metric(r, "i_cfl") + 1e-10);
    CHECK_THROWS_AS(mean_metric(r, "nothing"), Error);
  }

  TEST_CASE("csv layout") {
    auto c = preset("lemma1_check");
    c.adversary.trials = 3;
    const std::string csv = result_csv(run_scenario(c));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# schema_version: 1");
    std::getline(in, line);
    REQUIRE(line.rfind("# config: ", 0) == 0);
    CHECK(to_json(parse_config(line.substr(10))) == to_json(c));
    std::getline(in, line);
    CHECK(line == "scenario,seed,iteration,metric,value");
    std::vector<std::tuple<int, std::string, std::uint64_t>> keys;
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream cells(line);
      for (std::string cell; std::getline(cells, cell, ',');) f.push_back(cell);
      REQUIRE(f.size() == 5);
      keys.emplace_back(std::stoi(f[2]), f[3], std::stoull(f[1]));
    }
    CHECK(keys.size() == 9);
    CHECK(std::is_sorted(keys.begin(), keys.end()));
  }

  TEST_CASE("reruns are byte identical") {
    auto c = preset("zvar_sweep");
    c.adversary.trials = 1;
    c.adversary.steps = 40;
    c.sweep = {0.0, 1e-4};
    CHECK(result_csv(run_scenario(c)) == result_csv(run_scenario(c)));
    c.seed = 2;
    auto other = preset("zvar_sweep");
    other.adversary = c.adversary;
    other.sweep = c.sweep;
    CHECK(result_csv(run_scenario(c)) != result_csv(run_scenario(other)));
  }

  TEST_CASE("json output mirrors the rows") {
    auto c = preset("lemma1_check");
    c.adversary.trials = 2;
    const auto r = run_scenario(c);
    const auto j = nlohmann::json::parse(result_json(r));
    CHECK(j["schema_version"] == kSchemaVersion);
    CHECK(j["config"]["scenario"] == "lemma1_check");
    CHECK(j["rows"].size() == r.rows.size());
    const auto dir = scratch_dir("outputs");
    const auto paths = write_outputs(r, dir);
    REQUIRE(paths.size() == 2);
    CHECK(slurp(paths[0]) == result_csv(r));
    CHECK(slurp(paths[1]) == result_json(r));
  }

  TEST_CASE("infeasible parameters are config errors") {
    auto c = preset("zvar_sweep");
    c.protocol.t_max = 2;
    CHECK_THROWS_AS(run_scenario(c), ConfigError);
    auto l = preset("logistic_fig2");
    l.data.per_node = 2;
    CHECK_THROWS_AS(run_scenario(l), ConfigError);
    auto m = preset("mia_auc");
    m.sweep = {10};
    CHECK_THROWS_AS(run_scenario(m), ConfigError);
  }

  TEST_CASE("a runaway step size surfaces as divergence") {
    auto c = preset("logistic_fig2");
    c.graph.nodes = 8;
    c.protocol.mu = 50.0;
    c.protocol.t_max = 300;
    CHECK_THROWS_AS(run_scenario(c), DivergenceError);
  }
}

TEST_SUITE("command line") {
  TEST_CASE("exit codes") {
    const auto dir = scratch_dir("cli");
    std::ofstream(dir / "bad.json") << R"({"scenario": "toy_mi", "protocol": {"rho": -1}})";
    std::ofstream(dir / "typo.json") << R"({"scenario": "toy_mi", "protocl": {}})";
    CHECK(run_cli("--scenario toy_mi --trials 2 --out " + dir.string()) == 0);
    CHECK(std::filesystem::exists(dir / "toy_mi.csv"));
    CHECK(std::filesystem::exists(dir / "toy_mi.json"));
    CHECK(run_cli("--config " + (dir / "bad.json").string()) == 2);
    CHECK(run_cli("--config " + (dir / "typo.json").string() + " --validate") == 2);
    CHECK(run_cli("--scenario toy_mi --corrupt-frac 2") == 2);
    CHECK(run_cli("--scenario nonsense") == 2);
    CHECK(run_cli("--scenario toy_mi --validate") == 0);
  }

  TEST_CASE("divergence exits with 3") {
    const auto dir = scratch_dir("cli_div");
    std::ofstream(dir / "div.json")
        << R"({"scenario": "logistic_fig2", "graph": {"nodes": 8}, "protocol": {"mu": 50, "t_max": 300}})";
    CHECK(run_cli("--config " + (dir / "div.json").string() + " --out " + dir.string()) == 3);
  }

  TEST_CASE("seed override reproduces the library run") {
    const auto dir = scratch_dir("cli_seed");
    REQUIRE(run_cli("--scenario lemma1_check --seed 9 --trials 3 --out " + dir.string()) == 0);
    auto c = preset("lemma1_check");
    c.seed = 9;
    c.adversary.trials = 3;
    CHECK(slurp(dir / "lemma1_check.csv") == result_csv(run_scenario(c)));
  }
}
