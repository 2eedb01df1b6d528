#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include <json.hpp>

#include "fedleak/experiments.hpp"

namespace fedleak::experiments {

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<ResultRow> sorted_rows(const ScenarioResult& r) {
  std::vector<ResultRow> rows = r.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.iteration, a.metric, a.seed) < std::tie(b.iteration, b.metric, b.seed);
  });
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

std::string result_csv(const ScenarioResult& result) {
  std::string out = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  out += "# config: " + to_json(result.config) + "\n";
  out += "scenario,seed,iteration,metric,value\n";
  for (const auto& r : sorted_rows(result)) {
    out += r.scenario + "," + std::to_string(r.seed) + "," + std::to_string(r.iteration) + "," +
           r.metric + "," + number(r.value) + "\n";
  }
  return out;
}

std::string result_json(const ScenarioResult& result) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = nlohmann::ordered_json::parse(to_json(result.config));
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : sorted_rows(result)) {
    nlohmann::ordered_json row;
    row["scenario"] = r.scenario;
    row["seed"] = r.seed;
    row["iteration"] = r.iteration;
    row["metric"] = r.metric;
    // JSON has no NaN; such values are written as null.
    row["value"] = std::isfinite(r.value) ? nlohmann::ordered_json(r.value) : nlohmann::ordered_json();
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_outputs(const ScenarioResult& result,
                                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto csv = dir / (result.config.scenario + ".csv");
  const auto json = dir / (result.config.scenario + ".json");
  write_file(csv, result_csv(result));
  write_file(json, result_json(result));
  return {csv, json};
}

double mean_metric(const ScenarioResult& result, std::string_view metric,
                   std::optional<int> iteration) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : result.rows) {
    if (r.metric != metric || (iteration && r.iteration != *iteration)) continue;
    sum += r.value;
    ++count;
  }
  if (count == 0) throw Error("mean_metric: no rows for '" + std::string(metric) + "'");
  return sum / count;
}

}  // namespace fedleak::experiments
