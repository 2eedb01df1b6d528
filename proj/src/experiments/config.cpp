#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fedleak/experiments.hpp"

namespace fedleak::experiments {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Dotted key path -> line of its first appearance in the document.
using KeyLines = std::map<std::string, int>;

KeyLines scan_key_lines(std::string_view text) {
  struct Frame {
    bool object;
    std::string key;
  };
  KeyLines lines;
  std::vector<Frame> stack;
  bool expect_key = false;
  int line = 1;
  auto path_of = [&](const std::string& key) {
    std::string p;
    for (size_t k = 0; k + 1 < stack.size(); ++k)
      if (stack[k].object && !stack[k].key.empty()) p += stack[k].key + ".";
    return p + key;
  };
  for (size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (c == '\n') {
      ++line;
    } else if (c == '"') {
      std::string s;
      const int start_line = line;
      for (++k; k < text.size() && text[k] != '"'; ++k) {
        if (text[k] == '\\' && k + 1 < text.size()) ++k;
        if (text[k] == '\n') ++line;
        s += text[k];
      }
      if (expect_key && !stack.empty() && stack.back().object) {
        lines.emplace(path_of(s), start_line);
        stack.back().key = s;
        expect_key = false;
      }
    } else if (c == '{') {
      stack.push_back({true, ""});
      expect_key = true;
    } else if (c == '[') {
      stack.push_back({false, ""});
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
    } else if (c == ',') {
      expect_key = !stack.empty() && stack.back().object;
    }
  }
  return lines;
}

int line_for(const KeyLines& lines, const std::string& field) {
  const auto it = lines.find(field);
  return it == lines.end() ? 0 : it->second;
}

int line_of_offset(std::string_view text, size_t offset) {
  int line = 1;
  for (size_t k = 0; k < offset && k < text.size(); ++k)
    if (text[k] == '\n') ++line;
  return line;
}

class Reader {
 public:
  Reader(const KeyLines& lines, std::vector<Diagnostic>& diags) : lines_(lines), diags_(diags) {}

  void fail(const std::string& field, const std::string& message) {
    diags_.push_back({line_for(lines_, field), field, message});
  }

  using Setter = std::function<void(const json&, const std::string&)>;

  void section(const json& obj, const std::string& prefix,
               const std::vector<std::pair<std::string, Setter>>& fields) {
    if (!obj.is_object()) {
      fail(prefix.empty() ? "<root>" : prefix, "expected an object");
      return;
    }
    for (const auto& [key, value] : obj.items()) {
      const std::string field = prefix.empty() ? key : prefix + "." + key;
      bool known = false;
      for (const auto& [name, set] : fields)
        if (name == key) {
          known = true;
          set(value, field);
        }
      if (!known) fail(field, "unknown key");
    }
  }

  Setter number(double& dst) {
    return [this, &dst](const json& v, const std::string& f) {
      if (!v.is_number()) return fail(f, "expected a number");
      dst = v.get<double>();
    };
  }
  Setter optional_number(std::optional<double>& dst) {
    return [this, &dst](const json& v, const std::string& f) {
      if (v.is_null()) return void(dst.reset());
      if (!v.is_number()) return fail(f, "expected a number or null");
      dst = v.get<double>();
    };
  }
  Setter integer(int& dst) {
    return [this, &dst](const json& v, const std::string& f) {
      if (!v.is_number_integer()) return fail(f, "expected an integer");
      dst = v.get<int>();
    };
  }
  Setter text(std::string& dst) {
    return [this, &dst](const json& v, const std::string& f) {
      if (!v.is_string()) return fail(f, "expected a string");
      dst = v.get<std::string>();
    };
  }
  Setter int_list(std::vector<int>& dst) {
    return [this, &dst](const json& v, const std::string& f) {
      if (!v.is_array()) return fail(f, "expected an array of integers");
      dst.clear();
      for (const auto& e : v) {
        if (!e.is_number_integer()) return fail(f, "expected an array of integers");
        dst.push_back(e.get<int>());
      }
    };
  }
  Setter number_list(std::vector<double>& dst) {
    return [this, &dst](const json& v, const std::string& f) {
      if (!v.is_array()) return fail(f, "expected an array of numbers");
      dst.clear();
      for (const auto& e : v) {
        if (!e.is_number()) return fail(f, "expected an array of numbers");
        dst.push_back(e.get<double>());
      }
    };
  }

 private:
  const KeyLines& lines_;
  std::vector<Diagnostic>& diags_;
};

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (v == o) return true;
  return false;
}

}  // namespace

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids{
      "logistic_fig2", "zvar_sweep", "attack_vs_iter", "batch_sweep", "component_sweep",
      "corrupt_fraction", "lemma1_check", "toy_mi", "mia_auc"};
  return ids;
}

ExperimentConfig preset(std::string_view scenario) {
  ExperimentConfig c;
  c.scenario = std::string(scenario);
  if (scenario == "logistic_fig2") {
    c.graph = {"rgg", 60, std::nullopt, 3, ""};
    c.protocol.t_max = 200;
    c.data.kind = "gaussian";
    c.adversary.trials = 1;
  } else if (scenario == "zvar_sweep") {
    c.graph = {"ring", 6, std::nullopt, 2, ""};
    c.protocol.t_max = 6;
    c.adversary.corrupt = {0};
    c.sweep = {0, 1e-8, 1e-7, 2.5e-7, 1e-6, 1e-5, 2.5e-5, 1e-4};
  } else if (scenario == "attack_vs_iter") {
    c.graph = {"ring", 4, std::nullopt, 2, ""};
    c.protocol.t_max = 800;
    c.sweep = {0, 1, 2, 5, 10, 200, 400, 600, 796};
  } else if (scenario == "batch_sweep") {
    c.graph = {"ring", 4, std::nullopt, 2, ""};
    c.protocol.t_max = 6;
    c.sweep = {1, 2, 4, 8};
  } else if (scenario == "component_sweep") {
    c.graph = {"ring", 9, std::nullopt, 2, ""};
    c.protocol.t_max = 6;
    c.sweep = {2, 4, 8};
  } else if (scenario == "corrupt_fraction") {
    c.graph = {"rgg", 8, std::nullopt, 2, ""};
    c.protocol.t_max = 6;
    c.sweep = {1, 3, 5, 7};
  } else if (scenario == "mia_auc") {
    c.graph = {"rgg", 10, std::nullopt, 2, ""};
    c.protocol.t_max = 3;
    c.data.per_node = 4;
    c.adversary.trials = 10;
    c.adversary.attack_iter = 0;
    c.sweep = {1, 3, 5, 7, 9};
  } else if (scenario == "lemma1_check") {
    c.adversary.trials = 50;
  } else if (scenario == "toy_mi") {
    c.graph = {"rgg", 3, std::nullopt, 2, ""};
    c.adversary.trials = 10;
  } else {
    throw ConfigError({{0, "scenario", "unknown scenario '" + std::string(scenario) + "'"}});
  }
  return c;
}

std::string format_diagnostic(const Diagnostic& d, std::string_view source) {
  std::string out = source.empty() ? std::string("config") : std::string(source);
  if (d.line > 0) out += ":" + std::to_string(d.line);
  out += ": " + d.field + ": " + d.message;
  return out;
}

namespace {
std::string join_diagnostics(const std::vector<Diagnostic>& diags, const std::string& source) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "\n";
    out += format_diagnostic(d, source);
  }
  return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics, std::string source)
    : Error(join_diagnostics(diagnostics, source)), diagnostics_(std::move(diagnostics)) {}

std::vector<Diagnostic> check_config(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  auto bad = [&](const char* field, const std::string& msg) { d.push_back({0, field, msg}); };
  bool known = false;
  for (const auto& id : scenario_ids()) known = known || id == c.scenario;
  if (!known) bad("scenario", "unknown scenario '" + c.scenario + "'");

  const auto& g = c.graph;
  if (!one_of(g.kind, {"rgg", "ring", "path", "complete", "star", "edges"}))
    bad("graph.kind", "must be one of rgg, ring, path, complete, star, edges");
  if (g.nodes < 1) bad("graph.nodes", "must be >= 1");
  if (g.dims != 2 && g.dims != 3) bad("graph.dims", "must be 2 or 3");
  if (g.radius && !(*g.radius > 0.0 && *g.radius <= std::sqrt(static_cast<double>(g.dims))))
    bad("graph.radius", "must lie in (0, sqrt(dims)]");
  if (g.kind == "edges" && g.edges.empty()) bad("graph.edges", "required when kind is 'edges'");

  const auto& p = c.protocol;
  if (!(p.rho > 0.0)) bad("protocol.rho", "must be > 0");
  if (!(p.theta > 0.0 && p.theta <= 1.0)) bad("protocol.theta", "must lie in (0, 1]");
  if (!(p.sigma_z2 >= 0.0)) bad("protocol.sigma_z2", "must be >= 0");
  if (!one_of(p.solver, {"exact", "gd", "quadratic_approx"}))
    bad("protocol.solver", "must be one of exact, gd, quadratic_approx");
  if (!(p.mu > 0.0)) bad("protocol.mu", "must be > 0");
  if (!(p.cfl_mu > 0.0)) bad("protocol.cfl_mu", "must be > 0");
  if (p.t_max < 1) bad("protocol.t_max", "must be >= 1");

  const auto& a = c.data;
  if (!one_of(a.kind, {"images", "gaussian"})) bad("data.kind", "must be images or gaussian");
  if (a.per_node < 1) bad("data.per_node", "must be >= 1");
  if (a.side < 1) bad("data.side", "must be >= 1");
  if (a.classes < 2) bad("data.classes", "must be >= 2");
  if (a.hidden < 1) bad("data.hidden", "must be >= 1");
  if (!(a.noise >= 0.0)) bad("data.noise", "must be >= 0");
  if (!(a.weight_decay >= 0.0)) bad("data.weight_decay", "must be >= 0");

  const auto& v = c.adversary;
  for (int id : v.corrupt)
    if (id < 0 || (g.kind != "edges" && id >= g.nodes))
      bad("adversary.corrupt", "node id " + std::to_string(id) + " is out of range");
  if (v.corrupt_fraction && !(*v.corrupt_fraction >= 0.0 && *v.corrupt_fraction <= 1.0))
    bad("adversary.corrupt_fraction", "must lie in [0, 1]");
  if (v.trials < 1) bad("adversary.trials", "must be >= 1");
  if (v.steps < 1) bad("adversary.steps", "must be >= 1");
  if (v.restarts < 1) bad("adversary.restarts", "must be >= 1");
  if (v.attack_iter < 0) bad("adversary.attack_iter", "must be >= 0");
  return d;
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  const std::string src(source);
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError({{line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), "<document>",
                        std::string("malformed JSON: ") + e.what()}},
                      src);
  }
  const KeyLines lines = scan_key_lines(text);
  std::vector<Diagnostic> diags;
  Reader r(lines, diags);

  if (!doc.is_object()) throw ConfigError({{1, "<document>", "expected a JSON object"}}, src);
  if (!doc.contains("scenario") || !doc["scenario"].is_string())
    throw ConfigError({{line_for(lines, "scenario"), "scenario", "a scenario id string is required"}},
                      src);
  const std::string scenario = doc["scenario"].get<std::string>();
  ExperimentConfig c;
  try {
    c = preset(scenario);
  } catch (const ConfigError& e) {
    auto d = e.diagnostics();
    for (auto& x : d) x.line = line_for(lines, "scenario");
    throw ConfigError(d, src);
  }

  auto seed_setter = [&](const json& v, const std::string& f) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      return r.fail(f, "expected a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  };
  auto graph_section = [&](const json& v, const std::string& f) {
    r.section(v, f,
              {{"kind", r.text(c.graph.kind)},
               {"nodes", r.integer(c.graph.nodes)},
               {"radius", r.optional_number(c.graph.radius)},
               {"dims", r.integer(c.graph.dims)},
               {"edges", r.text(c.graph.edges)}});
  };
  auto protocol_section = [&](const json& v, const std::string& f) {
    r.section(v, f,
              {{"rho", r.number(c.protocol.rho)},
               {"theta", r.number(c.protocol.theta)},
               {"sigma_z2", r.number(c.protocol.sigma_z2)},
               {"solver", r.text(c.protocol.solver)},
               {"mu", r.number(c.protocol.mu)},
               {"cfl_mu", r.number(c.protocol.cfl_mu)},
               {"t_max", r.integer(c.protocol.t_max)}});
  };
  auto data_section = [&](const json& v, const std::string& f) {
    r.section(v, f,
              {{"kind", r.text(c.data.kind)},
               {"per_node", r.integer(c.data.per_node)},
               {"side", r.integer(c.data.side)},
               {"classes", r.integer(c.data.classes)},
               {"hidden", r.integer(c.data.hidden)},
               {"noise", r.number(c.data.noise)},
               {"weight_decay", r.number(c.data.weight_decay)}});
  };
  auto adversary_section = [&](const json& v, const std::string& f) {
    r.section(v, f,
              {{"corrupt", r.int_list(c.adversary.corrupt)},
               {"corrupt_fraction", r.optional_number(c.adversary.corrupt_fraction)},
               {"trials", r.integer(c.adversary.trials)},
               {"steps", r.integer(c.adversary.steps)},
               {"restarts", r.integer(c.adversary.restarts)},
               {"attack_iter", r.integer(c.adversary.attack_iter)}});
  };
  r.section(doc, "",
            {{"scenario", [](const json&, const std::string&) {}},
             {"seed", seed_setter},
             {"graph", graph_section},
             {"protocol", protocol_section},
             {"data", data_section},
             {"adversary", adversary_section},
             {"sweep", r.number_list(c.sweep)}});

  for (auto d : check_config(c)) {
    d.line = line_for(lines, d.field);
    // Values that came from the preset have no line of their own.
    const bool dup = std::any_of(diags.begin(), diags.end(),
                                 [&](const Diagnostic& x) { return x.field == d.field; });
    if (!dup) diags.push_back(d);
  }
  if (!diags.empty()) throw ConfigError(diags, src);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({{0, "<file>", "cannot open " + path.string()}}, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::vector<Diagnostic> validate_config(const std::filesystem::path& path) {
  try {
    load_config(path);
  } catch (const ConfigError& e) {
    return e.diagnostics();
  }
  return {};
}

std::string to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  ordered_json g;
  g["kind"] = c.graph.kind;
  g["nodes"] = c.graph.nodes;
  g["radius"] = c.graph.radius ? ordered_json(*c.graph.radius) : ordered_json(nullptr);
  g["dims"] = c.graph.dims;
  g["edges"] = c.graph.edges;
  j["graph"] = g;
  ordered_json p;
  p["rho"] = c.protocol.rho;
  p["theta"] = c.protocol.theta;
  p["sigma_z2"] = c.protocol.sigma_z2;
  p["solver"] = c.protocol.solver;
  p["mu"] = c.protocol.mu;
  p["cfl_mu"] = c.protocol.cfl_mu;
  p["t_max"] = c.protocol.t_max;
  j["protocol"] = p;
  ordered_json d;
  d["kind"] = c.data.kind;
  d["per_node"] = c.data.per_node;
  d["side"] = c.data.side;
  d["classes"] = c.data.classes;
  d["hidden"] = c.data.hidden;
  d["noise"] = c.data.noise;
  d["weight_decay"] = c.data.weight_decay;
  j["data"] = d;
  ordered_json a;
  a["corrupt"] = c.adversary.corrupt;
  a["corrupt_fraction"] = c.adversary.corrupt_fraction ? ordered_json(*c.adversary.corrupt_fraction)
                                                       : ordered_json(nullptr);
  a["trials"] = c.adversary.trials;
  a["steps"] = c.adversary.steps;
  a["restarts"] = c.adversary.restarts;
  a["attack_iter"] = c.adversary.attack_iter;
  j["adversary"] = a;
  j["sweep"] = c.sweep;
  return j.dump();
}

}  // namespace fedleak::experiments
