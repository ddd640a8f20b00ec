#include "ipmsim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "ipmsim/errors.hpp"
#include "ipmsim/rational.hpp"
#include "ipmsim/svg.hpp"
#include "presets.hpp"

namespace ipmsim {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

// A value is either a bare literal or {"value": ..., "assumed": bool, "source": str}.
const json& unwrap(const json& node, std::string_view where) {
  if (!node.is_object()) return node;
  reject_unknown_keys(node, where, {"value", "assumed", "source"});
  if (!node.contains("value")) throw ConfigError(fmt::format("{}: annotated value needs a 'value' field", where));
  if (node.contains("assumed") && !node["assumed"].is_boolean()) {
    throw ConfigError(fmt::format("{}: 'assumed' must be a boolean", where));
  }
  if (node.contains("source") && !node["source"].is_string()) {
    throw ConfigError(fmt::format("{}: 'source' must be a string", where));
  }
  return node["value"];
}

double number(const json& node, std::string_view where) {
  const json& v = unwrap(node, where);
  if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", where));
  return v.get<double>();
}

// Periods accept numbers, "p/q" strings, or null (agent not applied).
std::optional<double> period(const json& node, std::string_view where) {
  const json& v = unwrap(node, where);
  if (v.is_null()) return std::nullopt;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return Rational::parse(v.get<std::string>()).value();
    } catch (const DomainError& e) {
      throw ConfigError(fmt::format("{}: {}", where, e.what()));
    }
  }
  throw ConfigError(fmt::format("{}: expected a number, a \"p/q\" string or null", where));
}

bool boolean(const json& node, std::string_view where) {
  const json& v = unwrap(node, where);
  if (!v.is_boolean()) throw ConfigError(fmt::format("{}: expected a boolean", where));
  return v.get<bool>();
}

void apply_params(const json& obj, ModelParameters& p) {
  reject_unknown_keys(obj, "params", {"r", "k", "alpha", "phi", "lambda", "c1", "c2", "d", "delta", "theta", "gamma",
                                      "mu", "m1", "m2"});
  const std::pair<const char*, double*> fields[] = {
      {"r", &p.r},         {"k", &p.k},   {"alpha", &p.alpha}, {"phi", &p.phi},     {"lambda", &p.lambda},
      {"c1", &p.c1},       {"c2", &p.c2}, {"d", &p.d},         {"delta", &p.delta}, {"theta", &p.theta},
      {"gamma", &p.gamma}, {"mu", &p.mu}, {"m1", &p.m1},       {"m2", &p.m2},
  };
  for (const auto& [key, target] : fields) {
    if (obj.contains(key)) *target = number(obj[key], fmt::format("params.{}", key));
  }
}

void apply_schedule(const json& obj, ImpulseSchedule& s) {
  reject_unknown_keys(obj, "schedule", {"tau1", "tau2", "v_i", "s_i", "first_impulse_at_zero"});
  if (obj.contains("tau1")) s.tau1 = period(obj["tau1"], "schedule.tau1");
  if (obj.contains("tau2")) s.tau2 = period(obj["tau2"], "schedule.tau2");
  if (obj.contains("v_i")) s.v_i = number(obj["v_i"], "schedule.v_i");
  if (obj.contains("s_i")) s.s_i = number(obj["s_i"], "schedule.s_i");
  if (obj.contains("first_impulse_at_zero")) {
    s.first_impulse_at_zero = boolean(obj["first_impulse_at_zero"], "schedule.first_impulse_at_zero");
  }
}

void apply_initial(const json& obj, SystemState& st) {
  reject_unknown_keys(obj, "initial", {"x", "y", "z", "v", "s"});
  const std::pair<const char*, double*> fields[] = {{"x", &st.x}, {"y", &st.y}, {"z", &st.z}, {"v", &st.v}, {"s", &st.s}};
  for (const auto& [key, target] : fields) {
    if (obj.contains(key)) *target = number(obj[key], fmt::format("initial.{}", key));
  }
}

void apply_solver(const json& obj, SolverConfig& cfg) {
  reject_unknown_keys(obj, "solver", {"rtol", "atol", "h_init", "h_max", "dense_dt"});
  if (obj.contains("rtol")) cfg.rtol = number(obj["rtol"], "solver.rtol");
  if (obj.contains("atol")) cfg.atol = number(obj["atol"], "solver.atol");
  if (obj.contains("h_init")) cfg.h_init = number(obj["h_init"], "solver.h_init");
  if (obj.contains("h_max")) cfg.h_max = number(obj["h_max"], "solver.h_max");
  if (obj.contains("dense_dt")) cfg.dense_dt = number(obj["dense_dt"], "solver.dense_dt");
}

void apply_diagnostics(const json& obj, DiagnosticsConfig& cfg) {
  reject_unknown_keys(obj, "diagnostics", {"extinction_threshold", "trailing_periods"});
  if (obj.contains("extinction_threshold")) {
    cfg.extinction_threshold = number(obj["extinction_threshold"], "diagnostics.extinction_threshold");
  }
  if (obj.contains("trailing_periods")) {
    const double n = number(obj["trailing_periods"], "diagnostics.trailing_periods");
    if (n < 1.0 || n != std::floor(n)) throw ConfigError("diagnostics.trailing_periods must be a positive integer");
    cfg.trailing_periods = static_cast<int>(n);
  }
}

TimeSpan parse_span(const json& node) {
  const json& v = unwrap(node, "t_span");
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError("t_span: expected [t0, tf]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<Artifact> parse_outputs(const json& node) {
  if (!node.is_array()) throw ConfigError("outputs: expected an array");
  static const std::map<std::string, Artifact, std::less<>> names = {
      {"trajectory_csv", Artifact::TrajectoryCsv},
      {"stability_report", Artifact::StabilityReport},
      {"diagnostics_report", Artifact::DiagnosticsReport},
      {"svg_plot", Artifact::SvgPlot},
  };
  std::vector<Artifact> out;
  for (const auto& item : node) {
    if (!item.is_string()) throw ConfigError("outputs: entries must be strings");
    auto it = names.find(item.get<std::string>());
    if (it == names.end()) throw ConfigError(fmt::format("outputs: unknown artifact '{}'", item.get<std::string>()));
    if (std::find(out.begin(), out.end(), it->second) == out.end()) out.push_back(it->second);
  }
  return out;
}

SweepAxis parse_axis(const std::string& name, const json& node) {
  SweepAxis axis{name, {}};
  if (node.is_array()) {
    for (const auto& v : node) {
      if (!v.is_number()) throw ConfigError(fmt::format("sweep.axes.{}: values must be numbers", name));
      axis.values.push_back(v.get<double>());
    }
  } else if (node.is_object()) {
    reject_unknown_keys(node, fmt::format("sweep.axes.{}", name), {"from", "to", "count"});
    if (!node.contains("from") || !node.contains("to") || !node.contains("count")) {
      throw ConfigError(fmt::format("sweep.axes.{}: range needs from, to and count", name));
    }
    const double from = number(node["from"], "from");
    const double to = number(node["to"], "to");
    const double count = number(node["count"], "count");
    if (count < 1.0 || count != std::floor(count)) {
      throw ConfigError(fmt::format("sweep.axes.{}: count must be a positive integer", name));
    }
    if (count > 1e7) throw ConfigError(fmt::format("sweep.axes.{}: count {} exceeds the grid cap", name, count));
    const auto n = static_cast<std::size_t>(count);
    for (std::size_t i = 0; i < n; ++i) {
      axis.values.push_back(n == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  } else {
    throw ConfigError(fmt::format("sweep.axes.{}: expected a list or a {{from, to, count}} range", name));
  }
  if (axis.values.empty()) throw ConfigError(fmt::format("sweep.axes.{}: no values", name));
  return axis;
}

SweepSpec parse_sweep(const json& obj) {
  reject_unknown_keys(obj, "sweep", {"axes", "max_points", "workers"});
  SweepSpec spec;
  if (!obj.contains("axes")) throw ConfigError("sweep: missing 'axes'");
  // Fixed axis order keeps row ordering independent of key order in the file.
  reject_unknown_keys(obj["axes"], "sweep.axes", {"v_i", "s_i", "tau1", "tau2", "tau"});
  for (const char* name : {"v_i", "s_i", "tau1", "tau2", "tau"}) {
    if (obj["axes"].contains(name)) spec.axes.push_back(parse_axis(name, obj["axes"][name]));
  }
  if (spec.axes.empty()) throw ConfigError("sweep: at least one axis is required");
  const bool has_tau = obj["axes"].contains("tau");
  if (has_tau && (obj["axes"].contains("tau1") || obj["axes"].contains("tau2"))) {
    throw ConfigError("sweep: axis 'tau' cannot be combined with 'tau1' or 'tau2'");
  }
  if (obj.contains("max_points")) {
    const double cap = number(obj["max_points"], "sweep.max_points");
    if (cap < 1.0) throw ConfigError("sweep.max_points must be >= 1");
    spec.max_points = static_cast<std::size_t>(cap);
  }
  if (obj.contains("workers")) {
    const double w = number(obj["workers"], "sweep.workers");
    if (w < 0.0 || w != std::floor(w)) throw ConfigError("sweep.workers must be a non-negative integer");
    spec.workers = static_cast<unsigned>(w);
  }
  if (spec.point_count() > spec.max_points) {
    throw ConfigError(fmt::format("sweep: grid has {} points, above the cap of {}", spec.point_count(), spec.max_points));
  }
  return spec;
}

void validate_config(const ScenarioConfig& cfg) {
  try {
    cfg.params.validate();
    cfg.schedule.validate();
    cfg.solver.validate();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", cfg.stem(), e.what()));
  }
  if (!(cfg.t_span.t0 < cfg.t_span.tf) || !std::isfinite(cfg.t_span.tf) || !std::isfinite(cfg.t_span.t0)) {
    throw ConfigError(fmt::format("{}: t_span must be finite with t0 < tf", cfg.stem()));
  }
  for (double c : cfg.initial.as_vector()) {
    if (!std::isfinite(c) || c < 0.0) throw ConfigError(fmt::format("{}: initial state must be non-negative", cfg.stem()));
  }
  if (!(cfg.diagnostics.extinction_threshold > 0.0)) {
    throw ConfigError(fmt::format("{}: extinction_threshold must be > 0", cfg.stem()));
  }
}

bool wants(const ScenarioConfig& cfg, Artifact a) {
  return std::find(cfg.outputs.begin(), cfg.outputs.end(), a) != cfg.outputs.end();
}

void write_text(const std::filesystem::path& path, const std::string& text, std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  written.push_back(path);
}

}  // namespace

std::string_view to_string(Artifact artifact) {
  switch (artifact) {
    case Artifact::TrajectoryCsv:
      return "trajectory_csv";
    case Artifact::StabilityReport:
      return "stability_report";
    case Artifact::DiagnosticsReport:
      return "diagnostics_report";
    case Artifact::SvgPlot:
      return "svg_plot";
  }
  return "";
}

std::string ScenarioConfig::stem() const { return label.empty() ? name : fmt::format("{}-{}", name, label); }

std::size_t SweepSpec::point_count() const {
  std::size_t n = 1;
  for (const auto& axis : axes) {
    if (axis.values.empty()) return 0;
    if (n > std::numeric_limits<std::size_t>::max() / axis.values.size()) return std::numeric_limits<std::size_t>::max();
    n *= axis.values.size();
  }
  return n;
}

ScenarioFile parse_scenario(const json& doc) {
  reject_unknown_keys(doc, "scenario", {"schema_version", "name", "description", "params", "unmapped", "schedule",
                                        "initial", "t_span", "solver", "diagnostics", "outputs", "variants", "sweep"});
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    throw ConfigError("scenario: missing integer 'schema_version'");
  }
  if (doc["schema_version"].get<int>() != kScenarioSchemaVersion) {
    throw ConfigError(fmt::format("scenario: unsupported schema_version {} (expected {})",
                                  doc["schema_version"].get<int>(), kScenarioSchemaVersion));
  }
  if (doc.contains("description") && !doc["description"].is_string()) {
    throw ConfigError("scenario: 'description' must be a string");
  }
  if (doc.contains("unmapped")) {
    // Source values with no model symbol: recorded, never used.
    if (!doc["unmapped"].is_object()) throw ConfigError("unmapped: expected an object");
    for (const auto& [key, value] : doc["unmapped"].items()) number(value, fmt::format("unmapped.{}", key));
  }

  ScenarioFile file;
  ScenarioConfig& base = file.base;
  if (doc.contains("name")) {
    if (!doc["name"].is_string() || doc["name"].get<std::string>().empty()) {
      throw ConfigError("scenario: 'name' must be a non-empty string");
    }
    base.name = doc["name"].get<std::string>();
  }
  if (doc.contains("params")) apply_params(doc["params"], base.params);
  if (doc.contains("schedule")) apply_schedule(doc["schedule"], base.schedule);
  if (doc.contains("initial")) apply_initial(doc["initial"], base.initial);
  if (doc.contains("t_span")) base.t_span = parse_span(doc["t_span"]);
  if (doc.contains("solver")) apply_solver(doc["solver"], base.solver);
  if (doc.contains("diagnostics")) apply_diagnostics(doc["diagnostics"], base.diagnostics);
  if (doc.contains("outputs")) base.outputs = parse_outputs(doc["outputs"]);
  validate_config(base);

  if (doc.contains("variants")) {
    if (!doc["variants"].is_array() || doc["variants"].empty()) {
      throw ConfigError("variants: expected a non-empty array");
    }
    std::set<std::string> labels;
    for (const auto& v : doc["variants"]) {
      reject_unknown_keys(v, "variant", {"label", "params", "schedule", "initial", "t_span"});
      if (!v.contains("label") || !v["label"].is_string() || v["label"].get<std::string>().empty()) {
        throw ConfigError("variant: needs a non-empty string 'label'");
      }
      ScenarioConfig run = base;
      run.label = v["label"].get<std::string>();
      if (!labels.insert(run.label).second) throw ConfigError(fmt::format("variant: duplicate label '{}'", run.label));
      if (v.contains("params")) apply_params(v["params"], run.params);
      if (v.contains("schedule")) apply_schedule(v["schedule"], run.schedule);
      if (v.contains("initial")) apply_initial(v["initial"], run.initial);
      if (v.contains("t_span")) run.t_span = parse_span(v["t_span"]);
      validate_config(run);
      file.runs.push_back(std::move(run));
    }
  } else {
    file.runs.push_back(base);
  }

  if (doc.contains("sweep")) file.sweep = parse_sweep(doc["sweep"]);
  return file;
}

ScenarioFile parse_scenario_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("invalid JSON: {}", e.what()));
  }
  return parse_scenario(doc);
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : detail::kPresets) out.emplace_back(p.name);
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view preset_text(std::string_view name) {
  for (const auto& p : detail::kPresets) {
    if (p.name == name) return p.text;
  }
  throw ConfigError(fmt::format("unknown preset '{}'", name));
}

ScenarioFile load_preset(std::string_view name) { return parse_scenario_text(preset_text(name)); }

RunResult run_single(const ScenarioConfig& config, bool force_reports) {
  RunResult result{config, integrate(config.params, config.schedule, config.initial, config.t_span, config.solver), {}, {}};
  if (force_reports || wants(config, Artifact::StabilityReport)) {
    try {
      result.stability = analyze_stability(config.params, config.schedule);
    } catch (const DomainError& e) {
      throw ConfigError(fmt::format("{}: stability analysis unavailable: {}", config.stem(), e.what()));
    }
  }
  if (force_reports || wants(config, Artifact::DiagnosticsReport)) {
    result.diagnostics = verify_trajectory(result.trajectory, config.params, config.schedule, config.diagnostics);
  }
  return result;
}

ScenarioOutcome run_scenario(const ScenarioFile& scenario, const std::filesystem::path& out_dir) {
  ScenarioOutcome outcome;
  const bool any_output = std::any_of(scenario.runs.begin(), scenario.runs.end(),
                                      [](const ScenarioConfig& c) { return !c.outputs.empty(); });
  if (any_output) std::filesystem::create_directories(out_dir);

  for (const auto& cfg : scenario.runs) {
    RunResult run = run_single(cfg);
    if (wants(cfg, Artifact::TrajectoryCsv)) {
      std::ostringstream csv;
      write_trajectory_csv(csv, run.trajectory);
      write_text(out_dir / (cfg.stem() + ".csv"), csv.str(), outcome.written);
    }
    if (run.stability) write_text(out_dir / (cfg.stem() + ".stability.txt"), to_key_value(*run.stability), outcome.written);
    if (run.diagnostics) {
      write_text(out_dir / (cfg.stem() + ".diagnostics.txt"), to_key_value(*run.diagnostics), outcome.written);
    }
    outcome.runs.push_back(std::move(run));
  }

  if (!scenario.runs.empty() && wants(scenario.base, Artifact::SvgPlot)) {
    std::vector<LabelledTrajectory> series;
    for (const auto& run : outcome.runs) series.push_back({run.config.label.empty() ? run.config.name : run.config.label, &run.trajectory});
    write_text(out_dir / (scenario.base.name + ".svg"), render_trajectory_svg(scenario.base.name, series), outcome.written);
  }
  return outcome;
}

}  // namespace ipmsim
