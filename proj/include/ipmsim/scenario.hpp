#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ipmsim/diagnostics.hpp"
#include "ipmsim/integrator.hpp"
#include "ipmsim/model.hpp"
#include "ipmsim/stability.hpp"

namespace ipmsim {

inline constexpr int kScenarioSchemaVersion = 1;

enum class Artifact { TrajectoryCsv, StabilityReport, DiagnosticsReport, SvgPlot };

std::string_view to_string(Artifact artifact);

struct ScenarioConfig {
  std::string name = "scenario";
  std::string label;  // variant label; empty for a single-run scenario
  ModelParameters params;
  ImpulseSchedule schedule;
  SystemState initial;
  TimeSpan t_span{0.0, 200.0};
  SolverConfig solver;
  DiagnosticsConfig diagnostics;
  std::vector<Artifact> outputs;

  // File stem for this run's artifacts: name, or name-label.
  std::string stem() const;
};

// Axis names: v_i, s_i, tau1, tau2, and tau (sets tau1 = tau2).
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::size_t max_points = 10'000;
  unsigned workers = 0;  // 0 = hardware concurrency

  std::size_t point_count() const;
};

/// A parsed scenario file: the base run, its variants (each fully
/// resolved; a file without variants yields the base alone) and an
/// optional sweep grid.
struct ScenarioFile {
  ScenarioConfig base;
  std::vector<ScenarioConfig> runs;
  std::optional<SweepSpec> sweep;
};

/// Validates against the versioned schema; unknown keys, wrong types and
/// out-of-domain values raise ConfigError.
ScenarioFile parse_scenario(const nlohmann::json& doc);
ScenarioFile parse_scenario_text(std::string_view text);
ScenarioFile load_scenario(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// JSON text of a bundled preset (fig1, fig2, fig3, fig3-var, fig4,
/// fig4-caption). Throws ConfigError for an unknown name.
std::string_view preset_text(std::string_view name);
ScenarioFile load_preset(std::string_view name);

struct RunResult {
  ScenarioConfig config;
  Trajectory trajectory;
  std::optional<StabilityReport> stability;
  std::optional<DiagnosticsReport> diagnostics;
};

struct ScenarioOutcome {
  std::vector<RunResult> runs;
  std::vector<std::filesystem::path> written;
};

/// Integrates every run and writes the requested artifacts into out_dir.
/// Integration failures propagate as IntegrationError; requesting a
/// stability report for incommensurate periods raises ConfigError.
ScenarioOutcome run_scenario(const ScenarioFile& scenario, const std::filesystem::path& out_dir);

/// Runs `base` without writing anything; reports are computed when the
/// corresponding artifact is requested or `force_reports` is set.
RunResult run_single(const ScenarioConfig& config, bool force_reports = false);

struct SweepOptions {
  // Skip grid indices below this (used to resume an interrupted sweep).
  std::size_t start_index = 0;
  bool write_header = true;
};

/// One CSV row per grid point, in lexicographic grid-index order (the first
/// axis varies slowest):
/// index,v_i,s_i,tau1,tau2,period_T,stable,dominant_multiplier,mean_pest_load,extinction_y,extinction_z,status
void run_sweep(const ScenarioFile& scenario, std::ostream& out, const SweepOptions& options = {});

/// Index to resume from given an existing sweep CSV: one past the last
/// complete row, or 0.
std::size_t sweep_resume_index(const std::filesystem::path& csv);

}  // namespace ipmsim
