// ipmsim: command-line front end for the impulsive pest-management simulator.
//
//   ipmsim simulate <config.json>
//   ipmsim stability <config.json>
//   ipmsim sweep <config.json> [--output FILE] [--resume]
//   ipmsim critical-period <config.json>
//   ipmsim preset <fig1|fig2|fig3|fig3-var|fig4|fig4-caption> [--print]
//
// Artifacts go to --output-dir, else $IPMSIM_OUTPUT_DIR, else the current
// directory. Exit codes: 0 success, 2 configuration error, 3 integration
// failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ipmsim/errors.hpp"
#include "ipmsim/scenario.hpp"
#include "ipmsim/stability.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIntegration = 3;

fs::path resolve_output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("IPMSIM_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

void report_written(const ipmsim::ScenarioOutcome& outcome) {
  for (const auto& path : outcome.written) std::cout << path.string() << '\n';
}

void print_stability(const ipmsim::ScenarioFile& scenario) {
  for (const auto& run : scenario.runs) {
    ipmsim::StabilityReport report;
    try {
      report = ipmsim::analyze_stability(run.params, run.schedule);
    } catch (const ipmsim::DomainError& e) {
      throw ipmsim::ConfigError(fmt::format("{}: {}", run.stem(), e.what()));
    }
    std::cout << "[" << run.stem() << "]\n" << ipmsim::to_key_value(report);
  }
}

void print_critical_period(const ipmsim::ScenarioFile& scenario) {
  for (const auto& run : scenario.runs) {
    const auto& s = run.schedule;
    if (!ipmsim::common_period(s)) {
      throw ipmsim::ConfigError(
          fmt::format("{}: critical-period search needs a single common period (tau1 == tau2)", run.stem()));
    }
    const double v_i = s.tau1 ? s.v_i : 0.0;
    const double s_i = s.tau2 ? s.s_i : 0.0;
    const auto cp = ipmsim::critical_period(run.params, v_i, s_i);
    std::cout << "[" << run.stem() << "]\n";
    switch (cp.kind) {
      case ipmsim::CriticalPeriod::Kind::Finite:
        std::cout << fmt::format("critical_period = {}\n", cp.value);
        break;
      case ipmsim::CriticalPeriod::Kind::Zero:
        std::cout << "critical_period = 0\nnote = unstable for every period\n";
        break;
      case ipmsim::CriticalPeriod::Kind::Unbounded:
        std::cout << "critical_period = unbounded\nnote = stable for every period\n";
        break;
    }
  }
}

void run_sweep_command(const ipmsim::ScenarioFile& scenario, const fs::path& out_dir, const std::string& output,
                       bool resume) {
  const fs::path path = output.empty() ? out_dir / (scenario.base.name + ".sweep.csv") : fs::path(output);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  ipmsim::SweepOptions options;
  if (resume && fs::exists(path)) {
    options.start_index = ipmsim::sweep_resume_index(path);
    options.write_header = options.start_index == 0;
    // Drop a partially written trailing row before appending.
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto cut = content.rfind('\n');
    content.resize(cut == std::string::npos || options.start_index == 0 ? 0 : cut + 1);
    std::ofstream(path, std::ios::binary | std::ios::trunc) << content;
  }
  std::ofstream out(path, std::ios::binary | (options.start_index > 0 ? std::ios::app : std::ios::trunc));
  if (!out) throw ipmsim::ConfigError(fmt::format("cannot open '{}' for writing", path.string()));
  ipmsim::run_sweep(scenario, out, options);
  std::cout << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impulsive integrated pest management simulator and Floquet stability analyzer", "ipmsim"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string output_dir;
  app.add_option("--output-dir", output_dir, "Directory for artifacts (default: $IPMSIM_OUTPUT_DIR or .)");

  std::string config;
  auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and write its requested artifacts");
  simulate->add_option("config", config, "Scenario JSON file")->required();

  auto* stability = app.add_subcommand("stability", "Print the Floquet stability report of each run");
  stability->add_option("config", config, "Scenario JSON file")->required();

  std::string sweep_output;
  bool resume = false;
  auto* sweep = app.add_subcommand("sweep", "Evaluate the scenario's parameter grid into a CSV table");
  sweep->add_option("config", config, "Scenario JSON file with a 'sweep' section")->required();
  sweep->add_option("--output", sweep_output, "CSV path (default: <output-dir>/<name>.sweep.csv)");
  sweep->add_flag("--resume", resume, "Continue an interrupted sweep from its last complete row");

  auto* critical = app.add_subcommand("critical-period", "Threshold common impulse period of each run");
  critical->add_option("config", config, "Scenario JSON file")->required();

  std::string preset_name;
  bool print_only = false;
  auto* preset = app.add_subcommand("preset", "Run a bundled scenario preset");
  preset->add_option("name", preset_name, "Preset name")
      ->required()
      ->check(CLI::IsMember(ipmsim::preset_names()));
  preset->add_flag("--print", print_only, "Print the preset JSON instead of running it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ipmsim: " << e.what() << '\n';
    return kExitConfig;
  }

  const fs::path out_dir = resolve_output_dir(output_dir);
  try {
    if (*simulate) {
      report_written(ipmsim::run_scenario(ipmsim::load_scenario(config), out_dir));
    } else if (*stability) {
      print_stability(ipmsim::load_scenario(config));
    } else if (*sweep) {
      run_sweep_command(ipmsim::load_scenario(config), out_dir, sweep_output, resume);
    } else if (*critical) {
      print_critical_period(ipmsim::load_scenario(config));
    } else if (*preset) {
      if (print_only) {
        std::cout << ipmsim::preset_text(preset_name);
      } else {
        report_written(ipmsim::run_scenario(ipmsim::load_preset(preset_name), out_dir));
      }
    }
  } catch (const ipmsim::IntegrationError& e) {
    std::cerr << "ipmsim: integration failed at t = " << e.failure_time() << ": " << e.what() << '\n';
    return kExitIntegration;
  } catch (const ipmsim::ConfigError& e) {
    std::cerr << "ipmsim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ipmsim::DomainError& e) {
    std::cerr << "ipmsim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "ipmsim: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
