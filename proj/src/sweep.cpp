#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "ipmsim/errors.hpp"
#include "ipmsim/scenario.hpp"

namespace ipmsim {

namespace {

constexpr const char* kSweepHeader =
    "index,v_i,s_i,tau1,tau2,period_T,stable,dominant_multiplier,mean_pest_load,extinction_y,extinction_z,status";

ScenarioConfig grid_point(const ScenarioConfig& base, const SweepSpec& spec, std::size_t index) {
  ScenarioConfig cfg = base;
  cfg.label = fmt::format("{}", index);
  std::size_t rest = index;
  for (auto axis = spec.axes.rbegin(); axis != spec.axes.rend(); ++axis) {
    const double value = axis->values[rest % axis->values.size()];
    rest /= axis->values.size();
    if (axis->name == "v_i") {
      cfg.schedule.v_i = value;
    } else if (axis->name == "s_i") {
      cfg.schedule.s_i = value;
    } else if (axis->name == "tau1") {
      cfg.schedule.tau1 = value;
    } else if (axis->name == "tau2") {
      cfg.schedule.tau2 = value;
    } else if (axis->name == "tau") {
      cfg.schedule.tau1 = value;
      cfg.schedule.tau2 = value;
    }
  }
  return cfg;
}

std::string sanitize(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return text;
}

std::string sweep_row(const ScenarioConfig& base, const SweepSpec& spec, std::size_t index) {
  const ScenarioConfig cfg = grid_point(base, spec, index);
  const auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  const std::string prefix = fmt::format("{},{},{},{},{}", index, cfg.schedule.v_i, cfg.schedule.s_i,
                                         opt(cfg.schedule.tau1), opt(cfg.schedule.tau2));
  try {
    cfg.schedule.validate();
    const RunResult run = run_single(cfg, true);
    return fmt::format("{},{},{},{},{},{},{},ok", prefix, run.stability->period_T, run.stability->stable,
                       run.stability->dominant_multiplier, run.diagnostics->mean_pest_load,
                       opt(run.diagnostics->extinction_y),
                       opt(run.diagnostics->extinction_z));
  } catch (const std::exception& e) {
    return fmt::format("{},,,,,,,{}", prefix, sanitize(e.what()));
  }
}

}  // namespace

void run_sweep(const ScenarioFile& scenario, std::ostream& out, const SweepOptions& options) {
  if (!scenario.sweep) throw ConfigError("sweep: the scenario has no 'sweep' section");
  const SweepSpec& spec = *scenario.sweep;
  const std::size_t total = spec.point_count();
  if (total > spec.max_points) {
    throw ConfigError(fmt::format("sweep: grid has {} points, above the cap of {}", total, spec.max_points));
  }
  if (options.write_header) out << kSweepHeader << '\n';
  if (options.start_index >= total) return;

  const std::size_t first = options.start_index;
  const std::size_t count = total - first;
  unsigned workers = spec.workers != 0 ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

  std::vector<std::optional<std::string>> rows(count);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};

  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        std::string row = sweep_row(scenario.base, spec, first + i);
        {
          std::lock_guard lock(mutex);
          rows[i] = std::move(row);
        }
        ready.notify_all();
      }
    });
  }

  // Single writer, grid order.
  for (std::size_t i = 0; i < count; ++i) {
    std::string row;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return rows[i].has_value(); });
      row = std::move(*rows[i]);
      rows[i].reset();
    }
    out << row << '\n';
    out.flush();
  }
}

std::size_t sweep_resume_index(const std::filesystem::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) return 0;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t resume = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) break;  // incomplete trailing row
    const std::string_view line(content.data() + pos, end - pos);
    std::size_t index = 0;
    const auto r = std::from_chars(line.data(), line.data() + line.size(), index);
    if (r.ec == std::errc{} && r.ptr != line.data() && r.ptr < line.data() + line.size() && *r.ptr == ',') {
      resume = index + 1;
    }
    pos = end + 1;
  }
  return resume;
}

}  // namespace ipmsim
