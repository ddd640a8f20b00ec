#include "ipmsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace ipmsim {

namespace {

constexpr double kWidth = 860.0;
constexpr double kPanelHeight = 170.0;
constexpr double kPanelGap = 36.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 140.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 40.0;

constexpr const char* kPalette[] = {"#1f2328", "#d1242f", "#0969da", "#1a7f37", "#8250df", "#bc4c00", "#6e7781"};

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string tick(double v) { return fmt::format("{:.3g}", v); }

}  // namespace

std::string render_svg_panels(std::string_view title, const std::vector<SvgPanel>& panels) {
  double t_min = std::numeric_limits<double>::infinity();
  double t_max = -std::numeric_limits<double>::infinity();
  for (const auto& panel : panels) {
    for (const auto& s : panel.series) {
      for (double t : s.t) {
        t_min = std::min(t_min, t);
        t_max = std::max(t_max, t);
      }
    }
  }
  if (!(t_min < t_max)) {
    t_min = 0.0;
    t_max = 1.0;
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double height = kTop + static_cast<double>(panels.size()) * (kPanelHeight + kPanelGap) + kBottom;
  std::ostringstream out;
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" viewBox="0 0 {:.0f} {:.0f}">)",
                     kWidth, height, kWidth, height)
      << '\n';
  out << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  out << fmt::format(R"(<text x="{:.1f}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>)",
                     kWidth / 2.0, escape(title))
      << '\n';

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const SvgPanel& panel = panels[p];
    const double top = kTop + static_cast<double>(p) * (kPanelHeight + kPanelGap);
    double v_min = std::numeric_limits<double>::infinity();
    double v_max = -std::numeric_limits<double>::infinity();
    for (const auto& s : panel.series) {
      for (double v : s.values) {
        if (!std::isfinite(v)) continue;
        v_min = std::min(v_min, v);
        v_max = std::max(v_max, v);
      }
    }
    if (!(v_min <= v_max)) {
      v_min = 0.0;
      v_max = 1.0;
    }
    if (v_max - v_min < 1e-12 * std::max(1.0, std::abs(v_max))) {
      v_max += 0.5 * std::max(1e-12, std::abs(v_max));
      v_min -= 0.5 * std::max(1e-12, std::abs(v_min));
    }
    const auto px = [&](double t) { return kLeft + (t - t_min) / (t_max - t_min) * plot_w; };
    const auto py = [&](double v) { return top + kPanelHeight - (v - v_min) / (v_max - v_min) * kPanelHeight; };

    out << fmt::format(R"(<g><rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="none" stroke="#888"/>)",
                       kLeft, top, plot_w, kPanelHeight)
        << '\n';
    out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="13">{}</text>)", kLeft,
                       top - 6.0, escape(panel.title))
        << '\n';
    for (int i = 0; i <= 2; ++i) {
      const double v = v_min + (v_max - v_min) * i / 2.0;
      out << fmt::format(
                 R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>)",
                 kLeft - 4.0, py(v) + 3.0, tick(v))
          << '\n';
    }
    for (int i = 0; i <= 4; ++i) {
      const double t = t_min + (t_max - t_min) * i / 4.0;
      out << fmt::format(
                 R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>)",
                 px(t), top + kPanelHeight + 12.0, tick(t))
          << '\n';
    }

    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const SvgSeries& series = panel.series[s];
      const char* color = kPalette[s % std::size(kPalette)];
      out << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.2" points=")", color);
      const std::size_t n = std::min(series.t.size(), series.values.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(series.values[i])) continue;
        out << fmt::format("{}{:.2f},{:.2f}", i == 0 ? "" : " ", px(series.t[i]), py(series.values[i]));
      }
      out << "\"/>\n";
      const double ly = top + 14.0 + static_cast<double>(s) * 14.0;
      out << fmt::format(R"(<line x1="{:.1f}" y1="{:.1f}" x2="{:.1f}" y2="{:.1f}" stroke="{}" stroke-width="2"/>)",
                         kLeft + plot_w + 10.0, ly - 4.0, kLeft + plot_w + 28.0, ly - 4.0, color)
          << '\n';
      out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="11">{}</text>)",
                         kLeft + plot_w + 32.0, ly, escape(series.label))
          << '\n';
    }
    out << "</g>\n";
  }
  out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="12" text-anchor="middle">time (days)</text>)",
                     kLeft + plot_w / 2.0, height - 10.0)
      << '\n';
  out << "</svg>\n";
  return out.str();
}

std::string render_trajectory_svg(std::string_view title, const std::vector<LabelledTrajectory>& runs) {
  static constexpr const char* titles[] = {"crop x", "susceptible pests y", "infected pests z", "biopesticide v",
                                           "chemical pesticide s"};
  std::vector<SvgPanel> panels(kStateDim);
  for (std::size_t c = 0; c < kStateDim; ++c) panels[c].title = titles[c];

  for (const auto& run : runs) {
    if (run.trajectory == nullptr) continue;
    std::vector<SvgSeries> per_component(kStateDim);
    for (auto& s : per_component) s.label = run.label;
    const auto& events = run.trajectory->events();
    std::size_t e = 0;
    const auto push = [&](double t, const SystemState& st) {
      const StateVector u = st.as_vector();
      for (std::size_t c = 0; c < kStateDim; ++c) {
        per_component[c].t.push_back(t);
        per_component[c].values.push_back(u[c]);
      }
    };
    for (const auto& sample : run.trajectory->samples()) {
      // Draw impulses as vertical jumps.
      if (e < events.size() && events[e].t == sample.t) push(sample.t, events[e++].pre);
      push(sample.t, sample.state);
    }
    for (std::size_t c = 0; c < kStateDim; ++c) panels[c].series.push_back(std::move(per_component[c]));
  }
  return render_svg_panels(title, panels);
}

}  // namespace ipmsim
