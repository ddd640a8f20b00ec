#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ipmsim/integrator.hpp"

namespace ipmsim {

struct LabelledTrajectory {
  std::string label;
  const Trajectory* trajectory = nullptr;
};

struct SvgSeries {
  std::string label;
  std::vector<double> t;
  std::vector<double> values;
};

struct SvgPanel {
  std::string title;
  std::vector<SvgSeries> series;
};

/// Stacked line charts sharing one time axis, one panel per entry.
std::string render_svg_panels(std::string_view title, const std::vector<SvgPanel>& panels);

/// One panel per state component (crop, pests, virus, chemical), one line
/// per trajectory.
std::string render_trajectory_svg(std::string_view title, const std::vector<LabelledTrajectory>& runs);

}  // namespace ipmsim
