#pragma once

#include <optional>
#include <string>
#include <vector>

#include "barylab/fit.hpp"
#include "barylab/io.hpp"
#include "barylab/report.hpp"

namespace barylab::cli {

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool loglog = true;
  std::vector<std::string> series;
  std::vector<double> x;
  std::vector<double> y;
  // Fitted line in the plotted coordinates (log-log when loglog is set).
  std::optional<LineFit> fit;
};

// The figure each experiment emits; rows excluded from the fit are still plotted.
Figure figure_for(const ScanReport& report);

// config_hash,seed,series,x,y with the fitted line as series "fit".
std::string plot_csv(const Figure& fig, const RunStamp& stamp);

// Axes, points and the fitted line; nonpositive values are dropped on log axes.
std::string plot_svg(const Figure& fig, const RunStamp& stamp);

}  // namespace barylab::cli
