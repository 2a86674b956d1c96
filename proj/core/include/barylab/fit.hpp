#pragma once

#include <cstddef>
#include <vector>

namespace barylab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  // Root-mean-square residual of the fitted line.
  double residual = 0.0;
  std::size_t used = 0;
};

// Least squares on (x, y). Throws InvalidArgument with fewer than two points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Fit of log y against log x over the pairs with x and y above `floor`.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor = 1e-6);

// Least-squares slope of y = c x through the origin.
double fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

}  // namespace barylab
