#include "barylab/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "barylab/error.hpp"

namespace barylab::cli {

namespace {

struct Axes {
  std::string x, y;
  bool loglog = true;
};

Axes axes_for(const std::string& experiment) {
  if (experiment == "deficit_scan") return {"R", "D", true};
  if (experiment == "barycenter_stability_scan") return {"W1", "W2", true};
  if (experiment == "potential_stability_probe") return {"Rq", "L", true};
  if (experiment == "map_stability_probe") return {"dgrad", "dT", false};
  if (experiment == "g_probe") return {"s", "g", false};
  if (experiment == "net") return {"epsilon", "log_cardinality", true};
  if (experiment == "heat_limit_probe") return {"t", "error", true};
  if (experiment == "derivative_check") return {"t", "rel1", true};
  if (experiment == "kappa_scan") return {"t", "kappa_hat", true};
  return {};
}

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

}  // namespace

Figure figure_for(const ScanReport& report) {
  Figure f;
  f.title = report.experiment + " on " + report.space_label;
  if (report.experiment == "empirical_rate_experiment") {
    f.x_label = "N";
    f.y_label = "mean W1(P_N, P)";
    for (const auto& [name, value] : report.fits) {
      if (name.rfind("mean_W1@", 0) != 0) continue;
      f.series.push_back("mean_W1");
      f.x.push_back(std::stod(name.substr(8)));
      f.y.push_back(value);
    }
  } else {
    auto ax = axes_for(report.experiment);
    if (ax.x.empty()) throw InvalidArgument("no figure defined for " + report.experiment);
    f.x_label = ax.x;
    f.y_label = ax.y;
    f.loglog = ax.loglog;
    f.x = report.column_values(ax.x);
    f.y = report.column_values(ax.y);
    for (const auto& r : report.rows) f.series.push_back(r.label);
  }
  try {
    f.fit = f.loglog ? fit_loglog(f.x, f.y) : fit_line(f.x, f.y);
  } catch (const InvalidArgument&) {
  }
  return f;
}

std::string plot_csv(const Figure& fig, const RunStamp& stamp) {
  std::ostringstream out;
  out << "config_hash,seed,series,x,y\n";
  auto line = [&](const std::string& s, double x, double y) {
    out << stamp.config_hash << ',' << stamp.seed << ',' << s << ',' << format_double(x) << ',' << format_double(y)
        << '\n';
  };
  for (std::size_t i = 0; i < fig.x.size(); ++i) line(fig.series[i], fig.x[i], fig.y[i]);
  if (fig.fit) {
    double lo = INFINITY, hi = -INFINITY;
    for (double x : fig.x)
      if (!fig.loglog || x > 0.0) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    if (lo <= hi)
      for (double x : {lo, hi}) {
        double y = fig.loglog ? std::exp(fig.fit->intercept) * std::pow(x, fig.fit->slope)
                              : fig.fit->intercept + fig.fit->slope * x;
        line("fit", x, y);
      }
  }
  return out.str();
}

std::string plot_svg(const Figure& fig, const RunStamp& stamp) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  auto tx = [&](double v) { return fig.loglog ? std::log10(v) : v; };
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < fig.x.size(); ++i) {
    if (!std::isfinite(fig.x[i]) || !std::isfinite(fig.y[i])) continue;
    if (fig.loglog && (fig.x[i] <= 0.0 || fig.y[i] <= 0.0)) continue;
    pts.emplace_back(tx(fig.x[i]), tx(fig.y[i]));
  }
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (auto [x, y] : pts) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (pts.empty()) x0 = y0 = 0, x1 = y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto tick = [&](double v) { return format_double(fig.loglog ? std::pow(10.0, v) : v); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<!-- config_hash " << stamp.config_hash << " seed " << stamp.seed << " -->\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(fig.title) << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" font-size=\"11\">" << tick(x0) << "</text>\n";
  s << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" font-size=\"11\" text-anchor=\"end\">" << tick(x1)
    << "</text>\n";
  s << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" font-size=\"11\" text-anchor=\"end\">" << tick(y0)
    << "</text>\n";
  s << "<text x=\"" << L - 4 << "\" y=\"" << T + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << tick(y1)
    << "</text>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << esc(fig.x_label) << (fig.loglog ? " (log)" : "") << "</text>\n";
  s << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2
    << ")\" text-anchor=\"middle\">" << esc(fig.y_label) << (fig.loglog ? " (log)" : "") << "</text>\n";
  for (auto [x, y] : pts)
    s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  if (fig.fit && !pts.empty()) {
    const double b = fig.loglog ? fig.fit->intercept / std::log(10.0) : fig.fit->intercept;
    auto fy = [&](double x) { return b + fig.fit->slope * x; };
    s << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fy(x0)) << "\" x2=\"" << px(x1) << "\" y2=\"" << py(fy(x1))
      << "\" stroke=\"firebrick\"/>\n";
    s << "<text x=\"" << W - R << "\" y=\"" << T << "\" font-size=\"11\" text-anchor=\"end\">slope "
      << format_double(fig.fit->slope) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace barylab::cli
