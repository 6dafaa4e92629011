#pragma once

#include <filesystem>
#include <vector>

namespace npkry {

struct ReportOptions {
  std::filesystem::path metrics_csv;
  std::vector<std::filesystem::path> traces;  // per-solve trace CSVs
  std::filesystem::path out_dir;
  bool svg = false;
  std::size_t fit_window = 10;  // iterations used by the fits (M)
};

/// Renders the analysis tables from training metrics and solve traces:
/// sine_evolution.csv (per epoch: mean sine, product estimate, envelope
/// spreads, linear-fit coefficients) and, when traces are given,
/// residual_evolution.csv (mean relative residual with an exponential
/// fit). Envelope spreads are max/min deviations from the mean. With
/// svg set, polyline plots are written next to the tables.
void report(const ReportOptions& opts);

/// Minimal dependency-free SVG polyline plot.
struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};
void write_svg_plot(const std::filesystem::path& path,
                    const std::string& title,
                    const std::vector<PlotSeries>& series, bool log_y = false);

}  // namespace npkry
