#include "npkry/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "npkry/error.hpp"
#include "npkry/fit.hpp"
#include "npkry/io.hpp"

namespace npkry {

namespace {

struct MetricsRow {
  std::size_t epoch = 0;
  std::string phase;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::vector<double> mean_sines;
};

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open: " + path.string());
  std::string line;
  check(static_cast<bool>(std::getline(in, line)),
        "empty metrics file: " + path.string());
  const auto header = csv_split(line);
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error("metrics.csv: missing column " + name);
  };
  const std::size_t c_epoch = column("epoch");
  const std::size_t c_phase = column("phase");
  const std::size_t c_train = column("train_loss");
  const std::size_t c_val = column("val_loss");
  std::vector<std::size_t> c_sines;
  for (std::size_t j = 1;; ++j) {
    const std::string name = "mean_sine_" + std::to_string(j);
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) {
        c_sines.push_back(i);
        found = true;
      }
    if (!found) break;
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    MetricsRow r;
    r.epoch = std::stoull(f.at(c_epoch));
    r.phase = f.at(c_phase);
    r.train_loss = std::stod(f.at(c_train));
    r.val_loss = std::stod(f.at(c_val));
    for (std::size_t c : c_sines)
      if (c < f.size() && !f[c].empty()) r.mean_sines.push_back(std::stod(f[c]));
    rows.push_back(std::move(r));
  }
  return rows;
}

struct TraceData {
  std::vector<double> res_norms;  // ||r_0||..
};

TraceData read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open: " + path.string());
  std::string line;
  check(static_cast<bool>(std::getline(in, line)), "empty trace: " + path.string());
  const auto header = csv_split(line);
  std::size_t c_res = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "res_norm") c_res = i;
  check(c_res < header.size(), "trace: missing column res_norm");
  TraceData t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.res_norms.push_back(std::stod(csv_split(line).at(c_res)));
  }
  check(!t.res_norms.empty(), "trace has no rows: " + path.string());
  return t;
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path,
                    const std::string& title,
                    const std::vector<PlotSeries>& series, bool log_y) {
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      const double yy = log_y ? std::log10(std::max(y, 1e-300)) : y;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, yy);
      ymax = std::max(ymax, yy);
    }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto py = [&](double y) {
    const double yy = log_y ? std::log10(std::max(y, 1e-300)) : y;
    return H - mb - (yy - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  static const char* colors[] = {"#4363d8", "#e6194b", "#3cb44b",
                                 "#911eb4", "#f58231", "#469990"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title
      << "</text>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    svg << "<text x=\"" << px(fx) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_double(fx) << "</text>\n";
    const double label = log_y ? std::pow(10.0, fy) : fy;
    svg << "<text x=\"" << ml - 8 << "\" y=\""
        << H - mb - (H - mt - mb) * t / 4.0 + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_double(label) << "</text>\n";
  }
  std::size_t ci = 0;
  double legend_y = mt + 6;
  for (const auto& s : series) {
    const char* color = colors[ci % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (auto [x, y] : s.points) svg << px(x) << "," << py(y) << " ";
    svg << "\"/>\n";
    svg << "<text x=\"" << W - mr - 5 << "\" y=\"" << legend_y
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\""
        << color << "\">" << s.label << "</text>\n";
    legend_y += 14.0;
    ++ci;
  }
  svg << "</svg>\n";
  std::ofstream out(path);
  check(out.good(), "cannot write " + path.string());
  out << svg.str();
}

void report(const ReportOptions& opts) {
  const auto rows = read_metrics(opts.metrics_csv);
  check(!rows.empty(), "report: empty epoch list");
  std::filesystem::create_directories(opts.out_dir);

  // sine evolution table: dynamic rows carry per-iteration means
  std::vector<const MetricsRow*> dyn;
  for (const auto& r : rows)
    if (!r.mean_sines.empty()) dyn.push_back(&r);

  {
    std::ofstream out(opts.out_dir / "sine_evolution.csv");
    check(out.good(), "cannot write sine_evolution.csv");
    out << csv_row({"epoch", "mean_sine", "product_estimate", "delta_plus",
                    "delta_minus", "fit_a", "fit_b"});
    for (const auto* r : dyn) {
      const std::size_t M = r->mean_sines.size();
      const auto est = sine_product_estimate(r->mean_sines, M);
      double mean = 0.0;
      for (double s : r->mean_sines) mean += s;
      mean /= static_cast<double>(M);
      const double dplus =
          *std::max_element(r->mean_sines.begin(), r->mean_sines.end()) - mean;
      const double dminus =
          *std::min_element(r->mean_sines.begin(), r->mean_sines.end()) - mean;
      std::vector<std::string> row{
          std::to_string(r->epoch),     format_double(mean),
          format_double(est.estimate),  format_double(dplus),
          format_double(dminus)};
      if (M >= 2) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t j = 0; j < M; ++j)
          pts.emplace_back(static_cast<double>(j + 1), r->mean_sines[j]);
        const FitResult fit = fit_linear(pts);
        row.push_back(format_double(fit.a));
        row.push_back(format_double(fit.b));
      } else {
        row.push_back("");
        row.push_back("");
      }
      out << csv_row(row);
    }
  }

  // loss table straight from the metrics
  {
    std::ofstream out(opts.out_dir / "loss_evolution.csv");
    check(out.good(), "cannot write loss_evolution.csv");
    out << csv_row({"epoch", "phase", "train_loss", "val_loss"});
    for (const auto& r : rows)
      out << csv_row({std::to_string(r.epoch), r.phase,
                      format_double(r.train_loss),
                      format_double(r.val_loss)});
  }

  // residual evolution from solve traces
  if (!opts.traces.empty()) {
    std::vector<TraceData> traces;
    for (const auto& p : opts.traces) traces.push_back(read_trace(p));
    const std::size_t M = opts.fit_window;
    std::vector<double> mean_ratio(M, 0.0);
    std::vector<double> lo(M, std::numeric_limits<double>::infinity());
    std::vector<double> hi(M, 0.0);
    for (const auto& t : traces) {
      for (std::size_t j = 1; j <= M; ++j) {
        const std::size_t idx = std::min(j, t.res_norms.size() - 1);
        const double ratio = t.res_norms[idx] / t.res_norms[0];
        mean_ratio[j - 1] += ratio / static_cast<double>(traces.size());
        lo[j - 1] = std::min(lo[j - 1], ratio);
        hi[j - 1] = std::max(hi[j - 1], ratio);
      }
    }
    std::ofstream out(opts.out_dir / "residual_evolution.csv");
    check(out.good(), "cannot write residual_evolution.csv");
    out << csv_row({"iter", "mean_rel_residual", "delta_plus", "delta_minus",
                    "fit_alpha", "fit_beta"});
    FitResult fit;
    bool have_fit = false;
    {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t j = 0; j < M; ++j)
        if (mean_ratio[j] > 0.0)
          pts.emplace_back(static_cast<double>(j + 1), mean_ratio[j]);
      if (pts.size() >= 2) {
        fit = fit_exponential(pts);
        have_fit = true;
      }
    }
    for (std::size_t j = 0; j < M; ++j) {
      std::vector<std::string> row{
          std::to_string(j + 1), format_double(mean_ratio[j]),
          format_double(hi[j] - mean_ratio[j]),
          format_double(lo[j] - mean_ratio[j])};
      row.push_back(have_fit ? format_double(fit.a) : "");
      row.push_back(have_fit ? format_double(fit.b) : "");
      out << csv_row(row);
    }
    if (opts.svg) {
      std::vector<PlotSeries> series;
      PlotSeries mean_series{"mean", {}, false};
      for (std::size_t j = 0; j < M; ++j)
        mean_series.points.emplace_back(static_cast<double>(j + 1),
                                        mean_ratio[j]);
      series.push_back(std::move(mean_series));
      if (have_fit) {
        PlotSeries fs{"exp fit", {}, true};
        for (std::size_t j = 0; j < M; ++j)
          fs.points.emplace_back(
              static_cast<double>(j + 1),
              std::exp(fit.b) * std::exp(fit.a * static_cast<double>(j + 1)));
        series.push_back(std::move(fs));
      }
      write_svg_plot(opts.out_dir / "residual_evolution.svg",
                     "relative residual vs iteration", series, true);
    }
  }

  if (opts.svg) {
    {
      std::vector<PlotSeries> series(2);
      series[0].label = "train";
      series[1].label = "val";
      for (const auto& r : rows) {
        series[0].points.emplace_back(static_cast<double>(r.epoch),
                                      r.train_loss);
        series[1].points.emplace_back(static_cast<double>(r.epoch),
                                      r.val_loss);
      }
      write_svg_plot(opts.out_dir / "loss.svg", "loss vs epoch", series,
                     false);
    }
    if (!dyn.empty()) {
      std::vector<PlotSeries> series;
      auto add = [&](const MetricsRow* r, const std::string& label,
                     bool dashed) {
        PlotSeries s{label, {}, dashed};
        for (std::size_t j = 0; j < r->mean_sines.size(); ++j)
          s.points.emplace_back(static_cast<double>(j + 1),
                                r->mean_sines[j]);
        series.push_back(std::move(s));
      };
      add(dyn.front(), "epoch " + std::to_string(dyn.front()->epoch), false);
      if (dyn.size() > 1)
        add(dyn.back(), "epoch " + std::to_string(dyn.back()->epoch), true);
      write_svg_plot(opts.out_dir / "sine_evolution.svg",
                     "mean sine vs iteration", series, false);
    }
  }
}

}  // namespace npkry
