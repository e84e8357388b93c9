#include "rosa/exp/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rosa/common.hpp"
#include "rosa/exp/metrics.hpp"

namespace rosa::exp {

namespace {

double pick_column(const agents::MetricsRow& row, const std::string& col) {
  if (col == "extrinsic_return") return row.extrinsic_return;
  if (col == "shaped_return") return row.shaped_return;
  if (col == "switch_count") return row.switch_count;
  if (col == "mean_bonus") return row.mean_bonus;
  if (col == "env_steps") return static_cast<double>(row.env_steps);
  throw UsageError("plot: unknown y column '" + col + "'");
}

std::vector<double> smooth(const std::vector<double>& y, int window) {
  if (window <= 1) return y;
  std::vector<double> out(y.size());
  double acc = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    acc += y[i];
    if (i >= static_cast<size_t>(window)) acc -= y[i - window];
    out[i] = acc / std::min<size_t>(i + 1, window);
  }
  return out;
}

std::string fmt_tick(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

}  // namespace

std::string render_learning_curve_svg(const std::vector<std::string>& csvs,
                                      const PlotOptions& opts) {
  if (csvs.empty()) throw UsageError("plot: no input metrics files");
  if (opts.smooth_window < 1)
    throw UsageError("plot: smooth_window must be >= 1");

  std::vector<std::vector<double>> series;
  size_t n = std::string::npos;
  for (const std::string& path : csvs) {
    const auto rows = read_metrics_csv(path);
    if (rows.empty()) throw UsageError("plot: no rows in " + path);
    std::vector<double> y;
    y.reserve(rows.size());
    for (const auto& row : rows) y.push_back(pick_column(row, opts.y_column));
    series.push_back(smooth(y, opts.smooth_window));
    n = std::min(n, series.back().size());
  }

  std::vector<double> mean(n, 0.0), sd(n, 0.0);
  for (size_t t = 0; t < n; ++t) {
    double m = 0.0;
    for (const auto& s : series) m += s[t];
    m /= series.size();
    double var = 0.0;
    for (const auto& s : series) var += (s[t] - m) * (s[t] - m);
    mean[t] = m;
    sd[t] = std::sqrt(var / series.size());
  }

  double lo = mean[0] - sd[0], hi = mean[0] + sd[0];
  for (size_t t = 0; t < n; ++t) {
    lo = std::min(lo, mean[t] - sd[t]);
    hi = std::max(hi, mean[t] + sd[t]);
  }
  if (hi - lo < 1e-12) {
    hi += 0.5;
    lo -= 0.5;
  }

  const double ml = 56, mr = 16, mt = 28, mb = 40;
  const double pw = opts.width - ml - mr;
  const double ph = opts.height - mt - mb;
  const auto X = [&](size_t t) {
    return n > 1 ? ml + pw * static_cast<double>(t) / (n - 1) : ml + pw / 2;
  };
  const auto Y = [&](double v) { return mt + ph * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
      << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width
      << ' ' << opts.height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" fill=\"white\"/>\n";

  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << Y(v) << "\" x2=\"" << ml
        << "\" y2=\"" << Y(v) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << Y(v) + 4
        << "\" font-size=\"11\" font-family=\"sans-serif\" "
           "text-anchor=\"end\">"
        << fmt_tick(v) << "</text>\n";
    const size_t t = n > 1 ? static_cast<size_t>((n - 1) * k / 4) : 0;
    svg << "<line x1=\"" << X(t) << "\" y1=\"" << mt + ph << "\" x2=\""
        << X(t) << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << X(t) << "\" y=\"" << mt + ph + 16
        << "\" font-size=\"11\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\">"
        << t + 1 << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opts.height - 8
      << "\" font-size=\"12\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\">episode</text>\n";
  svg << "<text x=\"" << 14 << "\" y=\"" << mt + ph / 2
      << "\" font-size=\"12\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 14 " << mt + ph / 2
      << ")\">" << opts.y_column << "</text>\n";
  if (!opts.title.empty())
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << 18
        << "\" font-size=\"13\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\">"
        << opts.title << "</text>\n";

  // std band
  if (series.size() > 1) {
    svg << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" "
           "points=\"";
    for (size_t t = 0; t < n; ++t)
      svg << X(t) << ',' << Y(mean[t] + sd[t]) << ' ';
    for (size_t t = n; t-- > 0;)
      svg << X(t) << ',' << Y(mean[t] - sd[t]) << ' ';
    svg << "\"/>\n";
  }

  // mean line
  svg << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" "
         "points=\"";
  for (size_t t = 0; t < n; ++t) svg << X(t) << ',' << Y(mean[t]) << ' ';
  svg << "\"/>\n";
  svg << "<text x=\"" << ml + 6 << "\" y=\"" << mt + 12
      << "\" font-size=\"11\" font-family=\"sans-serif\">" << series.size()
      << " seed" << (series.size() == 1 ? "" : "s")
      << ", mean with one std band</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::vector<std::string>& csvs,
               const std::string& out_svg, const PlotOptions& opts) {
  const std::string svg = render_learning_curve_svg(csvs, opts);
  std::ofstream out(out_svg);
  if (!out) throw RuntimeFault("plot: cannot write " + out_svg);
  out << svg;
}

}  // namespace rosa::exp
