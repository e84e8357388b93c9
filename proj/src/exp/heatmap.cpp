#include "rosa/exp/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rosa/exp/metrics.hpp"

namespace rosa::exp {

ShapingHeatmap::ShapingHeatmap(int width, int height)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0)
    throw UsageError("heatmap: width and height must be positive");
  const size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
  sum_.assign(n, 0.0);
  abs_sum_.assign(n, 0.0);
  count_.assign(n, 0);
}

void ShapingHeatmap::add(const agents::TransitionRecord& rec) {
  if (rec.cell < 0) return;  // off-grid records carry no location
  if (rec.cell >= static_cast<int>(sum_.size()))
    throw UsageError("heatmap: record cell outside the grid");
  const double mass = rec.r_i * rec.g;
  sum_[static_cast<size_t>(rec.cell)] += mass;
  abs_sum_[static_cast<size_t>(rec.cell)] += std::abs(mass);
  count_[static_cast<size_t>(rec.cell)] += 1;
  total_count_ += 1;
}

void ShapingHeatmap::add_batch(
    const std::vector<agents::TransitionRecord>& recs) {
  for (const agents::TransitionRecord& rec : recs) add(rec);
}

void ShapingHeatmap::merge(const ShapingHeatmap& other) {
  if (other.width_ != width_ || other.height_ != height_)
    throw UsageError("heatmap: cannot merge maps over different grids");
  for (size_t i = 0; i < sum_.size(); ++i) {
    sum_[i] += other.sum_[i];
    abs_sum_[i] += other.abs_sum_[i];
    count_[i] += other.count_[i];
  }
  total_count_ += other.total_count_;
}

double ShapingHeatmap::total_mass() const {
  return std::accumulate(sum_.begin(), sum_.end(), 0.0);
}

double ShapingHeatmap::total_abs_mass() const {
  return std::accumulate(abs_sum_.begin(), abs_sum_.end(), 0.0);
}

std::vector<double> ShapingHeatmap::values(HeatmapAgg agg) const {
  switch (agg) {
    case HeatmapAgg::kSum: return sum_;
    case HeatmapAgg::kAbsSum: return abs_sum_;
    case HeatmapAgg::kMean: {
      std::vector<double> out(sum_.size(), 0.0);
      for (size_t i = 0; i < sum_.size(); ++i)
        if (count_[i] > 0) out[i] = sum_[i] / static_cast<double>(count_[i]);
      return out;
    }
  }
  throw RuntimeFault("heatmap: bad aggregation");
}

void ShapingHeatmap::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeFault("heatmap: cannot write " + path);
  out << "# schema=rosa.heatmap.v1\n";
  out << "# width=" << width_ << " height=" << height_ << "\n";
  out << "cell,row,col,sum,abs_sum,count\n";
  for (size_t i = 0; i < sum_.size(); ++i) {
    const int row = static_cast<int>(i) / width_;
    const int col = static_cast<int>(i) % width_;
    out << i << ',' << row << ',' << col << ',' << format_double(sum_[i])
        << ',' << format_double(abs_sum_[i]) << ',' << count_[i] << '\n';
  }
}

ShapingHeatmap ShapingHeatmap::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("heatmap: cannot open " + path);
  std::string line;
  int width = 0, height = 0;
  ShapingHeatmap map;
  bool dims_seen = false, header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string token;
      while (ls >> token) {
        if (token.rfind("width=", 0) == 0) width = std::stoi(token.substr(6));
        if (token.rfind("height=", 0) == 0)
          height = std::stoi(token.substr(7));
      }
      if (width > 0 && height > 0 && !dims_seen) {
        map = ShapingHeatmap(width, height);
        dims_seen = true;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "cell,row,col,sum,abs_sum,count")
        throw UsageError("heatmap: unexpected header in " + path);
      if (!dims_seen)
        throw UsageError("heatmap: missing width/height comment in " + path);
      header_seen = true;
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      throw UsageError("heatmap: malformed row in " + path);
    try {
      const size_t cell = std::stoul(fields[0]);
      if (cell >= map.sum_.size())
        throw UsageError("heatmap: cell index outside the grid in " + path);
      map.sum_[cell] = std::stod(fields[3]);
      map.abs_sum_[cell] = std::stod(fields[4]);
      map.count_[cell] = std::stol(fields[5]);
      map.total_count_ += map.count_[cell];
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("heatmap: malformed row in " + path + ": " + line);
    }
  }
  if (!header_seen) throw UsageError("heatmap: no data in " + path);
  return map;
}

double herring_mass_ratio(const ShapingHeatmap& map,
                          const env::GridSpec& grid) {
  if (map.width() != grid.width || map.height() != grid.height)
    throw UsageError("herring_mass_ratio: heatmap and layout sizes differ");
  const double total = map.total_abs_mass();
  if (total <= 0.0) return 0.0;
  double herring = 0.0;
  for (const env::Cell& cell : grid.herring)
    herring += map.cell_abs_sum()[static_cast<size_t>(grid.cell_index(cell))];
  return herring / total;
}

namespace {

std::string rgb(int r, int g, int b) {
  std::ostringstream out;
  out << "rgb(" << r << ',' << g << ',' << b << ')';
  return out.str();
}

/// Diverging palette: negative values blue, positive red, zero white.
std::string diverging_color(double v, double lim) {
  if (lim <= 0.0) return rgb(255, 255, 255);
  const double t = std::clamp(v / lim, -1.0, 1.0);
  const int shade = static_cast<int>(std::lround(255 * (1.0 - std::abs(t))));
  if (t >= 0.0) return rgb(255, shade, shade);
  return rgb(shade, shade, 255);
}

}  // namespace

std::string render_heatmap_svg(const ShapingHeatmap& map, HeatmapAgg agg,
                               const env::GridSpec* grid) {
  if (map.width() <= 0 || map.height() <= 0)
    throw UsageError("heatmap: nothing to render");
  const std::vector<double> vals = map.values(agg);
  double lim = 0.0;
  for (double v : vals) lim = std::max(lim, std::abs(v));

  const int cell_px = 28;
  const int margin = 10;
  const int w = map.width() * cell_px + 2 * margin;
  const int h = map.height() * cell_px + 2 * margin + 18;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
      << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n";
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const size_t i = static_cast<size_t>(r) * map.width() + c;
      const int x = margin + c * cell_px;
      const int y = margin + r * cell_px;
      std::string fill = diverging_color(vals[i], lim);
      bool wall = false;
      if (grid != nullptr && grid->is_wall({r, c})) {
        fill = rgb(40, 40, 40);
        wall = true;
      }
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_px
          << "\" height=\"" << cell_px << "\" fill=\"" << fill
          << "\" stroke=\"#ccc\" stroke-width=\"1\"/>\n";
      if (grid != nullptr && !wall) {
        const env::Cell cell{r, c};
        std::string mark;
        if (grid->start == cell) mark = "S";
        auto it = grid->terminal_id.find(cell);
        if (it != grid->terminal_id.end()) mark = std::to_string(it->second);
        if (!mark.empty())
          svg << "<text x=\"" << x + cell_px / 2 << "\" y=\""
              << y + cell_px / 2 + 4
              << "\" font-size=\"11\" font-family=\"sans-serif\" "
                 "text-anchor=\"middle\">"
              << mark << "</text>\n";
      }
    }
  }
  const char* label = agg == HeatmapAgg::kSum
                          ? "sum"
                          : (agg == HeatmapAgg::kAbsSum ? "abs_sum" : "mean");
  svg << "<text x=\"" << margin << "\" y=\"" << h - 6
      << "\" font-size=\"11\" font-family=\"sans-serif\">" << label
      << " of auxiliary reward, peak " << format_double(lim) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rosa::exp
