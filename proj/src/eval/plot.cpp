#include "s2r/eval/plot.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "s2r/core/error.hpp"

namespace s2r::eval {

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV " + path.string());
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  t.columns.assign(t.header.size(), {});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::size_t c = 0;
    for (std::string cell; std::getline(ls, cell, ',') && c < t.header.size(); ++c) {
      try {
        t.columns[c].push_back(std::stod(cell));
      } catch (const std::exception&) {
        t.columns[c].push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    for (; c < t.header.size(); ++c) t.columns[c].push_back(std::numeric_limits<double>::quiet_NaN());
  }
  return t;
}

void plot_csv(const CsvTable& table, const std::filesystem::path& out,
              const std::vector<std::string>& columns, const std::string& title) {
  if (table.header.size() < 2) throw ConfigError("plot needs at least two CSV columns");
  std::vector<std::size_t> series;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    if (columns.empty() ||
        std::find(columns.begin(), columns.end(), table.header[c]) != columns.end()) {
      series.push_back(c);
    }
  }
  if (series.empty()) throw ConfigError("none of the requested columns exist");

  const int width = 800, height = 500, left = 70, right = 20, top = 40, bottom = 50;
  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const auto& xs = table.columns[0];
  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (double x : xs) {
    if (std::isfinite(x)) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
  }
  for (auto c : series) {
    for (double y : table.columns[c]) {
      if (std::isfinite(y)) ymin = std::min(ymin, y), ymax = std::max(ymax, y);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (width - left - right); };
  auto py = [&](double y) {
    return height - bottom - (y - ymin) / (ymax - ymin) * (height - top - bottom);
  };

  const cv::Scalar axis(0, 0, 0);
  cv::line(canvas, {left, height - bottom}, {width - right, height - bottom}, axis);
  cv::line(canvas, {left, top}, {left, height - bottom}, axis);
  char buf[64];
  for (int i = 0; i <= 4; ++i) {
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    std::snprintf(buf, sizeof buf, "%.3g", yv);
    cv::putText(canvas, buf, {4, static_cast<int>(py(yv)) + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis);
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    std::snprintf(buf, sizeof buf, "%.3g", xv);
    cv::putText(canvas, buf, {static_cast<int>(px(xv)) - 10, height - bottom + 18},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, axis);
  }
  cv::putText(canvas, table.header[0], {width / 2 - 20, height - 10}, cv::FONT_HERSHEY_SIMPLEX,
              0.5, axis);
  if (!title.empty()) {
    cv::putText(canvas, title, {left, 25}, cv::FONT_HERSHEY_SIMPLEX, 0.6, axis);
  }

  static const cv::Scalar kColors[] = {{200, 80, 30}, {30, 30, 200}, {40, 160, 40},
                                       {160, 40, 160}, {20, 140, 200}, {90, 90, 90}};
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ys = table.columns[series[s]];
    const auto color = kColors[s % std::size(kColors)];
    for (std::size_t i = 1; i < ys.size() && i < xs.size(); ++i) {
      if (!std::isfinite(ys[i - 1]) || !std::isfinite(ys[i])) continue;
      cv::line(canvas, cv::Point2d(px(xs[i - 1]), py(ys[i - 1])), cv::Point2d(px(xs[i]), py(ys[i])),
               color, 1, cv::LINE_AA);
    }
    const int ly = top + 15 + static_cast<int>(s) * 16;
    cv::line(canvas, {width - 170, ly - 4}, {width - 150, ly - 4}, color, 2);
    cv::putText(canvas, table.header[series[s]], {width - 145, ly}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                axis);
  }
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  if (!cv::imwrite(out.string(), canvas)) throw IoError("cannot write " + out.string());
}

}  // namespace s2r::eval
