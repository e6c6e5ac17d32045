#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sattn {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
  int precision = 6;
  std::string comment;  ///< emitted as an XML comment when non-empty
};

/// Polyline chart with axes, five ticks per axis and a legend. Series colours
/// cycle through a fixed palette. Non-finite points (and non-positive ones on
/// a log axis) are skipped. Throws ConfigError if x and y lengths differ.
void write_line_chart(std::ostream& os, const std::vector<ChartSeries>& series, const ChartOptions& opts);

}  // namespace sattn
