#include "sattn/svg_chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "sattn/error.hpp"

namespace sattn {

namespace {

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
constexpr int kMarginLeft = 70, kMarginRight = 130, kMarginTop = 40, kMarginBottom = 50;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v, int precision) {
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double map(double v) const { return log ? std::log10(v) : v; }
  double unmap(double t) const { return log ? std::pow(10.0, t) : t; }
  double frac(double v) const { return hi > lo ? (map(v) - lo) / (hi - lo) : 0.5; }
};

Axis fit_axis(const std::vector<ChartSeries>& series, bool log, bool use_x) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      const double v = use_x ? s.x[k] : s.y[k];
      if (!a.usable(v) || !a.usable(use_x ? s.y[k] : s.x[k])) continue;
      lo = std::min(lo, a.map(v));
      hi = std::max(hi, a.map(v));
    }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

}  // namespace

void write_line_chart(std::ostream& os, const std::vector<ChartSeries>& series, const ChartOptions& opts) {
  for (const auto& s : series)
    if (s.x.size() != s.y.size()) throw ConfigError("write_line_chart: series '" + s.label + "' has x/y length mismatch");

  const Axis ax = fit_axis(series, opts.log_x, true);
  const Axis ay = fit_axis(series, opts.log_y, false);
  const double pw = opts.width - kMarginLeft - kMarginRight;
  const double ph = opts.height - kMarginTop - kMarginBottom;
  auto px = [&](double v) { return kMarginLeft + ax.frac(v) * pw; };
  auto py = [&](double v) { return kMarginTop + (1.0 - ay.frac(v)) * ph; };
  const int p = 6;

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\"" << opts.height
     << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!opts.comment.empty()) os << "<!-- " << opts.comment << " -->\n";
  os << "<rect width=\"" << opts.width << "\" height=\"" << opts.height << "\" fill=\"#ffffff\"/>\n";
  os << "<text x=\"" << opts.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(opts.title)
     << "</text>\n";
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << num(pw, p) << "\" height=\""
     << num(ph, p) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double fx = ax.unmap(ax.lo + (ax.hi - ax.lo) * t / 4.0);
    const double fy = ay.unmap(ay.lo + (ay.hi - ay.lo) * t / 4.0);
    const double x = px(fx), y = py(fy);
    os << "<line x1=\"" << num(x, p) << "\" y1=\"" << kMarginTop + ph << "\" x2=\"" << num(x, p) << "\" y2=\""
       << kMarginTop + ph + 5 << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << num(x, p) << "\" y=\"" << kMarginTop + ph + 18 << "\" text-anchor=\"middle\">"
       << num(fx, 4) << "</text>\n";
    os << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << num(y, p) << "\" x2=\"" << kMarginLeft << "\" y2=\""
       << num(y, p) << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(y + 4, p) << "\" text-anchor=\"end\">" << num(fy, 4)
       << "</text>\n";
  }
  os << "<text x=\"" << num(kMarginLeft + pw / 2, p) << "\" y=\"" << opts.height - 10
     << "\" text-anchor=\"middle\">" << escape(opts.x_label) << "</text>\n";
  os << "<text x=\"15\" y=\"" << num(kMarginTop + ph / 2, p) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << num(kMarginTop + ph / 2, p) << ")\">" << escape(opts.y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % kPalette.size()];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      const double x = series[s].x[k], y = series[s].y[k];
      if (!ax.usable(x) || !ay.usable(y)) continue;
      if (!first) os << ' ';
      os << num(px(x), opts.precision) << ',' << num(py(y), opts.precision);
      first = false;
    }
    os << "\"/>\n";
    const double ly = kMarginTop + 12 + 16.0 * static_cast<double>(s);
    const double lx = kMarginLeft + pw + 10;
    os << "<line x1=\"" << num(lx, p) << "\" y1=\"" << num(ly, p) << "\" x2=\"" << num(lx + 20, p) << "\" y2=\""
       << num(ly, p) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(lx + 26, p) << "\" y=\"" << num(ly + 4, p) << "\">" << escape(series[s].label)
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace sattn
