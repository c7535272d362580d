#include "doacorr/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace doacorr {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// A 1/2/5 step giving roughly six ticks over `range`.
double Tick(double range) {
  const double raw = range / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string RenderTrajectorySvg(const TrajectoryPlot &plot) {
  const std::size_t n = plot.time_s.size();
  if (n == 0) throw std::invalid_argument("plot: empty trajectory");
  if (plot.mean_deg.size() != n) throw std::invalid_argument("plot: mean/time length mismatch");
  const bool band = !plot.std_deg.empty();
  if (band && plot.std_deg.size() != n) throw std::invalid_argument("plot: std/time length mismatch");

  double t0 = plot.time_s.front(), t1 = plot.time_s.back();
  if (t1 <= t0) t1 = t0 + 1.0;
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = band ? plot.std_deg[i] : 0.0;
    lo = std::min(lo, plot.mean_deg[i] - s);
    hi = std::max(hi, plot.mean_deg[i] + s);
  }
  if (plot.true_doa_deg) {
    lo = std::min(lo, *plot.true_doa_deg);
    hi = std::max(hi, *plot.true_doa_deg);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("plot: non-finite values");
  if (hi - lo < 1.0) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double ystep = Tick(hi - lo);
  lo = std::floor(lo / ystep) * ystep;
  hi = std::ceil(hi / ystep) * ystep;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto x = [&](double t) { return kLeft + (t - t0) / (t1 - t0) * pw; };
  auto y = [&](double v) { return kTop + (hi - v) / (hi - lo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) + "\" height=\"" +
         Num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + Num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         Escape(plot.title) + "</text>\n";

  // Grid and tick labels.
  for (double v = lo; v <= hi + 1e-9; v += ystep) {
    svg += "<line x1=\"" + Num(kLeft) + "\" y1=\"" + Num(y(v)) + "\" x2=\"" + Num(kLeft + pw) +
           "\" y2=\"" + Num(y(v)) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + Num(kLeft - 6) + "\" y=\"" + Num(y(v) + 4) + "\" text-anchor=\"end\">" +
           Num(v) + "</text>\n";
  }
  const double xstep = Tick(t1 - t0);
  for (double t = std::ceil(t0 / xstep) * xstep; t <= t1 + 1e-9; t += xstep) {
    svg += "<line x1=\"" + Num(x(t)) + "\" y1=\"" + Num(kTop) + "\" x2=\"" + Num(x(t)) + "\" y2=\"" +
           Num(kTop + ph) + "\" stroke=\"#eeeeee\"/>\n";
    svg += "<text x=\"" + Num(x(t)) + "\" y=\"" + Num(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
           Num(t) + "</text>\n";
  }
  svg += "<rect x=\"" + Num(kLeft) + "\" y=\"" + Num(kTop) + "\" width=\"" + Num(pw) + "\" height=\"" +
         Num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + Num(kLeft + pw / 2) + "\" y=\"" + Num(kHeight - 10) +
         "\" text-anchor=\"middle\">time (s)</text>\n";
  svg += "<text x=\"16\" y=\"" + Num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         Num(kTop + ph / 2) + ")\">theta (deg)</text>\n";

  if (band) {
    svg += "<polygon fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < n; ++i)
      svg += Num(x(plot.time_s[i])) + "," + Num(y(plot.mean_deg[i] + plot.std_deg[i])) + " ";
    for (std::size_t i = n; i-- > 0;)
      svg += Num(x(plot.time_s[i])) + "," + Num(y(plot.mean_deg[i] - plot.std_deg[i])) + " ";
    svg += "\"/>\n";
  }
  if (plot.true_doa_deg) {
    svg += "<line x1=\"" + Num(kLeft) + "\" y1=\"" + Num(y(*plot.true_doa_deg)) + "\" x2=\"" +
           Num(kLeft + pw) + "\" y2=\"" + Num(y(*plot.true_doa_deg)) +
           "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
  }
  svg += "<polyline fill=\"none\" stroke=\"#08306b\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i)
    svg += Num(x(plot.time_s[i])) + "," + Num(y(plot.mean_deg[i])) + " ";
  svg += "\"/>\n</svg>\n";
  return svg;
}

}  // namespace doacorr
