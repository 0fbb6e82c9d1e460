#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sevo/io.hpp"

namespace sevo::io {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 72.0, kRight = 170.0, kTop = 36.0, kBottom = 52.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
    const double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

}  // namespace

std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series,
                       const std::vector<PlotLine>& lines) {
  Range rx, ry;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (s.x[i] > 0.0 && s.y[i] > 0.0) {
        rx.add(std::log10(s.x[i]));
        ry.add(std::log10(s.y[i]));
      }
  for (const auto& l : lines) {
    if (!(l.x_min > 0.0 && l.x_max > 0.0)) continue;
    rx.add(std::log10(l.x_min));
    rx.add(std::log10(l.x_max));
  }
  const bool had_series_y = ry.lo <= ry.hi;
  for (const auto& l : lines) {
    if (!(l.x_min > 0.0 && l.x_max > 0.0) || had_series_y) continue;
    for (double x : {l.x_min, l.x_max}) ry.add((l.intercept + l.slope * std::log(x)) / std::log(10.0));
  }
  rx.pad();
  ry.pad();

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto X = [&](double lx) { return kLeft + (lx - rx.lo) / (rx.hi - rx.lo) * pw; };
  const auto Y = [&](double ly) { return kTop + (ry.hi - ly) / (ry.hi - ry.lo) * ph; };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<defs><clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
     << "\" height=\"" << ph << "\"/></clipPath></defs>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(title) << "</text>\n";

  // Decade ticks and grid.
  for (int d = static_cast<int>(std::ceil(rx.lo)); d <= static_cast<int>(std::floor(rx.hi)); ++d) {
    os << "<line x1=\"" << X(d) << "\" y1=\"" << kTop << "\" x2=\"" << X(d) << "\" y2=\"" << kTop + ph
       << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << X(d) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">1e" << d
       << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ry.lo)); d <= static_cast<int>(std::floor(ry.hi)); ++d) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << Y(d) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << Y(d)
       << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << Y(d) + 4 << "\" text-anchor=\"end\">1e" << d
       << "</text>\n";
  }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(y_label) << "</text>\n";

  os << "<g clip-path=\"url(#plot)\">\n";
  std::size_t color = 0;
  std::vector<std::pair<std::string, std::string>> legend;  // label, style markup
  for (const auto& s : series) {
    const char* c = kPalette[color++ % std::size(kPalette)];
    std::ostringstream pts;
    pts.precision(6);
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0.0 && s.y[i] > 0.0)) continue;
      const double px = X(std::log10(s.x[i])), py = Y(std::log10(s.y[i]));
      pts << px << ',' << py << ' ';
      if (s.markers) os << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    }
    if (!s.markers)
      os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    legend.emplace_back(s.label, std::string("stroke=\"") + c + "\" stroke-width=\"2\"");
  }
  for (const auto& l : lines) {
    if (!(l.x_min > 0.0 && l.x_max > 0.0)) continue;
    const char* c = l.guide ? "#555555" : kPalette[color++ % std::size(kPalette)];
    const char* dash = l.guide ? "2,3" : "7,4";
    const double lx0 = std::log10(l.x_min), lx1 = std::log10(l.x_max);
    const double ly0 = (l.intercept + l.slope * std::log(l.x_min)) / std::log(10.0);
    const double ly1 = (l.intercept + l.slope * std::log(l.x_max)) / std::log(10.0);
    os << "<line x1=\"" << X(lx0) << "\" y1=\"" << Y(ly0) << "\" x2=\"" << X(lx1) << "\" y2=\"" << Y(ly1)
       << "\" stroke=\"" << c << "\" stroke-width=\"1.5\" stroke-dasharray=\"" << dash << "\"/>\n";
    legend.emplace_back(l.label, std::string("stroke=\"") + c + "\" stroke-width=\"1.5\" stroke-dasharray=\"" +
                                     dash + "\"");
  }
  os << "</g>\n";

  double ly = kTop + 8;
  for (const auto& [label, style] : legend) {
    const double lx = kLeft + pw + 12;
    os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly << "\" " << style
       << "/>\n";
    os << "<text x=\"" << lx + 28 << "\" y=\"" << ly + 4 << "\">" << escape(label) << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sevo::io
