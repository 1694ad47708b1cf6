#include "cvxpolar/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cvxpolar/errors.hpp"
#include "cvxpolar/io.hpp"

namespace cvxpolar {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

void SvgPlot::add_polyline(std::vector<double> x, std::vector<double> y, std::string stroke,
                           double stroke_width) {
  if (x.size() != y.size()) throw InvalidInputError("SVG polyline: x/y sizes disagree");
  if (x.empty()) return;
  lines_.push_back(Polyline{std::move(x), std::move(y), std::move(stroke), stroke_width});
}

std::string SvgPlot::render() const {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& l : lines_) {
    for (double v : l.x) {
      if (!std::isfinite(v)) continue;
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : l.y) {
      if (!std::isfinite(v)) continue;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmin <= xmax)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double margin = 48;
  const double padx = 0.05 * (xmax - xmin);
  const double pady = 0.05 * (ymax - ymin);
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;
  auto sx = [&](double v) { return margin + (v - xmin) / (xmax - xmin) * (width_ - 2 * margin); };
  auto sy = [&](double v) { return height_ - margin - (v - ymin) / (ymax - ymin) * (height_ - 2 * margin); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes through the origin when visible, else along the frame edge
  const double ax = (xmin <= 0 && 0 <= xmax) ? sx(0) : margin;
  const double ay = (ymin <= 0 && 0 <= ymax) ? sy(0) : height_ - margin;
  out << "  <line x1=\"" << num(margin) << "\" y1=\"" << num(ay) << "\" x2=\""
      << num(width_ - margin) << "\" y2=\"" << num(ay) << "\" stroke=\"#555\" stroke-width=\"1\"/>\n";
  out << "  <line x1=\"" << num(ax) << "\" y1=\"" << num(margin) << "\" x2=\"" << num(ax)
      << "\" y2=\"" << num(height_ - margin) << "\" stroke=\"#555\" stroke-width=\"1\"/>\n";

  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double tx = xmin + (xmax - xmin) * i / ticks;
    const double ty = ymin + (ymax - ymin) * i / ticks;
    out << "  <line x1=\"" << num(sx(tx)) << "\" y1=\"" << num(ay - 3) << "\" x2=\"" << num(sx(tx))
        << "\" y2=\"" << num(ay + 3) << "\" stroke=\"#555\" stroke-width=\"1\"/>\n";
    out << "  <text x=\"" << num(sx(tx)) << "\" y=\"" << num(ay + 16)
        << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#333\">" << label(tx) << "</text>\n";
    out << "  <line x1=\"" << num(ax - 3) << "\" y1=\"" << num(sy(ty)) << "\" x2=\"" << num(ax + 3)
        << "\" y2=\"" << num(sy(ty)) << "\" stroke=\"#555\" stroke-width=\"1\"/>\n";
    out << "  <text x=\"" << num(ax - 6) << "\" y=\"" << num(sy(ty) + 3)
        << "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333\">" << label(ty) << "</text>\n";
  }

  for (const auto& l : lines_) {
    out << "  <polyline fill=\"none\" stroke=\"" << l.stroke << "\" stroke-width=\"" << l.width
        << "\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < l.x.size(); ++i) {
      if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i])) continue;
      if (!first) out << " ";
      out << num(sx(l.x[i])) << "," << num(sy(l.y[i]));
      first = false;
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void SvgPlot::write(const std::string& path) const { io::write_text_atomic(path, render()); }

}  // namespace cvxpolar
