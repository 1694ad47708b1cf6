// Minimal SVG polyline plotter for demo output.  Pure presentation: nothing
// computed here feeds back into any numeric result.
#pragma once

#include <string>
#include <vector>

namespace cvxpolar {

class SvgPlot {
 public:
  SvgPlot(double width = 720, double height = 540) : width_(width), height_(height) {}

  void add_polyline(std::vector<double> x, std::vector<double> y, std::string stroke = "#1f77b4",
                    double stroke_width = 1.5);

  std::string render() const;
  void write(const std::string& path) const;

 private:
  struct Polyline {
    std::vector<double> x, y;
    std::string stroke;
    double width;
  };

  double width_;
  double height_;
  std::vector<Polyline> lines_;
};

}  // namespace cvxpolar
