#pragma once

#include <string>
#include <vector>

namespace dys {

/// Minimal hand-rolled SVG plot: axes box, polylines, point markers and
/// one horizontal rule. Output contains no timestamps, so files are
/// byte-identical across runs.
class SvgPlot {
  public:
    SvgPlot(double xmin, double xmax, double ymin, double ymax, std::string x_label = "",
            std::string y_label = "");

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& color, double width = 1.5);
    void points(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& color, double radius = 2.5);
    void hline(double y, const std::string& color, double width = 1.5);
    /// Vertical stem from y = 0 to the given value.
    void stem(double x, double y, const std::string& color, double width = 1.0);

    std::string str() const;

  private:
    double to_px_x(double x) const;
    double to_px_y(double y) const;

    double xmin_, xmax_, ymin_, ymax_;
    std::string x_label_, y_label_;
    std::string body_;
};

}  // namespace dys
