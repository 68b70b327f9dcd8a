#include "dys/svg.hpp"

#include <cstdio>

namespace dys {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 16.0;
constexpr double kBottom = 44.0;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

SvgPlot::SvgPlot(double xmin, double xmax, double ymin, double ymax, std::string x_label,
                 std::string y_label)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {
    if (xmax_ <= xmin_) {
        xmin_ -= 1.0;
        xmax_ += 1.0;
    }
    if (ymax_ <= ymin_) {
        ymin_ -= 1.0;
        ymax_ += 1.0;
    }
}

double SvgPlot::to_px_x(double x) const {
    return kLeft + (x - xmin_) / (xmax_ - xmin_) * (kWidth - kLeft - kRight);
}

double SvgPlot::to_px_y(double y) const {
    return kHeight - kBottom - (y - ymin_) / (ymax_ - ymin_) * (kHeight - kTop - kBottom);
}

void SvgPlot::polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                       const std::string& color, double width) {
    body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) +
             "\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) body_ += ' ';
        body_ += num(to_px_x(xs[i])) + "," + num(to_px_y(ys[i]));
    }
    body_ += "\"/>\n";
}

void SvgPlot::points(const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::string& color, double radius) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        body_ += "<circle cx=\"" + num(to_px_x(xs[i])) + "\" cy=\"" + num(to_px_y(ys[i])) +
                 "\" r=\"" + num(radius) + "\" fill=\"" + color + "\"/>\n";
    }
}

void SvgPlot::hline(double y, const std::string& color, double width) {
    body_ += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(to_px_y(y)) + "\" x2=\"" +
             num(kWidth - kRight) + "\" y2=\"" + num(to_px_y(y)) + "\" stroke=\"" + color +
             "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgPlot::stem(double x, double y, const std::string& color, double width) {
    body_ += "<line x1=\"" + num(to_px_x(x)) + "\" y1=\"" + num(to_px_y(0.0)) + "\" x2=\"" +
             num(to_px_x(x)) + "\" y2=\"" + num(to_px_y(y)) + "\" stroke=\"" + color +
             "\" stroke-width=\"" + num(width) + "\"/>\n";
}

std::string SvgPlot::str() const {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
           num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" fill=\"white\"/>\n";
    out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
           num(kWidth - kLeft - kRight) + "\" height=\"" + num(kHeight - kTop - kBottom) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    // Corner tick labels.
    out += "<text x=\"" + num(kLeft) + "\" y=\"" + num(kHeight - kBottom + 16.0) +
           "\" font-size=\"11\">" + num(xmin_) + "</text>\n";
    out += "<text x=\"" + num(kWidth - kRight - 40.0) + "\" y=\"" + num(kHeight - kBottom + 16.0) +
           "\" font-size=\"11\">" + num(xmax_) + "</text>\n";
    out += "<text x=\"4\" y=\"" + num(kHeight - kBottom) + "\" font-size=\"11\">" + num(ymin_) +
           "</text>\n";
    out += "<text x=\"4\" y=\"" + num(kTop + 12.0) + "\" font-size=\"11\">" + num(ymax_) +
           "</text>\n";
    if (!x_label_.empty())
        out += "<text x=\"" + num(kWidth / 2.0) + "\" y=\"" + num(kHeight - 8.0) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + x_label_ + "</text>\n";
    if (!y_label_.empty())
        out += "<text x=\"14\" y=\"" + num(kHeight / 2.0) + "\" font-size=\"12\" transform=\"rotate(-90 14 " +
               num(kHeight / 2.0) + ")\" text-anchor=\"middle\">" + y_label_ + "</text>\n";
    out += body_;
    out += "</svg>\n";
    return out;
}

}  // namespace dys
