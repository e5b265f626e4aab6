#pragma once

#include <string>
#include <vector>

#include "chainrec/geometry.h"

namespace chainrec {

/// Deterministic SVG 1.1 scene: fixed-precision coordinates, elements emitted
/// in insertion order, so identical input produces byte-identical output.
class SvgScene {
public:
    SvgScene(Window viewport, int pixel_width = 800);

    void add_rect(Window w, const std::string& fill, double opacity = 1.0);
    void add_polyline(const std::vector<Point>& pts, const std::string& color, double width_px,
                      bool dashed = false);
    void add_segment(Point a, Point b, const std::string& color, double width_px,
                     bool dashed = false);
    void add_circle(Point center, double radius, const std::string& stroke,
                    const std::string& fill = "none");
    void add_dot(Point p, double radius_px, const std::string& fill);

    std::string str() const;

private:
    double sx(double x) const;
    double sy(double y) const;

    Window view_;
    int width_px_;
    int height_px_;
    std::vector<std::string> elements_;
};

} // namespace chainrec
