#include "chainrec/svgplot.h"

#include <cstdio>

namespace chainrec {

namespace {
std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}
} // namespace

SvgScene::SvgScene(Window viewport, int pixel_width) : view_(viewport), width_px_(pixel_width) {
    view_.validate(2);
    height_px_ = static_cast<int>(pixel_width * viewport.height() / viewport.width() + 0.5);
    if (height_px_ < 1) height_px_ = 1;
}

double SvgScene::sx(double x) const {
    return (x - view_.lo.x) / view_.width() * width_px_;
}

double SvgScene::sy(double y) const {
    return (view_.hi.y - y) / view_.height() * height_px_;
}

void SvgScene::add_rect(Window w, const std::string& fill, double opacity) {
    std::string e = "<rect x=\"" + fmt(sx(w.lo.x)) + "\" y=\"" + fmt(sy(w.hi.y)) + "\" width=\"" +
                    fmt(sx(w.hi.x) - sx(w.lo.x)) + "\" height=\"" + fmt(sy(w.lo.y) - sy(w.hi.y)) +
                    "\" fill=\"" + fill + "\" fill-opacity=\"" + fmt(opacity) + "\"/>";
    elements_.push_back(std::move(e));
}

void SvgScene::add_polyline(const std::vector<Point>& pts, const std::string& color,
                            double width_px, bool dashed) {
    if (pts.size() < 2) return;
    std::string e = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
                    fmt(width_px) + "\"";
    if (dashed) e += " stroke-dasharray=\"4 3\"";
    e += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) e += ' ';
        e += fmt(sx(pts[i].x)) + "," + fmt(sy(pts[i].y));
    }
    e += "\"/>";
    elements_.push_back(std::move(e));
}

void SvgScene::add_segment(Point a, Point b, const std::string& color, double width_px,
                           bool dashed) {
    std::string e = "<line x1=\"" + fmt(sx(a.x)) + "\" y1=\"" + fmt(sy(a.y)) + "\" x2=\"" +
                    fmt(sx(b.x)) + "\" y2=\"" + fmt(sy(b.y)) + "\" stroke=\"" + color +
                    "\" stroke-width=\"" + fmt(width_px) + "\"";
    if (dashed) e += " stroke-dasharray=\"4 3\"";
    e += "/>";
    elements_.push_back(std::move(e));
}

void SvgScene::add_circle(Point center, double radius, const std::string& stroke,
                          const std::string& fill) {
    // Radius is mapped through the x scale; scenes use square-ish viewports.
    double r_px = radius / view_.width() * width_px_;
    std::string e = "<circle cx=\"" + fmt(sx(center.x)) + "\" cy=\"" + fmt(sy(center.y)) +
                    "\" r=\"" + fmt(r_px) + "\" stroke=\"" + stroke + "\" fill=\"" + fill +
                    "\" fill-opacity=\"0.25\"/>";
    elements_.push_back(std::move(e));
}

void SvgScene::add_dot(Point p, double radius_px, const std::string& fill) {
    std::string e = "<circle cx=\"" + fmt(sx(p.x)) + "\" cy=\"" + fmt(sy(p.y)) + "\" r=\"" +
                    fmt(radius_px) + "\" fill=\"" + fill + "\"/>";
    elements_.push_back(std::move(e));
}

std::string SvgScene::str() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(width_px_) + "\" height=\"" + std::to_string(height_px_) +
           "\" viewBox=\"0 0 " + std::to_string(width_px_) + " " + std::to_string(height_px_) +
           "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const std::string& e : elements_) {
        out += e;
        out += '\n';
    }
    out += "</svg>\n";
    return out;
}

} // namespace chainrec
