#pragma once

#include <cmath>

#include "chainrec/errors.h"

namespace chainrec {

/// A point of the line or plane. Line systems keep y == 0.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }

inline double norm(Point p) { return std::sqrt(p.x * p.x + p.y * p.y); }
inline double euclidean(Point a, Point b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}
inline bool finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Axis-aligned analysis region. For line systems only the x extent is used.
struct Window {
    Point lo;
    Point hi;

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }

    /// Half-open containment, so a grid partition covers each point exactly once.
    bool contains(Point p, int dimension = 2) const {
        if (p.x < lo.x || p.x >= hi.x) return false;
        if (dimension == 2 && (p.y < lo.y || p.y >= hi.y)) return false;
        return true;
    }

    /// Closed containment, used for restriction sets.
    bool contains_closed(Point p, int dimension = 2) const {
        if (p.x < lo.x || p.x > hi.x) return false;
        if (dimension == 2 && (p.y < lo.y || p.y > hi.y)) return false;
        return true;
    }

    void validate(int dimension) const {
        if (!(lo.x < hi.x)) throw input_error("window: lo.x must be < hi.x");
        if (dimension == 2 && !(lo.y < hi.y)) throw input_error("window: lo.y must be < hi.y");
    }
};

enum class MetricKind { euclidean, bounded, circle_induced };

/// A distance on the phase space. circle_induced views the line as the unit
/// circle minus the point (1,0) and measures chord length between images.
struct MetricSpec {
    MetricKind kind = MetricKind::euclidean;
    int dimension = 2;
};

/// Angle of the line-to-circle embedding; strictly increasing, range (0, 2*pi).
inline double circle_angle(double t) { return 3.14159265358979323846 + 2.0 * std::atan(t); }

/// Embeds the line into the unit circle, omitting (1,0).
Point embed_line_to_circle(double t);

/// Chord distance between the circle images of two line points.
double circle_chord(double s, double t);

double distance(const MetricSpec& metric, Point p, Point q);

/// Restriction region for perturbation-limited chains: a box or a disk.
struct RestrictionSet {
    enum class Shape { box, disk };
    Shape shape = Shape::disk;
    Window box{};
    Point center{};
    double radius = 0.0;

    static RestrictionSet make_disk(Point c, double r) {
        RestrictionSet w;
        w.shape = Shape::disk;
        w.center = c;
        w.radius = r;
        return w;
    }
    static RestrictionSet make_box(Window b) {
        RestrictionSet w;
        w.shape = Shape::box;
        w.box = b;
        return w;
    }

    /// Closed containment: restriction sets are compact.
    bool contains(Point p, int dimension = 2) const {
        if (shape == Shape::disk) return euclidean(p, center) <= radius;
        return box.contains_closed(p, dimension);
    }

    double euclidean_distance(Point p, int dimension = 2) const {
        if (shape == Shape::disk) return std::max(0.0, euclidean(p, center) - radius);
        double dx = std::max({box.lo.x - p.x, 0.0, p.x - box.hi.x});
        double dy = dimension == 2 ? std::max({box.lo.y - p.y, 0.0, p.y - box.hi.y}) : 0.0;
        return std::hypot(dx, dy);
    }
};

} // namespace chainrec
