#include "chainrec/geometry.h"

#include <algorithm>

namespace chainrec {

Point embed_line_to_circle(double t) {
    if (!std::isfinite(t)) throw input_error("embed_line_to_circle: t must be finite");
    double theta = circle_angle(t);
    return {std::cos(theta), std::sin(theta)};
}

double circle_chord(double s, double t) {
    // 2*|sin((theta_s - theta_t)/2)|, computed through the embedded points.
    return euclidean(embed_line_to_circle(s), embed_line_to_circle(t));
}

double distance(const MetricSpec& metric, Point p, Point q) {
    if (!finite(p) || !finite(q)) throw input_error("distance: points must be finite");
    switch (metric.kind) {
    case MetricKind::euclidean:
        return euclidean(p, q);
    case MetricKind::bounded:
        return std::min(euclidean(p, q), 1.0);
    case MetricKind::circle_induced:
        if (metric.dimension != 1)
            throw input_error("distance: circle_induced metric requires a line system");
        return circle_chord(p.x, q.x);
    }
    throw input_error("distance: unknown metric kind");
}

} // namespace chainrec
