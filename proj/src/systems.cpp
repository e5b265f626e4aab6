#include "chainrec/systems.h"

#include <algorithm>
#include <cmath>

namespace chainrec {

Point evaluate(const DynSystem& system, Point p) {
    Point q = system.eval(p);
    if (!finite(q))
        throw evaluation_error("evaluate: system '" + system.name + "' produced a non-finite point");
    return q;
}

double displacement(const DynSystem& system, const MetricSpec& metric, Point p) {
    return distance(metric, evaluate(system, p), p);
}

namespace {

// Largest singular value of the 2x2 matrix [[a, b], [c, d]].
double spectral_norm_2x2(double a, double b, double c, double d) {
    double e = 0.5 * (a + d);
    double f = 0.5 * (a - d);
    double g = 0.5 * (c + b);
    double h = 0.5 * (c - b);
    return std::hypot(e, h) + std::hypot(f, g);
}

template <typename F>
double fd_lipschitz(F&& f, int dimension, Point p, double r) {
    double scale = std::max({1.0, std::abs(p.x), std::abs(p.y)});
    double h = std::max(1e-7 * scale, 1e-3 * r);
    double worst = 0.0;
    Point probes[5] = {p, {p.x + r, p.y}, {p.x - r, p.y}, {p.x, p.y + r}, {p.x, p.y - r}};
    int nprobes = dimension == 2 ? 5 : 3;
    for (int i = 0; i < nprobes; ++i) {
        Point q = probes[i];
        Point fxp = f({q.x + h, q.y});
        Point fxm = f({q.x - h, q.y});
        if (dimension == 1) {
            worst = std::max(worst, std::abs(fxp.x - fxm.x) / (2.0 * h));
            continue;
        }
        Point fyp = f({q.x, q.y + h});
        Point fym = f({q.x, q.y - h});
        double a = (fxp.x - fxm.x) / (2.0 * h);
        double c = (fxp.y - fxm.y) / (2.0 * h);
        double b = (fyp.x - fym.x) / (2.0 * h);
        double d = (fyp.y - fym.y) / (2.0 * h);
        worst = std::max(worst, spectral_norm_2x2(a, b, c, d));
    }
    // Safety factor for the sampling and differencing error.
    return std::max(1.3 * worst, 1e-6);
}

Point rk4_step(Point p, double h) {
    Point k1 = semicircle_vector_field(p);
    Point k2 = semicircle_vector_field(p + 0.5 * h * k1);
    Point k3 = semicircle_vector_field(p + 0.5 * h * k2);
    Point k4 = semicircle_vector_field(p + h * k3);
    return p + (h / 6.0) * (k1 + k2 + k2 + k3 + k3 + k4);
}

Point semicircle_map(Point p) {
    if (p.y <= 0.0) return p;   // fixed half-plane, bitwise
    const int steps = 64;
    const double h = 1.0 / 64.0;
    for (int i = 0; i < steps; ++i) p = rk4_step(p, h);
    return p;
}

} // namespace

double estimate_local_lipschitz(const DynSystem& system, Point p, double r) {
    return fd_lipschitz([&](Point q) { return system.eval(q); }, system.dimension, p, r);
}

Point semicircle_vector_field(Point p) {
    if (p.y <= 0.0) return {0.0, 0.0};
    double r2 = p.x * p.x + p.y * p.y;   // positive: y > 0
    double s = std::min(p.y, 1.0) / r2;
    return {s * 2.0 * p.x * p.y, s * (p.y * p.y - p.x * p.x)};
}

Point semicircle_flow(Point p, double time) {
    if (p.y <= 0.0 || time == 0.0) return p;
    int steps = std::max(1, static_cast<int>(std::ceil(std::abs(time) * 64.0)));
    double h = time / steps;
    for (int i = 0; i < steps; ++i) p = rk4_step(p, h);
    return p;
}

DynSystem make_identity(int dimension) {
    DynSystem s;
    s.name = "identity";
    s.dimension = dimension;
    s.eval = [](Point p) { return p; };
    s.inverse = [](Point p) { return p; };
    s.local_lipschitz = [](Point, double) { return 1.0; };
    return s;
}

DynSystem make_translation(double dx, double dy) {
    DynSystem s;
    s.name = "translation";
    s.dimension = 2;
    s.eval = [dx, dy](Point p) { return Point{p.x + dx, p.y + dy}; };
    s.inverse = [dx, dy](Point p) { return Point{p.x - dx, p.y - dy}; };
    s.local_lipschitz = [](Point, double) { return 1.0; };
    return s;
}

DynSystem make_translation_exp() {
    DynSystem s;
    s.name = "translation_exp";
    s.dimension = 2;
    s.metadata = "fixed-point-free shear (x, y) -> (x + e^y, y)";
    s.eval = [](Point p) { return Point{p.x + std::exp(p.y), p.y}; };
    s.inverse = [](Point p) { return Point{p.x - std::exp(p.y), p.y}; };
    s.local_lipschitz = [](Point p, double r) {
        // Jacobian [[1, e^y], [0, 1]]; take the worst shear over the ball.
        double g = std::exp(std::min(p.y + r, 60.0));
        return 0.5 * (g + std::sqrt(g * g + 4.0));
    };
    return s;
}

DynSystem make_line_translation() {
    DynSystem s;
    s.name = "line_translation";
    s.dimension = 1;
    s.eval = [](Point p) { return Point{p.x + 1.0, 0.0}; };
    s.inverse = [](Point p) { return Point{p.x - 1.0, 0.0}; };
    s.local_lipschitz = [](Point, double) { return 1.0; };
    return s;
}

DynSystem make_contraction_half() {
    DynSystem s;
    s.name = "contraction_half";
    s.dimension = 2;
    s.eval = [](Point p) { return Point{0.5 * p.x, 0.5 * p.y}; };
    s.inverse = [](Point p) { return Point{2.0 * p.x, 2.0 * p.y}; };
    s.local_lipschitz = [](Point, double) { return 0.5; };
    return s;
}

DynSystem make_rotation(double angle) {
    DynSystem s;
    s.name = "rotation";
    s.dimension = 2;
    double c = std::cos(angle), sn = std::sin(angle);
    s.eval = [c, sn](Point p) { return Point{c * p.x - sn * p.y, sn * p.x + c * p.y}; };
    s.inverse = [c, sn](Point p) { return Point{c * p.x + sn * p.y, -sn * p.x + c * p.y}; };
    s.local_lipschitz = [](Point, double) { return 1.0; };
    return s;
}

DynSystem make_semicircle_time_one() {
    DynSystem s;
    s.name = "semicircle";
    s.dimension = 2;
    s.metadata = "time-one map of the semicircle flow; identity on {y <= 0}";
    s.eval = [](Point p) { return semicircle_map(p); };
    s.local_lipschitz = [](Point p, double r) {
        return fd_lipschitz([](Point q) { return semicircle_map(q); }, 2, p, r);
    };
    return s;
}

std::optional<DynSystem> find_builtin(const std::string& name) {
    if (name == "identity") return make_identity();
    if (name == "translation_exp") return make_translation_exp();
    if (name == "line_translation") return make_line_translation();
    if (name == "contraction_half") return make_contraction_half();
    if (name == "rotation5") return make_rotation(2.0 * 3.14159265358979323846 / 5.0);
    if (name == "semicircle") return make_semicircle_time_one();
    return std::nullopt;
}

std::vector<std::string> builtin_names() {
    return {"identity", "translation_exp", "line_translation",
            "contraction_half", "rotation5", "semicircle"};
}

} // namespace chainrec
