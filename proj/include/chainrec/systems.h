#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chainrec/geometry.h"

namespace chainrec {

/// An evaluable self-map of the line or plane. Systems are immutable after
/// construction; eval is deterministic and safe to call concurrently.
struct DynSystem {
    std::string name;
    int dimension = 2;
    std::function<Point(Point)> eval;
    std::function<Point(Point)> inverse;                       // empty if unknown
    std::function<double(Point, double)> local_lipschitz;      // upper bound on B(p, r); empty if unknown
    std::string metadata;

    bool has_inverse() const { return static_cast<bool>(inverse); }
    bool has_lipschitz() const { return static_cast<bool>(local_lipschitz); }
};

/// Evaluates f(p), rejecting non-finite output.
Point evaluate(const DynSystem& system, Point p);

/// d(f(p), p) under the given metric.
double displacement(const DynSystem& system, const MetricSpec& metric, Point p);

/// Finite-difference estimate of an upper bound on the local Lipschitz
/// constant of eval over B(p, r). Used for systems without a closed form.
double estimate_local_lipschitz(const DynSystem& system, Point p, double r);

// Built-in systems.
DynSystem make_identity(int dimension = 2);
DynSystem make_translation(double dx, double dy);   // rigid plane translation
DynSystem make_translation_exp();                   // (x, y) -> (x + e^y, y)
DynSystem make_line_translation();                  // x -> x + 1 on the line
DynSystem make_contraction_half();                  // p -> p / 2
DynSystem make_rotation(double angle);              // rotation about the origin

/// Time-one map of the planar flow whose upper-half-plane orbits are the
/// circles through the origin centered on the x-axis, traversed up the y-axis
/// and back down to the positive x-axis; the closed lower half-plane is fixed.
DynSystem make_semicircle_time_one();

/// The generating vector field of the semicircle flow:
/// V(x,y) = min(y,1) * (2xy, y^2 - x^2) / (x^2 + y^2) for y > 0, else 0.
Point semicircle_vector_field(Point p);

/// Classical fixed-step RK4 flow of the semicircle field (64 steps per unit time).
Point semicircle_flow(Point p, double time);

/// Registry of named built-ins usable from configs; returns nullopt if unknown.
std::optional<DynSystem> find_builtin(const std::string& name);
std::vector<std::string> builtin_names();

} // namespace chainrec
