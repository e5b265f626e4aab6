#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "chainrec/geometry.h"

namespace chainrec {

/// A positive function r(p) describing a neighborhood of the diagonal through
/// its slices B(p, r(p)). Three representations: constant, closed form, and
/// grid-sampled with bilinear interpolation (clamped outside its window).
class RadiusField {
public:
    enum class Rep { constant, closed_form, grid };

    RadiusField() = default;

    static RadiusField constant(double value);
    static RadiusField closed_form(std::function<double(Point)> fn, double lipschitz_bound,
                                   std::string description = "");
    /// node_values laid out row-major over an (nx+1) x (ny+1) node lattice
    /// spanning the window. Nodes may carry +infinity to mark "no constraint".
    static RadiusField grid_sampled(Window window, int nx, int ny,
                                    std::vector<double> node_values,
                                    double lipschitz_bound = std::numeric_limits<double>::infinity());

    double operator()(Point p) const;

    Rep rep() const { return rep_; }
    /// Upper bound on the euclidean Lipschitz constant of the field
    /// (0 for constants, 1 for inf-convolution envelopes); +inf if unknown.
    double lipschitz_bound() const { return lipschitz_; }
    const std::string& description() const { return description_; }

    // Grid accessors (valid for Rep::grid).
    const Window& grid_window() const { return window_; }
    int grid_nx() const { return nx_; }
    int grid_ny() const { return ny_; }
    Point node(int ix, int iy) const;
    double node_value(int ix, int iy) const;
    const std::vector<double>& node_values() const { return values_; }

private:
    Rep rep_ = Rep::constant;
    double value_ = 0.0;
    std::function<double(Point)> fn_;
    Window window_{};
    int nx_ = 0, ny_ = 0;
    std::vector<double> values_;
    double lipschitz_ = 0.0;
    std::string description_;
};

/// Pasch-Hausdorff envelope (inf-convolution) of a nodewise height field:
/// delta(p) = min over nodes q of h(q) + d(p, q). The result is the greatest
/// 1-Lipschitz function dominated by h on the nodes; returned on the same grid.
RadiusField pasch_hausdorff(const RadiusField& h, const MetricSpec& metric);

} // namespace chainrec
