#include "chainrec/radius_field.h"

#include <algorithm>
#include <cmath>

namespace chainrec {

RadiusField RadiusField::constant(double value) {
    if (!(value > 0.0)) throw input_error("RadiusField::constant: value must be positive");
    RadiusField f;
    f.rep_ = Rep::constant;
    f.value_ = value;
    f.lipschitz_ = 0.0;
    f.description_ = "const:" + std::to_string(value);
    return f;
}

RadiusField RadiusField::closed_form(std::function<double(Point)> fn, double lipschitz_bound,
                                     std::string description) {
    RadiusField f;
    f.rep_ = Rep::closed_form;
    f.fn_ = std::move(fn);
    f.lipschitz_ = lipschitz_bound;
    f.description_ = std::move(description);
    return f;
}

RadiusField RadiusField::grid_sampled(Window window, int nx, int ny,
                                      std::vector<double> node_values, double lipschitz_bound) {
    window.validate(2);
    if (nx < 1 || ny < 1) throw input_error("RadiusField::grid_sampled: need nx, ny >= 1");
    if (node_values.size() != static_cast<std::size_t>((nx + 1) * (ny + 1)))
        throw input_error("RadiusField::grid_sampled: node count mismatch");
    RadiusField f;
    f.rep_ = Rep::grid;
    f.window_ = window;
    f.nx_ = nx;
    f.ny_ = ny;
    f.values_ = std::move(node_values);
    f.lipschitz_ = lipschitz_bound;
    f.description_ = "grid";
    return f;
}

Point RadiusField::node(int ix, int iy) const {
    return {window_.lo.x + window_.width() * ix / nx_,
            window_.lo.y + window_.height() * iy / ny_};
}

double RadiusField::node_value(int ix, int iy) const {
    return values_[static_cast<std::size_t>(iy) * (nx_ + 1) + ix];
}

double RadiusField::operator()(Point p) const {
    switch (rep_) {
    case Rep::constant:
        return value_;
    case Rep::closed_form:
        return fn_(p);
    case Rep::grid: {
        double sx = (p.x - window_.lo.x) / window_.width() * nx_;
        double sy = (p.y - window_.lo.y) / window_.height() * ny_;
        sx = std::clamp(sx, 0.0, static_cast<double>(nx_));
        sy = std::clamp(sy, 0.0, static_cast<double>(ny_));
        int ix = std::min(static_cast<int>(sx), nx_ - 1);
        int iy = std::min(static_cast<int>(sy), ny_ - 1);
        double tx = sx - ix, ty = sy - iy;
        double v00 = node_value(ix, iy), v10 = node_value(ix + 1, iy);
        double v01 = node_value(ix, iy + 1), v11 = node_value(ix + 1, iy + 1);
        return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
               (1 - tx) * ty * v01 + tx * ty * v11;
    }
    }
    return value_;
}

RadiusField pasch_hausdorff(const RadiusField& h, const MetricSpec& metric) {
    if (h.rep() != RadiusField::Rep::grid)
        throw input_error("pasch_hausdorff: input must be a grid-sampled field");

    int nx = h.grid_nx(), ny = h.grid_ny();
    std::vector<Point> nodes;
    std::vector<double> hv;
    nodes.reserve((nx + 1) * (ny + 1));
    hv.reserve(nodes.capacity());
    bool any_positive = false;
    for (int iy = 0; iy <= ny; ++iy) {
        for (int ix = 0; ix <= nx; ++ix) {
            nodes.push_back(h.node(ix, iy));
            double v = h.node_value(ix, iy);
            hv.push_back(v);
            if (std::isfinite(v) && v < 0.0)
                throw input_error("pasch_hausdorff: height field must be nonnegative");
            if (std::isfinite(v) && v > 0.0) any_positive = true;
        }
    }
    if (!any_positive)
        throw degenerate_input("pasch_hausdorff: height field has no positive node");

    std::size_t n = nodes.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(hv[j])) continue;
            double cand = hv[j] + distance(metric, nodes[i], nodes[j]);
            if (cand < best) best = cand;
        }
        out[i] = best;
    }
    return RadiusField::grid_sampled(h.grid_window(), nx, ny, std::move(out), 1.0);
}

} // namespace chainrec
