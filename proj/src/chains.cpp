#include "chainrec/chains.h"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace chainrec {

namespace {
constexpr double kZeroSlack = 1e-12;   // "no jump" tolerance for restricted chains
}

Chain make_chain(const DynSystem& system, const MetricSpec& metric, std::vector<Point> points) {
    if (points.size() < 2) throw input_error("make_chain: a chain needs at least two points");
    Chain chain;
    chain.points = std::move(points);
    chain.jump_costs.reserve(chain.points.size() - 1);
    for (std::size_t i = 1; i < chain.points.size(); ++i) {
        Point img = evaluate(system, chain.points[i - 1]);
        chain.jump_costs.push_back(distance(metric, img, chain.points[i]));
    }
    return chain;
}

ChainNotion ChainNotion::eps_chain(double eps) {
    if (!(eps > 0.0)) throw input_error("eps_chain: eps must be positive");
    ChainNotion n;
    n.kind = NotionKind::eps;
    n.eps = eps;
    return n;
}

ChainNotion ChainNotion::strong_chain(double eps) {
    if (!(eps > 0.0)) throw input_error("strong_chain: eps must be positive");
    ChainNotion n;
    n.kind = NotionKind::strong;
    n.eps = eps;
    return n;
}

ChainNotion ChainNotion::radius_chain(RadiusField r) {
    ChainNotion n;
    n.kind = NotionKind::radius;
    n.radius = std::move(r);
    return n;
}

ChainNotion ChainNotion::restricted_chain(RestrictionSet w, double eps) {
    if (!(eps > 0.0)) throw input_error("restricted_chain: eps must be positive");
    ChainNotion n;
    n.kind = NotionKind::restricted;
    n.eps = eps;
    n.restriction = w;
    return n;
}

ChainReport verify_chain(const DynSystem& system, const MetricSpec& metric, const Chain& chain,
                         const ChainNotion& notion) {
    if (chain.points.size() < 2) throw input_error("verify_chain: chain has fewer than two points");
    ChainReport report;
    report.valid = true;
    for (std::size_t i = 1; i < chain.points.size(); ++i) {
        Point img = evaluate(system, chain.points[i - 1]);
        double jump = distance(metric, img, chain.points[i]);
        report.max_jump = std::max(report.max_jump, jump);
        report.total_jump += jump;

        bool ok = true;
        switch (notion.kind) {
        case NotionKind::eps:
            ok = jump < notion.eps;
            break;
        case NotionKind::strong:
            ok = report.total_jump < notion.eps;
            break;
        case NotionKind::radius:
            ok = jump < notion.radius(img);
            break;
        case NotionKind::restricted:
            ok = jump < notion.eps &&
                 (notion.restriction.contains(img, system.dimension) || jump <= kZeroSlack);
            break;
        }
        if (!ok && report.valid) {
            report.valid = false;
            report.first_violation = i;
        }
    }
    return report;
}

Chain build_translation_exp_chain(Point start, double eps) {
    if (!(eps > 0.0)) throw input_error("build_translation_exp_chain: eps must be positive");
    if (!finite(start)) throw input_error("build_translation_exp_chain: start must be finite");
    const DynSystem sys = make_translation_exp();
    const MetricSpec metric{MetricKind::euclidean, 2};

    // Strides stay strictly below eps so every jump verifies strictly.
    const double step = 0.9 * eps;

    std::vector<Point> pts{start};
    Point p = start;

    // Phase 1: descend right until the shear is well below the stride,
    // leaving room for net leftward progress in phase 2.
    while (std::exp(p.y) > 0.3 * eps) {
        p = {p.x + std::exp(p.y), p.y - step};
        pts.push_back(p);
    }
    const double ylow = p.y;

    // Phase 3 is fully determined now: K equal ascent strides landing on start.y.
    const double rise = start.y - ylow;
    const int ascent_steps = rise > 0.0 ? static_cast<int>(std::ceil(rise / step)) : 0;
    const double ascent_stride = ascent_steps > 0 ? rise / ascent_steps : 0.0;
    double ascent_gain = 0.0;   // total x gained while ascending
    for (int k = 0; k < ascent_steps; ++k) ascent_gain += std::exp(ylow + k * ascent_stride);

    // Phase 2: each left stride nets delta; land so the ascent re-enters
    // within half a stride of the start, then close.
    const double delta = step - std::exp(ylow);
    const double landing_err0 = p.x + ascent_gain + std::exp(start.y) - start.x;
    long long left_steps = 0;
    if (landing_err0 > 0.45 * eps)
        left_steps = static_cast<long long>(std::ceil((landing_err0 - 0.45 * eps) / delta));
    for (long long k = 0; k < left_steps; ++k) {
        p = {p.x + std::exp(p.y) - step, p.y};
        pts.push_back(p);
    }

    // Phase 3: ascend right back to start.y.
    for (int k = 0; k < ascent_steps; ++k) {
        p = {p.x + std::exp(p.y), p.y + ascent_stride};
        pts.push_back(p);
    }

    pts.push_back(start);
    return make_chain(sys, metric, pts);
}

namespace {

Point semicircle_eval(Point p) {
    static const DynSystem sys = make_semicircle_time_one();
    return sys.eval(p);
}

// Height of the axis flow after unit time; x == 0 is exactly invariant.
double axis_map(double v) { return semicircle_eval({0.0, v}).y; }

// Solves axis_map(v) == target by bisection; the axis map is increasing.
double axis_preimage(double target) {
    double lo = 0.0, hi = target;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, target); ++i) {
        double mid = 0.5 * (lo + hi);
        (axis_map(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Predicted number of axis-walk steps from x = land back to the origin with
// stride 0.9 * r((x, 0)); midpoint rule, padded.
double predict_walk_steps(const RadiusField& r, double land) {
    const int slabs = 4000;
    double dx = land / slabs;
    double total = 0.0;
    for (int i = 0; i < slabs; ++i) {
        double x = (i + 0.5) * dx;
        double rv = r({x, 0.0});
        if (!(rv > 0.0)) return std::numeric_limits<double>::infinity();
        total += dx / (0.9 * rv);
    }
    return 1.05 * total;
}

// Total chain-length estimate for a first hop of size delta from q.
double predict_chain_points(const RadiusField& r, Point q, double delta) {
    double c = (delta * delta + q.y * q.y) / (2.0 * delta);
    double land = 2.0 * c;
    return predict_walk_steps(r, land) + 3.3 * c + 200.0;
}

} // namespace

Chain build_semicircle_tcr_chain(Point start, const RadiusField& r, std::size_t max_points) {
    if (!(start.x == 0.0) || !(start.y > 0.0))
        throw input_error("build_semicircle_tcr_chain: start must lie on the positive y-axis");
    const DynSystem sys = make_semicircle_time_one();
    const MetricSpec metric{MetricKind::euclidean, 2};

    Point q = evaluate(sys, start);
    double rq = r(q);
    if (!(rq > 0.0))
        throw construction_failed("build_semicircle_tcr_chain: radius field vanishes at f(start)");

    // Smallest admissible hop: half the allowance at the hop image and at the
    // landing. Raised only if the implied axis walk would not fit max_points.
    double delta = 0.5 * std::min(rq, r({q.x + 0.5 * rq, q.y}));
    double budget = 0.9 * static_cast<double>(max_points);
    if (predict_chain_points(r, q, delta) > budget) {
        double lo = delta, hi = 0.95 * rq;
        if (predict_chain_points(r, q, hi) > budget)
            throw construction_failed(
                "build_semicircle_tcr_chain: no admissible hop keeps the chain under the "
                "point budget; the radius field decays too fast near the landing ray");
        for (int i = 0; i < 80; ++i) {
            double mid = 0.5 * (lo + hi);
            (predict_chain_points(r, q, mid) > budget ? lo : hi) = mid;
        }
        delta = hi;
    }
    if (!(delta < rq))
        throw construction_failed("build_semicircle_tcr_chain: hop exceeds the local allowance");

    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(
        std::min(static_cast<double>(max_points), predict_chain_points(r, q, delta)) + 16));
    pts.push_back(start);

    // Hop onto the circle family through (delta, f(start).y).
    Point p{q.x + delta, q.y};
    pts.push_back(p);

    // Ride the flow until dropping to the axis is admissible.
    std::size_t flow_cap = static_cast<std::size_t>(predict_chain_points(r, q, delta)) + 100000;
    std::size_t iters = 0;
    for (;; ++iters) {
        if (iters > flow_cap || pts.size() > max_points)
            throw construction_failed("build_semicircle_tcr_chain: flow did not reach the axis");
        Point img = evaluate(sys, p);
        if (img.y < 0.9 * r(img)) {
            p = {img.x, 0.0};
            pts.push_back(p);
            break;
        }
        p = img;
        pts.push_back(p);
    }

    // Walk the fixed axis toward the origin in sub-allowance strides.
    while (p.x > 0.0 && p.x * std::sqrt(2.0) >= 0.8 * r(p)) {
        if (pts.size() >= max_points)
            throw construction_failed("build_semicircle_tcr_chain: axis walk exceeded the point budget");
        double s = std::min(0.9 * r(p), p.x);
        if (!(s > 0.0))
            throw construction_failed("build_semicircle_tcr_chain: radius field vanishes on the axis");
        p = {p.x - s, 0.0};
        pts.push_back(p);
    }

    // Preimage ladder up the y-axis: rung k maps exactly onto rung k-1, so the
    // ride up needs only bisection-sized jumps.
    std::vector<double> ladder{axis_preimage(start.y)};
    double hop_ok = p.x > 0.0 ? p.x : 0.8 * r({0.0, 0.0});
    while (ladder.back() > hop_ok) {
        if (ladder.size() > 400 || !(ladder.back() > 1e-300))
            throw construction_failed("build_semicircle_tcr_chain: ladder cannot reach the axis gap");
        ladder.push_back(axis_preimage(ladder.back()));
    }
    if (!(std::hypot(p.x, ladder.back()) < r(p)))
        throw construction_failed("build_semicircle_tcr_chain: hop onto the y-axis is inadmissible");
    for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) pts.push_back({0.0, *it});
    pts.push_back(start);

    return make_chain(sys, metric, std::move(pts));
}

void write_chain(std::ostream& out, const Chain& chain, int dimension) {
    out << "# chain dim=" << dimension << " points=" << chain.points.size() << "\n";
    char buf[64];
    for (const Point& p : chain.points) {
        auto r1 = std::to_chars(buf, buf + sizeof buf, p.x);
        out.write(buf, r1.ptr - buf);
        if (dimension == 2) {
            out.put(' ');
            auto r2 = std::to_chars(buf, buf + sizeof buf, p.y);
            out.write(buf, r2.ptr - buf);
        }
        out.put('\n');
    }
}

std::vector<Point> read_chain_points(std::istream& in, int dimension) {
    std::vector<Point> pts;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double x;
        if (!(ls >> x)) continue;   // blank or comment-only line
        Point p{x, 0.0};
        if (dimension == 2 && !(ls >> p.y))
            throw input_error("read_chain_points: expected two coordinates per line");
        pts.push_back(p);
    }
    return pts;
}

} // namespace chainrec
