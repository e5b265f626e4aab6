#include "chainrec/diskchain.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace chainrec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMarginFloor = 1e-9;   // sampled margins at or below this fail

// Ball sample points of B(c, r): boundary ring, half-radius ring, center.
void ball_samples(Point c, double r, int dimension, int boundary, std::vector<Point>& out) {
    out.clear();
    out.push_back(c);
    if (dimension == 1) {
        out.push_back({c.x + r, 0.0});
        out.push_back({c.x - r, 0.0});
        out.push_back({c.x + 0.5 * r, 0.0});
        out.push_back({c.x - 0.5 * r, 0.0});
        return;
    }
    for (int k = 0; k < boundary; ++k) {
        double phi = 2.0 * kPi * k / boundary;
        out.push_back({c.x + r * std::cos(phi), c.y + r * std::sin(phi)});
    }
    int inner = std::max(4, boundary / 4);
    for (int k = 0; k < inner; ++k) {
        double phi = 2.0 * kPi * k / inner;
        out.push_back({c.x + 0.5 * r * std::cos(phi), c.y + 0.5 * r * std::sin(phi)});
    }
}

// Condition-(1) margin at one disk: d(f(c), c) - r - sup_a d(f(a), f(c)).
double image_disjoint_margin(const DynSystem& system, const MetricSpec& metric, Point c, double r,
                             int boundary, std::vector<Point>& scratch) {
    Point fc = evaluate(system, c);
    double disp = distance(metric, fc, c);
    ball_samples(c, r, system.dimension, boundary, scratch);
    double spread = 0.0;
    for (const Point& a : scratch)
        spread = std::max(spread, distance(metric, evaluate(system, a), fc));
    return disp - r - spread;
}

} // namespace

DisjointnessReport check_disjointness(const DynSystem& system, const MetricSpec& metric,
                                      const RadiusField& r, Window window, int samples_per_axis,
                                      const std::optional<Window>& exclude) {
    window.validate(system.dimension);
    if (samples_per_axis < 2) throw input_error("check_disjointness: need at least 2 samples per axis");
    DisjointnessReport report;
    report.worst_margin = std::numeric_limits<double>::infinity();
    std::vector<Point> scratch;
    int kx = samples_per_axis;
    int ky = system.dimension == 2 ? samples_per_axis : 1;
    for (int iy = 0; iy < ky; ++iy) {
        for (int ix = 0; ix < kx; ++ix) {
            Point p{window.lo.x + window.width() * ix / (kx - 1), 0.0};
            if (system.dimension == 2)
                p.y = window.lo.y + window.height() * iy / (ky - 1);
            if (exclude && exclude->contains_closed(p, system.dimension)) continue;
            double rp = r(p);
            double margin;
            if (!(rp > 0.0)) {
                margin = -std::numeric_limits<double>::infinity();
            } else {
                margin = image_disjoint_margin(system, metric, p, rp, 64, scratch);
            }
            if (margin < report.worst_margin) {
                report.worst_margin = margin;
                report.worst_point = p;
            }
        }
    }
    report.ok = report.worst_margin > kMarginFloor;
    return report;
}

RadiusField fixed_point_free_radius(const DynSystem& system, const MetricSpec& metric,
                                    Window window, int nx, int ny, double safety,
                                    const std::optional<Window>& exclude) {
    window.validate(2);
    if (system.dimension != 2)
        throw input_error("fixed_point_free_radius: needs a plane system");
    if (!(safety > 0.0 && safety < 1.0))
        throw input_error("fixed_point_free_radius: safety must lie in (0,1)");
    if (nx < 1 || ny < 1) throw input_error("fixed_point_free_radius: grid counts >= 1");

    DisjointnessReport last;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        double s = safety / static_cast<double>(1 << attempt);
        std::vector<double> h((nx + 1) * (ny + 1));
        for (int iy = 0; iy <= ny; ++iy) {
            for (int ix = 0; ix <= nx; ++ix) {
                Point q{window.lo.x + window.width() * ix / nx,
                        window.lo.y + window.height() * iy / ny};
                std::size_t idx = static_cast<std::size_t>(iy) * (nx + 1) + ix;
                if (exclude && exclude->contains_closed(q, 2)) {
                    h[idx] = std::numeric_limits<double>::infinity();
                    continue;
                }
                double disp = displacement(system, metric, q);
                if (disp < 1e-9)
                    throw not_fixed_point_free(
                        "fixed_point_free_radius: sampled displacement below 1e-9 at (" +
                        std::to_string(q.x) + ", " + std::to_string(q.y) + ")");
                double rpre = s * disp;
                double lip = system.has_lipschitz() ? system.local_lipschitz(q, rpre)
                                                    : estimate_local_lipschitz(system, q, rpre);
                h[idx] = s * disp / (1.0 + lip);
            }
        }
        RadiusField field = pasch_hausdorff(
            RadiusField::grid_sampled(window, nx, ny, std::move(h)), metric);
        last = check_disjointness(system, metric, field, window, 33, exclude);
        if (last.ok) return field;
    }
    throw not_fixed_point_free(
        "fixed_point_free_radius: disjointness check kept failing, worst margin " +
        std::to_string(last.worst_margin) + " at (" + std::to_string(last.worst_point.x) + ", " +
        std::to_string(last.worst_point.y) + ")");
}

namespace {

struct WorkingDisks {
    std::vector<Disk> disk;     // 1-based: disk[i] = slice at f(points[i-1])
    std::vector<double> jump;   // 1-based: d(disk[i].center, points[i])
};

WorkingDisks rebuild_disks(const DynSystem& system, const MetricSpec& metric,
                           const std::vector<Point>& points, const RadiusField& r) {
    WorkingDisks w;
    std::size_t n = points.size() - 1;
    w.disk.resize(n + 1);
    w.jump.resize(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        Point c = evaluate(system, points[i - 1]);
        w.disk[i] = {c, r(c)};
        w.jump[i] = distance(metric, c, points[i]);
    }
    return w;
}

} // namespace

DiskChainCertificate build_disk_chain(const DynSystem& system, const MetricSpec& metric,
                                      const Chain& cycle, const RadiusField& r) {
    if (cycle.points.size() < 2)
        throw input_error("build_disk_chain: chain needs at least two points");
    std::vector<Point> points = cycle.points;
    // Cycles that return within floating noise of the start are snapped shut.
    if (!(points.front() == points.back())) {
        if (euclidean(points.front(), points.back()) <= 1e-9)
            points.back() = points.front();
        else
            throw input_error("build_disk_chain: chain must start and end at the same point");
    }
    Chain closed = make_chain(system, metric, points);
    if (!verify_chain(system, metric, closed, ChainNotion::radius_chain(r)).valid)
        throw input_error("build_disk_chain: chain is not valid for the radius notion");
    WorkingDisks w = rebuild_disks(system, metric, points, r);

    long guard = 200000;
    bool scanning = true;
    while (scanning) {
        if (--guard < 0)
            throw construction_failed("build_disk_chain: intersection resolution did not stabilize");
        scanning = false;
        std::size_t n = points.size() - 1;
        for (std::size_t i = 1; i <= n && !scanning; ++i) {
            for (std::size_t j = i + 1; j <= n && !scanning; ++j) {
                Disk& di = w.disk[i];
                Disk& dj = w.disk[j];
                if (same_disk(di, dj)) continue;
                double d = distance(metric, di.center, dj.center);
                if (d >= di.radius + dj.radius) continue;

                bool pj_in = distance(metric, points[j], di.center) < di.radius;
                bool cj_in = distance(metric, dj.center, di.center) < di.radius;
                if (pj_in) {
                    // The chain point re-enters the earlier disk: splice the
                    // middle out; the shortened chain is still radius-valid.
                    points.erase(points.begin() + i, points.begin() + j);
                    w = rebuild_disks(system, metric, points, r);
                    scanning = true;
                } else if (!cj_in) {
                    // Neither marker lies in the overlap: shrink both disks.
                    bool done = false;
                    for (int step = 9; step >= 1; --step) {
                        double lambda = 0.1 * step;
                        if (lambda * (di.radius + dj.radius) <= d &&
                            w.jump[i] < lambda * di.radius && w.jump[j] < lambda * dj.radius) {
                            di.radius *= lambda;
                            dj.radius *= lambda;
                            done = true;
                            break;
                        }
                    }
                    if (!done)
                        throw construction_failed(
                            "build_disk_chain: shrink ladder exhausted on disks " +
                            std::to_string(i) + " and " + std::to_string(j));
                    scanning = true;
                }
                // Remaining case (image of the predecessor lies in the
                // overlap) is resolved after every other pair is settled.
            }
        }
    }

    // Any overlaps left are center-in-overlap pairs: take the maximal first
    // index, then the minimal second index, and return that subcycle.
    std::size_t n = points.size() - 1;
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = i + 1; j <= n; ++j) {
            const Disk& di = w.disk[i];
            const Disk& dj = w.disk[j];
            if (same_disk(di, dj)) continue;
            double d = distance(metric, di.center, dj.center);
            if (d >= di.radius + dj.radius) continue;
            if (distance(metric, dj.center, di.center) < di.radius) {
                if (i > best_i) {
                    best_i = i;
                    best_j = j;
                } else if (i == best_i && (best_j == 0 || j < best_j)) {
                    best_j = j;
                }
            }
        }
    }

    DiskChainCertificate cert;
    if (best_i > 0) {
        // Subcycle U_i, ..., U_{j-1}, U_i with the closing witness p_{j-1}.
        cert.disks.push_back(w.disk[best_i]);
        for (std::size_t k = best_i + 1; k < best_j; ++k) cert.disks.push_back(w.disk[k]);
        cert.disks.push_back(w.disk[best_i]);
        for (std::size_t k = best_i + 1; k < best_j; ++k) {
            cert.witnesses.push_back(points[k - 1]);
            cert.iterates.push_back(1);
        }
        cert.witnesses.push_back(points[best_j - 1]);
        cert.iterates.push_back(1);
    } else {
        // Full cycle: disks[0] = U_0 = U_n.
        cert.disks.push_back(w.disk[n]);
        for (std::size_t i = 1; i <= n; ++i) {
            cert.disks.push_back(w.disk[i]);
            cert.witnesses.push_back(points[i - 1]);
            cert.iterates.push_back(1);
        }
    }
    return cert;
}

DiskChainReport verify_disk_chain(const DynSystem& system, const MetricSpec& metric,
                                  const DiskChainCertificate& cert, int boundary_samples) {
    std::size_t n = cert.steps();
    if (n < 1 || cert.disks.size() != n + 1 || cert.witnesses.size() != n)
        throw input_error("verify_disk_chain: malformed certificate");
    if (!same_disk(cert.disks.front(), cert.disks.back()))
        throw input_error("verify_disk_chain: certificate does not close");
    for (const Disk& d : cert.disks)
        if (!(d.radius > 0.0)) throw input_error("verify_disk_chain: radii must be positive");
    for (int m : cert.iterates)
        if (m < 1) throw input_error("verify_disk_chain: iterate counts must be >= 1");

    DiskChainReport report;
    report.margin_image = std::numeric_limits<double>::infinity();
    report.margin_pairwise = std::numeric_limits<double>::infinity();
    report.image_disjoint = true;
    report.pairwise_ok = true;
    report.witnesses_ok = true;

    // (1) each disk misses its image, by the sampled sufficient margin.
    std::vector<Point> scratch;
    for (std::size_t i = 0; i < n; ++i) {
        bool duplicate = false;
        for (std::size_t k = 0; k < i; ++k)
            if (same_disk(cert.disks[k], cert.disks[i])) duplicate = true;
        if (duplicate) continue;
        double margin = image_disjoint_margin(system, metric, cert.disks[i].center,
                                              cert.disks[i].radius, boundary_samples, scratch);
        report.margin_image = std::min(report.margin_image, margin);
        if (!(margin > kMarginFloor)) {
            report.image_disjoint = false;
            report.failures.push_back("condition (1): disk " + std::to_string(i) +
                                      " margin " + std::to_string(margin));
        }
    }

    // (2) pairwise equal or disjoint, on exact center/radius arithmetic.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Disk& a = cert.disks[i];
            const Disk& b = cert.disks[j];
            if (same_disk(a, b)) continue;
            double gap = distance(metric, a.center, b.center) - (a.radius + b.radius);
            report.margin_pairwise = std::min(report.margin_pairwise, gap);
            if (gap < 0.0) {
                report.pairwise_ok = false;
                report.failures.push_back("condition (2): disks " + std::to_string(i) + " and " +
                                          std::to_string(j) + " overlap by " +
                                          std::to_string(-gap));
            }
        }
    }

    // (3) stored witnesses link consecutive disks under the stated iterates.
    for (std::size_t i = 1; i <= n; ++i) {
        Point a = cert.witnesses[i - 1];
        const Disk& prev = cert.disks[i - 1];
        const Disk& next = cert.disks[i];
        bool ok = distance(metric, a, prev.center) < prev.radius;
        Point q = a;
        for (int k = 0; k < cert.iterates[i - 1]; ++k) q = evaluate(system, q);
        ok = ok && distance(metric, q, next.center) < next.radius;
        if (!ok) {
            report.witnesses_ok = false;
            report.failures.push_back("condition (3): witness for step " + std::to_string(i));
        }
    }

    report.pass = report.image_disjoint && report.pairwise_ok && report.witnesses_ok;
    return report;
}

namespace {

Point displacement_vector(const DynSystem& system, Point p) {
    Point fp = evaluate(system, p);
    return {fp.x - p.x, fp.y - p.y};
}

double checked_norm(Point v) {
    double m = norm(v);
    if (m < 1e-9)
        throw inconclusive_error("winding_number: displacement below 1e-9 on the loop");
    return m;
}

double turn_angle(const DynSystem& system, Point a, Point b, Point da, Point db, int depth) {
    double ang = std::atan2(da.x * db.y - da.y * db.x, da.x * db.x + da.y * db.y);
    if (std::abs(ang) < 0.5 * kPi) return ang;
    if (depth > 48)
        throw inconclusive_error("winding_number: displacement direction did not settle");
    Point mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    Point dm = displacement_vector(system, mid);
    checked_norm(dm);
    return turn_angle(system, a, mid, da, dm, depth + 1) +
           turn_angle(system, mid, b, dm, db, depth + 1);
}

} // namespace

int winding_number(const DynSystem& system, const std::vector<Point>& loop) {
    if (loop.size() < 3) throw input_error("winding_number: loop needs at least 3 vertices");
    std::vector<Point> disp(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
        disp[i] = displacement_vector(system, loop[i]);
        checked_norm(disp[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        std::size_t j = (i + 1) % loop.size();
        total += turn_angle(system, loop[i], loop[j], disp[i], disp[j], 0);
    }
    double k = total / (2.0 * kPi);
    long rounded = std::lround(k);
    if (std::abs(k - rounded) > 0.05)
        throw inconclusive_error("winding_number: accumulated angle is not near a multiple of 2*pi");
    return static_cast<int>(rounded);
}

namespace {

std::optional<Point> sample_below_tol(const DynSystem& system, const Window& box, double tol) {
    const MetricSpec euclid{MetricKind::euclidean, 2};
    for (int iy = 0; iy < 3; ++iy) {
        for (int ix = 0; ix < 3; ++ix) {
            Point p{box.lo.x + box.width() * ix / 2.0, box.lo.y + box.height() * iy / 2.0};
            if (displacement(system, euclid, p) < tol) return p;
        }
    }
    return std::nullopt;
}

double min_sampled_displacement(const DynSystem& system, const Window& box) {
    const MetricSpec euclid{MetricKind::euclidean, 2};
    double best = std::numeric_limits<double>::infinity();
    for (int iy = 0; iy < 3; ++iy)
        for (int ix = 0; ix < 3; ++ix)
            best = std::min(best, displacement(system, euclid,
                                               {box.lo.x + box.width() * ix / 2.0,
                                                box.lo.y + box.height() * iy / 2.0}));
    return best;
}

std::optional<Point> fixed_point_recurse(const DynSystem& system, Window box, double floor_w,
                                         double floor_h, double tol, int depth) {
    if (auto hit = sample_below_tol(system, box, tol)) return hit;
    if (depth > 60 || (box.width() < tol && box.height() < tol)) return std::nullopt;

    double mx = 0.5 * (box.lo.x + box.hi.x);
    double my = 0.5 * (box.lo.y + box.hi.y);
    Window children[4] = {
        {{box.lo.x, box.lo.y}, {mx, my}},
        {{mx, box.lo.y}, {box.hi.x, my}},
        {{box.lo.x, my}, {mx, box.hi.y}},
        {{mx, my}, {box.hi.x, box.hi.y}},
    };

    bool any_winding = false;
    for (const Window& child : children) {
        int w = 0;
        try {
            std::vector<Point> loop{{child.lo.x, child.lo.y},
                                    {child.hi.x, child.lo.y},
                                    {child.hi.x, child.hi.y},
                                    {child.lo.x, child.hi.y}};
            w = winding_number(system, loop);
        } catch (const inconclusive_error&) {
            w = 0;
        }
        if (w != 0) {
            any_winding = true;
            if (auto hit = fixed_point_recurse(system, child, floor_w, floor_h, tol, depth + 1))
                return hit;
        }
    }
    if (any_winding) return std::nullopt;

    // No degree evidence: follow the smallest sampled displacement, but only
    // down to the stated resolution.
    if (box.width() <= floor_w && box.height() <= floor_h) return std::nullopt;
    int best = 0;
    double best_disp = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
        double d = min_sampled_displacement(system, children[k]);
        if (d < best_disp) {
            best_disp = d;
            best = k;
        }
    }
    return fixed_point_recurse(system, children[best], floor_w, floor_h, tol, depth + 1);
}

} // namespace

std::optional<Point> find_fixed_point(const DynSystem& system, Window window, int resolution,
                                      double tol) {
    if (resolution < 1) throw input_error("find_fixed_point: resolution must be >= 1");
    if (!(tol > 0.0)) throw input_error("find_fixed_point: tol must be positive");
    if (system.dimension == 1) {
        window.validate(1);
        double w = window.width() / resolution;
        auto g = [&](double x) { return evaluate(system, {x, 0.0}).x - x; };
        for (int i = 0; i < resolution; ++i) {
            double a = window.lo.x + i * w, b = a + w;
            if (std::abs(g(0.5 * (a + b))) < tol) return Point{0.5 * (a + b), 0.0};
            if (g(a) == 0.0) return Point{a, 0.0};
            if (g(a) * g(b) < 0.0) {
                for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
                    double m = 0.5 * (a + b);
                    (g(a) * g(m) <= 0.0 ? b : a) = m;
                }
                return Point{0.5 * (a + b), 0.0};
            }
        }
        return std::nullopt;
    }
    window.validate(2);
    return fixed_point_recurse(system, window, window.width() / resolution,
                               window.height() / resolution, tol, 0);
}

void write_certificate(std::ostream& out, const DiskChainCertificate& cert) {
    std::size_t n = cert.steps();
    out << "diskchain " << n << "\n";
    char buf[64];
    auto emit = [&](double v, char sep) {
        auto r = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, r.ptr - buf);
        out.put(sep);
    };
    for (std::size_t i = 1; i <= n; ++i) {
        emit(cert.disks[i].center.x, ' ');
        emit(cert.disks[i].center.y, ' ');
        emit(cert.disks[i].radius, ' ');
        out << cert.iterates[i - 1] << ' ';
        emit(cert.witnesses[i - 1].x, ' ');
        emit(cert.witnesses[i - 1].y, '\n');
    }
}

DiskChainCertificate read_certificate(std::istream& in) {
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "diskchain" || n < 1)
        throw input_error("read_certificate: expected 'diskchain n' header");
    DiskChainCertificate cert;
    cert.disks.resize(n + 1);
    cert.iterates.resize(n);
    cert.witnesses.resize(n);
    for (std::size_t i = 1; i <= n; ++i) {
        Disk d;
        int m = 0;
        Point wpt;
        if (!(in >> d.center.x >> d.center.y >> d.radius >> m >> wpt.x >> wpt.y))
            throw input_error("read_certificate: truncated disk line");
        cert.disks[i] = d;
        cert.iterates[i - 1] = m;
        cert.witnesses[i - 1] = wpt;
    }
    cert.disks[0] = cert.disks[n];
    return cert;
}

} // namespace chainrec
