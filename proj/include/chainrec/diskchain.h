#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chainrec/chains.h"
#include "chainrec/geometry.h"
#include "chainrec/radius_field.h"
#include "chainrec/systems.h"

namespace chainrec {

struct Disk {
    Point center;
    double radius = 0.0;
};

inline bool same_disk(const Disk& a, const Disk& b) {
    return a.center == b.center && a.radius == b.radius;
}

/// A periodic disk chain certificate: disks[0] == disks[n], each disk disjoint
/// from its image, pairwise equal-or-disjoint, and for each step a witness
/// a_i in U_{i-1} whose m_{i-1}-th image lands in U_i.
struct DiskChainCertificate {
    std::vector<Disk> disks;        // n+1 entries, first == last
    std::vector<int> iterates;      // n entries, all >= 1
    std::vector<Point> witnesses;   // n entries

    std::size_t steps() const { return iterates.size(); }
};

struct DisjointnessReport {
    bool ok = false;
    double worst_margin = 0.0;
    Point worst_point{};
};

/// Sufficient sampled test that every slice B(p, r(p)) misses its own image:
/// margin(p) = d(f(p), p) - r(p) - sup_a d(f(a), f(p)) over ball samples a.
/// Margins at or below 1e-9 count as failures.
DisjointnessReport check_disjointness(const DynSystem& system, const MetricSpec& metric,
                                      const RadiusField& r, Window window, int samples_per_axis,
                                      const std::optional<Window>& exclude = std::nullopt);

/// Builds a 1-Lipschitz positive radius field r with B(p, r(p)) disjoint from
/// its image: the envelope of safety * displacement / (1 + L) on the grid
/// nodes, validated by check_disjointness (halving safety up to 5 times).
/// Nodes inside `exclude` are skipped, which carves out e.g. an annulus.
RadiusField fixed_point_free_radius(const DynSystem& system, const MetricSpec& metric,
                                    Window window, int nx, int ny, double safety = 1.0 / 3.0,
                                    const std::optional<Window>& exclude = std::nullopt);

/// Turns a radius-valid cycle into a periodic disk chain: disks are the
/// slices at the image points; intersections are resolved by shrinking both
/// disks, splicing the chain, or taking a subcycle; all iterate counts are 1.
DiskChainCertificate build_disk_chain(const DynSystem& system, const MetricSpec& metric,
                                      const Chain& cycle, const RadiusField& r);

struct DiskChainReport {
    bool pass = false;
    bool image_disjoint = false;    // condition (1)
    bool pairwise_ok = false;       // condition (2), exact geometry
    bool witnesses_ok = false;      // condition (3)
    double margin_image = 0.0;      // min condition-(1) margin
    double margin_pairwise = 0.0;   // min d(centers) - (r_i + r_j) over distinct pairs
    std::vector<std::string> failures;
};

DiskChainReport verify_disk_chain(const DynSystem& system, const MetricSpec& metric,
                                  const DiskChainCertificate& cert, int boundary_samples = 64);

/// Degree of p -> f(p) - p around a closed polygon, with adaptive edge
/// refinement until the displacement turns less than pi/2 per segment.
/// Nonzero degree implies a fixed point inside the loop.
int winding_number(const DynSystem& system, const std::vector<Point>& loop);

/// Recursive subdivision fixed point search: boxes with nonzero boundary
/// winding are refined without a depth floor; otherwise the minimum-
/// displacement box is refined down to the resolution floor. Returns a point
/// with displacement < tol, or nothing (absence is window-relative).
std::optional<Point> find_fixed_point(const DynSystem& system, Window window, int resolution,
                                      double tol);

// Certificate text format: header "diskchain n", then n lines
// "cx cy r m witness_x witness_y" for steps 1..n (disk 0 repeats disk n).
void write_certificate(std::ostream& out, const DiskChainCertificate& cert);
DiskChainCertificate read_certificate(std::istream& in);

} // namespace chainrec
