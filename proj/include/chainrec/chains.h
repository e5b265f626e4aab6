#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "chainrec/geometry.h"
#include "chainrec/radius_field.h"
#include "chainrec/systems.h"

namespace chainrec {

/// A finite pseudo-orbit: n+1 points (n >= 1) and the n jump costs
/// jump_costs[i-1] = d(f(points[i-1]), points[i]).
struct Chain {
    std::vector<Point> points;
    std::vector<double> jump_costs;

    std::size_t steps() const { return jump_costs.size(); }
};

/// Builds a chain from its points, computing the jump costs.
Chain make_chain(const DynSystem& system, const MetricSpec& metric, std::vector<Point> points);

enum class NotionKind { eps, strong, radius, restricted };

/// Which jumps a chain may make. eps: every jump < eps. strong: total jump
/// < eps. radius: jump_i < r(f(points[i-1])). restricted: every jump < eps and
/// jumps only where the image lies in W (elsewhere the chain follows f exactly).
struct ChainNotion {
    NotionKind kind = NotionKind::eps;
    double eps = 0.0;
    RadiusField radius;
    RestrictionSet restriction;

    static ChainNotion eps_chain(double eps);
    static ChainNotion strong_chain(double eps);
    static ChainNotion radius_chain(RadiusField r);
    static ChainNotion restricted_chain(RestrictionSet w, double eps);
};

struct ChainReport {
    bool valid = false;
    double max_jump = 0.0;
    double total_jump = 0.0;
    std::optional<std::size_t> first_violation;   // 1-based step index
};

/// Checks a chain against a notion, recomputing every jump from the system.
/// Jump admissibility is strict; equality counts as a violation.
ChainReport verify_chain(const DynSystem& system, const MetricSpec& metric, const Chain& chain,
                         const ChainNotion& notion);

/// The explicit eps-chain from any point back to itself for the exponential
/// shear: descend right until the shear is small, walk left past the start,
/// ascend right, and close with a final sub-eps jump. All jumps are < eps.
Chain build_translation_exp_chain(Point start, double eps);

/// The explicit radius-field chain from (0, h) back to itself for the
/// semicircle time-one map: hop onto a circle of the right family, ride it to
/// the x-axis, walk the fixed axis back toward the origin in sub-r steps,
/// hop onto the y-axis, and ride the flow ladder back up to the start.
Chain build_semicircle_tcr_chain(Point start, const RadiusField& r,
                                 std::size_t max_points = 60'000'000);

// Line-oriented text format: one point per line, coordinates space-separated,
// '#' starts a comment.
void write_chain(std::ostream& out, const Chain& chain, int dimension);
std::vector<Point> read_chain_points(std::istream& in, int dimension);

} // namespace chainrec
