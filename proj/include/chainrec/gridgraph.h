#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "chainrec/chains.h"
#include "chainrec/geometry.h"
#include "chainrec/systems.h"

namespace chainrec {

/// Deterministic half-open partition of a window into boxes.
struct BoxGrid {
    Window window;
    int dimension = 2;
    int nx = 0, ny = 0;
    double wx = 0.0, wy = 0.0;

    int count() const { return nx * ny; }
    int ix_of(int box) const { return box % nx; }
    int iy_of(int box) const { return box / nx; }

    /// Box containing p, or -1 if p is outside the half-open window.
    int index_of(Point p) const;
    Point center(int box) const;
    Point corner(int box) const;
    /// Nearest point of the closed box to q.
    Point clamp_into(int box, Point q) const;
    /// Euclidean diagonal of one box.
    double diameter() const;
};

BoxGrid build_grid(Window window, int nx, int ny, int dimension = 2);

enum class GraphMode { sampled, lipschitz_inflated };

struct GraphEdge {
    int to = -1;
    double weight = 0.0;
};

/// Weighted box-transition graph. Edge weights are lower-bound estimates of
/// inf{d(f(a), b) : a in B, b in B'}; in lipschitz_inflated mode the sampled
/// estimate is deflated by (L_B + 1) * diam(B) / 2 so that it never exceeds
/// the true infimum and no-cycle conclusions are sound within the window.
/// Edges are enumerated on demand from the stored sample images; edges whose
/// sampled jump reaches the cutoff are dropped.
class TransitionGraph {
public:
    const BoxGrid& grid() const { return grid_; }
    const DynSystem& system() const { return system_; }
    const MetricSpec& metric() const { return metric_; }
    GraphMode mode() const { return mode_; }
    int samples_per_axis() const { return samples_k_; }
    double sampled_cutoff() const { return cutoff_; }
    void set_sampled_cutoff(double cutoff) { cutoff_ = cutoff; }

    /// Covering radius of the per-box sample lattice.
    double covering_radius() const;
    /// Weight deflation applied to box B's outgoing sampled distances:
    /// (kappa * L_B + 1) * covering_radius, which dominates the sampling gap.
    double inflation_slop(int box) const;
    double box_lipschitz(int box) const { return lipschitz_.empty() ? 1.0 : lipschitz_[box]; }

    /// Sample images of box `from` (samples_per_axis^dim points).
    const Point* images_of(int from) const;
    int images_count() const;

    /// Enumerates edges from `from` whose weight is < weight_limit (and whose
    /// sampled distance is below the cutoff), in ascending target order.
    void for_each_edge(int from, double weight_limit,
                       const std::function<void(GraphEdge)>& fn) const;
    std::vector<GraphEdge> edges(int from, double weight_limit =
                                               std::numeric_limits<double>::infinity()) const;

    friend TransitionGraph build_transition_graph(const DynSystem&, const MetricSpec&,
                                                  const BoxGrid&, int, GraphMode, double, int);

private:
    // Candidate target boxes within sampled distance `limit` of image q,
    // appended as per-row index ranges {row, first_ix, last_ix}.
    void candidates_for(Point q, Point q_embed, double limit,
                        std::vector<std::array<int, 3>>& out) const;
    double sampled_point_box(Point q, Point q_embed, int box) const;

    BoxGrid grid_;
    DynSystem system_;
    MetricSpec metric_;
    GraphMode mode_ = GraphMode::sampled;
    int samples_k_ = 3;
    double cutoff_ = std::numeric_limits<double>::infinity();
    double kappa_ = 1.0;   // metric factor relating euclidean moves to d-moves
    std::vector<Point> images_;          // box-major sample images
    std::vector<Point> image_embeds_;    // circle metric only
    std::vector<double> lipschitz_;      // per box, inflated mode only
    std::vector<Point> node_embeds_;     // circle metric: embedded box endpoints
};

/// Samples every box of the grid (sub-lattice including corners when the
/// per-axis count exceeds one) and records what is needed to enumerate edges.
/// workers = 0 uses the hardware concurrency; the result is deterministic.
TransitionGraph build_transition_graph(const DynSystem& system, const MetricSpec& metric,
                                       const BoxGrid& grid, int samples_per_box, GraphMode mode,
                                       double sampled_cutoff =
                                           std::numeric_limits<double>::infinity(),
                                       int workers = 0);

struct SearchOutcome {
    enum class Status { no_path, found, refine_failed };
    Status status = Status::no_path;
    std::optional<Chain> chain;
    double cost = std::numeric_limits<double>::infinity();
};

/// Searches the box graph for a notion-admissible path from `from` to `to`
/// (a nontrivial cycle when they coincide), refines the box path to a point
/// chain, and re-verifies it against the real map before returning it.
SearchOutcome find_chain_detailed(const TransitionGraph& graph, Point from, Point to,
                                  const ChainNotion& notion);
std::optional<Chain> find_chain(const TransitionGraph& graph, Point from, Point to,
                                const ChainNotion& notion);

enum class VerdictLabel { certified_yes, certified_no, likely_no, unknown };
const char* to_string(VerdictLabel label);

/// The finite answer to "is there a chain from p back to p": a verified
/// witness, a window-relative certified absence (outer approximation), a
/// sampled-mode likely absence, or unknown when witness refinement fails.
struct Verdict {
    VerdictLabel label = VerdictLabel::unknown;
    std::optional<Chain> witness;
    double eps_threshold = std::numeric_limits<double>::quiet_NaN();
    GraphMode mode = GraphMode::sampled;
    bool window_relative = false;
    std::string notes;
};

Verdict classify_recurrence(const DynSystem& system, const MetricSpec& metric, Point point,
                            const ChainNotion& notion, Window window, int nx, int ny,
                            GraphMode mode, int samples_per_box = 9, int workers = 0);

/// Debug dump: one "src dst weight" line per edge within the cutoff.
void export_edges(std::ostream& out, const TransitionGraph& graph);

} // namespace chainrec
