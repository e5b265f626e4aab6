#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "chainrec/gridgraph.h"

using namespace chainrec;

namespace {
const MetricSpec kEuclid{MetricKind::euclidean, 2};
const MetricSpec kEuclid1{MetricKind::euclidean, 1};
const MetricSpec kCircle{MetricKind::circle_induced, 1};
constexpr double kPi = 3.14159265358979323846;
} // namespace

TEST_CASE("build_grid partitions as stated") {
    BoxGrid g = build_grid({{0, 0}, {1, 1}}, 2, 2);
    CHECK(g.count() == 4);
    CHECK(g.wx == doctest::Approx(0.5));
    CHECK(g.wy == doctest::Approx(0.5));

    BoxGrid one = build_grid({{0, 0}, {1, 1}}, 1, 1);
    CHECK(one.count() == 1);

    BoxGrid rect = build_grid({{-5, -3}, {5, 1}}, 100, 40);
    CHECK(rect.wx == doctest::Approx(0.1));
    CHECK(rect.wy == doctest::Approx(0.1));

    CHECK_THROWS_AS(build_grid({{0, 0}, {0, 1}}, 2, 2), input_error);
    CHECK_THROWS_AS(build_grid({{0, 0}, {1, 1}}, 0, 2), input_error);
}

TEST_CASE("every window point lies in exactly one box") {
    BoxGrid g = build_grid({{-1, -1}, {2, 3}}, 7, 5);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-1.0, 2.0), uy(-1.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        Point p{ux(rng), uy(rng)};
        int idx = g.index_of(p);
        REQUIRE(idx >= 0);
        Point lo = g.corner(idx);
        CHECK(p.x >= lo.x);
        CHECK(p.x < lo.x + g.wx + 1e-12);
        CHECK(p.y >= lo.y);
        CHECK(p.y < lo.y + g.wy + 1e-12);
    }
    CHECK(g.index_of({2, 0}) == -1);   // half-open at the top faces
}

TEST_CASE("identity graph has zero-weight self-edges") {
    BoxGrid g = build_grid({{0, 0}, {1, 1}}, 4, 4);
    TransitionGraph graph =
        build_transition_graph(make_identity(), kEuclid, g, 9, GraphMode::sampled, 2.0);
    for (int b = 0; b < g.count(); ++b) {
        bool self = false;
        for (GraphEdge e : graph.edges(b, 0.5))
            if (e.to == b && e.weight == 0.0) self = true;
        CHECK(self);
    }
}

TEST_CASE("unit translation on unit boxes steps one box right at weight zero") {
    BoxGrid g = build_grid({{0, 0}, {6, 1}}, 6, 1);
    TransitionGraph graph =
        build_transition_graph(make_translation(1.0, 0.0), kEuclid, g, 9, GraphMode::sampled, 3.0);
    for (int b = 0; b + 1 < 6; ++b) {
        bool found = false;
        for (GraphEdge e : graph.edges(b, 0.5))
            if (e.to == b + 1 && e.weight == 0.0) found = true;
        CHECK(found);
    }
}

TEST_CASE("translation_exp graph connects the box of the origin to the box of its image") {
    BoxGrid g = build_grid({{-1, -2}, {3, 1}}, 40, 30);
    TransitionGraph graph =
        build_transition_graph(make_translation_exp(), kEuclid, g, 9, GraphMode::sampled, 1.0);
    int from = g.index_of({0, 0});
    int to = g.index_of({1, 0});
    REQUIRE(from >= 0);
    REQUIRE(to >= 0);
    bool found = false;
    for (GraphEdge e : graph.edges(from, 0.5))
        if (e.to == to && e.weight == 0.0) found = true;
    CHECK(found);
}

TEST_CASE("graph build is deterministic across worker counts") {
    BoxGrid g = build_grid({{-1, -1}, {1, 1}}, 20, 20);
    TransitionGraph a = build_transition_graph(make_translation_exp(), kEuclid, g, 9,
                                               GraphMode::sampled, 1.0, 1);
    TransitionGraph b = build_transition_graph(make_translation_exp(), kEuclid, g, 9,
                                               GraphMode::sampled, 1.0, 2);
    for (int box : {0, 57, 200, 399}) {
        auto ea = a.edges(box, 0.7), eb = b.edges(box, 0.7);
        REQUIRE(ea.size() == eb.size());
        for (std::size_t i = 0; i < ea.size(); ++i) {
            CHECK(ea[i].to == eb[i].to);
            CHECK(ea[i].weight == eb[i].weight);
        }
    }
}

TEST_CASE("inflated mode needs Lipschitz data and deflates weights") {
    BoxGrid g = build_grid({{0, 0}, {1, 1}}, 4, 4);
    DynSystem no_lip = make_identity();
    no_lip.local_lipschitz = nullptr;
    CHECK_THROWS_AS(
        build_transition_graph(no_lip, kEuclid, g, 9, GraphMode::lipschitz_inflated, 1.0),
        config_error);

    TransitionGraph sam =
        build_transition_graph(make_identity(), kEuclid, g, 9, GraphMode::sampled, 1.0);
    TransitionGraph inf = build_transition_graph(make_identity(), kEuclid, g, 9,
                                                 GraphMode::lipschitz_inflated, 1.0);
    auto es = sam.edges(5, 0.8);
    auto ei = inf.edges(5, 0.8);
    for (GraphEdge e : ei) {
        for (GraphEdge s : es)
            if (s.to == e.to) CHECK(e.weight <= s.weight + 1e-15);
    }
    // L = 1 and a 3x3 lattice: (1*1 + 1) * diam / (2*(3-1))
    CHECK(inf.inflation_slop(5) == doctest::Approx(2.0 * g.diameter() / 4.0));
}

TEST_CASE("find_chain: identity cycles in place at zero cost") {
    BoxGrid g = build_grid({{0, 0}, {1, 1}}, 8, 8);
    TransitionGraph graph =
        build_transition_graph(make_identity(), kEuclid, g, 9, GraphMode::sampled, 0.1);
    auto chain = find_chain(graph, {0.5, 0.5}, {0.5, 0.5}, ChainNotion::strong_chain(0.01));
    REQUIRE(chain.has_value());
    CHECK(verify_chain(graph.system(), kEuclid, *chain, ChainNotion::strong_chain(0.01)).valid);
    CHECK(chain->points.size() == 2);
    CHECK(chain->jump_costs[0] == 0.0);
}

TEST_CASE("find_chain: no strong(0.4) return for the contraction, per the analytic bound") {
    // Independent oracle 1 (analytic): |p_n| <= |p_0|/2^n + sum eps_i, so a
    // return to |p| = 1 forces sum eps_i >= 1 - 2^-n >= 1/2 > 0.4.
    // Independent oracle 2 (brute force): an explicit O(V^2) Dijkstra over a
    // directly sampled box graph, coded separately from the library path.
    DynSystem ch = make_contraction_half();
    Window w{{-1.5, -1.5}, {1.5, 1.5}};
    const int n = 40;
    BoxGrid g = build_grid(w, n, n);

    std::vector<double> dist(g.count(), 1e300);
    std::vector<char> done(g.count(), 0);
    int src = g.index_of({1, 0});
    auto edge_w = [&](int a, int b) {
        double best = 1e300;
        for (int sy = 0; sy < 3; ++sy)
            for (int sx = 0; sx < 3; ++sx) {
                Point lo = g.corner(a);
                Point p{lo.x + g.wx * sx / 2.0, lo.y + g.wy * sy / 2.0};
                Point img = evaluate(ch, p);
                best = std::min(best, euclidean(img, g.clamp_into(b, img)));
            }
        return best;
    };
    double best_cycle = 1e300;
    for (int b = 0; b < g.count(); ++b) {
        double wgt = edge_w(src, b);
        if (b == src) best_cycle = std::min(best_cycle, wgt);
        else dist[b] = std::min(dist[b], wgt);
    }
    for (;;) {
        int u = -1;
        for (int b = 0; b < g.count(); ++b)
            if (!done[b] && dist[b] < 1e300 && (u < 0 || dist[b] < dist[u])) u = b;
        if (u < 0 || dist[u] >= best_cycle || dist[u] >= 0.4) break;
        done[u] = 1;
        for (int b = 0; b < g.count(); ++b) {
            double c = dist[u] + edge_w(u, b);
            if (b == src) best_cycle = std::min(best_cycle, c);
            else dist[b] = std::min(dist[b], c);
        }
    }
    CHECK(best_cycle >= 0.4);   // brute force agrees with the analytic bound

    TransitionGraph graph = build_transition_graph(ch, kEuclid, g, 9, GraphMode::sampled, 0.8);
    CHECK(!find_chain(graph, {1, 0}, {1, 0}, ChainNotion::strong_chain(0.4)).has_value());
}

TEST_CASE("find_chain: the exponential shear cycles through the window at eps 0.5") {
    BoxGrid g = build_grid({{-1, -2}, {3, 1}}, 200, 150);
    TransitionGraph graph =
        build_transition_graph(make_translation_exp(), kEuclid, g, 9, GraphMode::sampled, 1.0);
    auto chain = find_chain(graph, {0, 0}, {0, 0}, ChainNotion::eps_chain(0.5));
    REQUIRE(chain.has_value());
    ChainReport r = verify_chain(graph.system(), kEuclid, *chain, ChainNotion::eps_chain(0.5));
    CHECK(r.valid);
    CHECK(r.max_jump < 0.5);
    CHECK(chain->points.front() == Point{0, 0});
    CHECK(chain->points.back() == Point{0, 0});
}

TEST_CASE("find_chain monotonicity in eps on a fixed graph") {
    BoxGrid g = build_grid({{-1, -2}, {3, 1}}, 100, 75);
    TransitionGraph graph =
        build_transition_graph(make_translation_exp(), kEuclid, g, 9, GraphMode::sampled, 2.0);
    bool found_03 = find_chain(graph, {0, 0}, {0, 0}, ChainNotion::eps_chain(0.3)).has_value();
    if (found_03) {
        CHECK(find_chain(graph, {0, 0}, {0, 0}, ChainNotion::eps_chain(0.5)).has_value());
        CHECK(find_chain(graph, {0, 0}, {0, 0}, ChainNotion::eps_chain(0.8)).has_value());
    }
    CHECK(find_chain(graph, {0, 0}, {0, 0}, ChainNotion::eps_chain(0.5)).has_value());
}

TEST_CASE("eps and constant-radius searches agree on random queries") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> eps_d(0.05, 0.6);
    std::vector<DynSystem> systems{make_translation_exp(), make_rotation(2.0 * kPi / 5.0),
                                   make_contraction_half(), make_identity()};
    Window w{{-2, -2}, {2, 2}};
    BoxGrid g = build_grid(w, 40, 40);
    for (const DynSystem& s : systems) {
        TransitionGraph graph = build_transition_graph(s, kEuclid, g, 9, GraphMode::sampled, 1.4);
        std::uniform_real_distribution<double> coord(-1.9, 1.9);
        for (int i = 0; i < 6; ++i) {
            double eps = eps_d(rng);
            Point p{coord(rng), coord(rng)};
            bool as_eps = find_chain(graph, p, p, ChainNotion::eps_chain(eps)).has_value();
            bool as_radius =
                find_chain(graph, p, p, ChainNotion::radius_chain(RadiusField::constant(eps)))
                    .has_value();
            CHECK(as_eps == as_radius);
        }
    }
}

TEST_CASE("classify: identity is certified recurrent everywhere") {
    Verdict v = classify_recurrence(make_identity(), kEuclid, {0.3, 0.7},
                                    ChainNotion::eps_chain(0.1), {{0, 0}, {1, 1}}, 10, 10,
                                    GraphMode::lipschitz_inflated);
    CHECK(v.label == VerdictLabel::certified_yes);
    REQUIRE(v.witness.has_value());
    CHECK(verify_chain(make_identity(), kEuclid, *v.witness, ChainNotion::eps_chain(0.1)).valid);
}

TEST_CASE("classify: the exponential shear is certified recurrent at eps 0.5") {
    Verdict v = classify_recurrence(make_translation_exp(), kEuclid, {0, 0},
                                    ChainNotion::eps_chain(0.5), {{-1, -2}, {3, 1}}, 200, 150,
                                    GraphMode::sampled);
    CHECK(v.label == VerdictLabel::certified_yes);
    REQUIRE(v.witness.has_value());
}

TEST_CASE("classify on the line: metric changes the verdict") {
    DynSystem lt = make_line_translation();
    Window w{{-50, 0}, {50, 0}};

    Verdict no = classify_recurrence(lt, kEuclid1, {0, 0}, ChainNotion::eps_chain(0.5), w, 512, 1,
                                     GraphMode::lipschitz_inflated);
    CHECK(no.label == VerdictLabel::certified_no);
    CHECK(no.window_relative);

    Verdict yes = classify_recurrence(lt, kCircle, {0, 0}, ChainNotion::eps_chain(0.5), w, 512, 1,
                                      GraphMode::lipschitz_inflated);
    CHECK(yes.label == VerdictLabel::certified_yes);
    REQUIRE(yes.witness.has_value());
    CHECK(verify_chain(lt, kCircle, *yes.witness, ChainNotion::eps_chain(0.5)).valid);
}

TEST_CASE("certified-no refinement monotonicity: smaller eps stays certified-no") {
    DynSystem lt = make_line_translation();
    Window w{{-20, 0}, {20, 0}};
    for (double eps : {0.5, 0.3, 0.1}) {
        Verdict v = classify_recurrence(lt, kEuclid1, {0, 0}, ChainNotion::eps_chain(eps), w, 256,
                                        1, GraphMode::lipschitz_inflated);
        CHECK(v.label == VerdictLabel::certified_no);
    }
}

TEST_CASE("classify restricted: the rotation orbit is recurrent inside its disk") {
    DynSystem rot = make_rotation(2.0 * kPi / 5.0);
    RestrictionSet disk = RestrictionSet::make_disk({0, 0}, 2.0);
    Verdict v = classify_recurrence(rot, kEuclid, {1, 0},
                                    ChainNotion::restricted_chain(disk, 0.2), {{-2, -2}, {2, 2}},
                                    100, 100, GraphMode::sampled);
    CHECK(v.label == VerdictLabel::certified_yes);
    REQUIRE(v.witness.has_value());
    CHECK(verify_chain(rot, kEuclid, *v.witness, ChainNotion::restricted_chain(disk, 0.2)).valid);
}

TEST_CASE("restricted-for-all-eps implies radius-recurrent (verdict level)") {
    // When the restricted verdict stays CertifiedYes down a decreasing eps
    // ladder, the radius verdict is CertifiedYes for every tested field.
    DynSystem rot = make_rotation(2.0 * kPi / 5.0);
    RestrictionSet disk = RestrictionSet::make_disk({0, 0}, 2.0);
    Window w{{-2, -2}, {2, 2}};
    bool all_restricted_yes = true;
    for (double eps : {0.2, 0.1, 0.05}) {
        Verdict v = classify_recurrence(rot, kEuclid, {1, 0},
                                        ChainNotion::restricted_chain(disk, eps), w, 100, 100,
                                        GraphMode::sampled);
        all_restricted_yes = all_restricted_yes && v.label == VerdictLabel::certified_yes;
    }
    REQUIRE(all_restricted_yes);
    std::vector<RadiusField> fields{
        RadiusField::constant(0.2), RadiusField::constant(0.1),
        RadiusField::closed_form(
            [](Point p) { return 0.5 / (1.0 + p.x * p.x + p.y * p.y); }, 0.33, "invsq:0.5")};
    for (const RadiusField& r : fields) {
        Verdict v = classify_recurrence(rot, kEuclid, {1, 0}, ChainNotion::radius_chain(r), w,
                                        100, 100, GraphMode::sampled);
        CHECK(v.label == VerdictLabel::certified_yes);
        REQUIRE(v.witness.has_value());
        CHECK(verify_chain(rot, kEuclid, *v.witness, ChainNotion::radius_chain(r)).valid);
    }
}

TEST_CASE("inflated admissibility contains sampled admissibility") {
    // Deflated weights are pointwise no larger, so any chain the sampled
    // graph finds must also exist in the outer approximation.
    BoxGrid g = build_grid({{-1, -2}, {3, 1}}, 100, 75);
    DynSystem te = make_translation_exp();
    TransitionGraph sam = build_transition_graph(te, kEuclid, g, 9, GraphMode::sampled, 1.2);
    TransitionGraph inf =
        build_transition_graph(te, kEuclid, g, 9, GraphMode::lipschitz_inflated, 1.2);
    for (double eps : {0.4, 0.5, 0.7}) {
        if (find_chain(sam, {0, 0}, {0, 0}, ChainNotion::eps_chain(eps)).has_value())
            CHECK(find_chain(inf, {0, 0}, {0, 0}, ChainNotion::eps_chain(eps)).has_value());
    }
}

TEST_CASE("inflated weights never exceed densely sampled infima") {
    // Outer-approximation soundness: the deflated weight is a lower bound on
    // the finely sampled infimum of d(f(a), B') over the source box.
    DynSystem te = make_translation_exp();
    BoxGrid g = build_grid({{-1, -1}, {1, 1}}, 10, 10);
    TransitionGraph graph =
        build_transition_graph(te, kEuclid, g, 9, GraphMode::lipschitz_inflated, 2.0);
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> pick(0, g.count() - 1);
    for (int trial = 0; trial < 12; ++trial) {
        int b = pick(rng);
        for (GraphEdge e : graph.edges(b, 1.0)) {
            double dense = 1e300;
            Point lo = g.corner(b);
            for (int iy = 0; iy < 25; ++iy)
                for (int ix = 0; ix < 25; ++ix) {
                    Point a{lo.x + g.wx * ix / 24.0, lo.y + g.wy * iy / 24.0};
                    Point img = evaluate(te, a);
                    dense = std::min(dense, euclidean(img, g.clamp_into(e.to, img)));
                }
            CHECK(e.weight <= dense + 1e-12);
        }
    }
}

TEST_CASE("edge export is line oriented") {
    BoxGrid g = build_grid({{0, 0}, {1, 1}}, 2, 2);
    TransitionGraph graph =
        build_transition_graph(make_identity(), kEuclid, g, 4, GraphMode::sampled, 0.3);
    std::ostringstream os;
    export_edges(os, graph);
    std::istringstream is(os.str());
    int src, dst;
    double wgt;
    int rows = 0;
    while (is >> src >> dst >> wgt) {
        CHECK(src >= 0);
        CHECK(src < 4);
        CHECK(dst >= 0);
        CHECK(dst < 4);
        CHECK(wgt >= 0.0);
        ++rows;
    }
    CHECK(rows >= 4);   // at least the self-edges
}

TEST_CASE("find_chain rejects endpoints outside the window") {
    BoxGrid g = build_grid({{0, 0}, {1, 1}}, 4, 4);
    TransitionGraph graph =
        build_transition_graph(make_identity(), kEuclid, g, 4, GraphMode::sampled, 0.3);
    CHECK_THROWS_AS(find_chain(graph, {2, 2}, {0.5, 0.5}, ChainNotion::eps_chain(0.1)),
                    input_error);
}
