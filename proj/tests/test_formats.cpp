#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chainrec/cli_app.h"
#include "chainrec/diskchain.h"
#include "chainrec/expr.h"
#include "chainrec/svgplot.h"

using namespace chainrec;

namespace {
const MetricSpec kEuclid{MetricKind::euclidean, 2};
constexpr double kPi = 3.14159265358979323846;

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/chainrec_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};
} // namespace

TEST_CASE("expression parser evaluates the grammar") {
    CHECK(Expression::parse("x + exp(y)")(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(Expression::parse("2 * x ^ 2 - y")(3.0, 1.0) == doctest::Approx(17.0));
    CHECK(Expression::parse("-x + min(y, 1)")(2.0, 5.0) == doctest::Approx(-1.0));
    CHECK(Expression::parse("atan2(y, x)")(1.0, 1.0) == doctest::Approx(kPi / 4.0));
    CHECK(Expression::parse("pi")(0, 0) == doctest::Approx(kPi));
    CHECK(Expression::parse("hypot(x, y)")(3.0, 4.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(Expression::parse("x +"), config_error);
    CHECK_THROWS_AS(Expression::parse("frob(x)"), config_error);
    CHECK_THROWS_AS(Expression::parse("x 2"), config_error);
}

TEST_CASE("inline expression systems evaluate like built-ins") {
    RunConfig cfg;
    InlineSystem in;
    in.name = "shear";
    in.dimension = 2;
    in.fx = "x + exp(y)";
    in.fy = "y";
    cfg.inline_system = in;
    DynSystem s = resolve_system(cfg);
    Point q = evaluate(s, {0, 0});
    CHECK(q.x == doctest::Approx(1.0));
    CHECK(q.y == 0.0);
    CHECK(s.has_lipschitz());
    CHECK(s.local_lipschitz({0, 0}, 0.1) > 0.9);
}

TEST_CASE("config json: unknown keys are errors, known keys land") {
    RunConfig cfg;
    apply_config_json(cfg, R"({
        "system": "semicircle",
        "metric": "euclidean",
        "window": [-6, 6, -1, 6],
        "grid": [240, 140],
        "notion": "restricted",
        "restrict": "disk:0,0,2",
        "eps": [0.01],
        "mode": "lipschitz",
        "points": [[0, 1]]
    })");
    CHECK(cfg.system_name == "semicircle");
    CHECK(cfg.nx == 240);
    CHECK(cfg.ny == 140);
    CHECK(cfg.notion_name == "restricted");
    CHECK(cfg.eps_values.size() == 1);
    REQUIRE(cfg.points.size() == 1);
    CHECK(cfg.points[0] == Point{0, 1});

    RunConfig bad;
    CHECK_THROWS_AS(apply_config_json(bad, R"({"grdi": [2, 2]})"), config_error);
    CHECK_THROWS_AS(apply_config_json(bad, R"({"system": {"fx": "x", "frobs": 1}})"),
                    config_error);
}

TEST_CASE("spec-string parsers") {
    MetricSpec m = parse_metric("circle", 1);
    CHECK(m.kind == MetricKind::circle_induced);
    CHECK_THROWS_AS(parse_metric("circle", 2), config_error);
    CHECK_THROWS_AS(parse_metric("taxicab", 2), config_error);

    Window w = parse_window("-1,3,-2,1", 2);
    CHECK(w.lo == Point{-1, -2});
    CHECK(w.hi == Point{3, 1});
    CHECK_THROWS_AS(parse_window("3,-1,0,1", 2), input_error);

    RestrictionSet disk = parse_restriction("disk:0,0,2");
    CHECK(disk.contains({1.9, 0}));
    RestrictionSet box = parse_restriction("box:-1,1,-1,1");
    CHECK(box.contains({0.5, 0.5}));
    CHECK_THROWS_AS(parse_restriction("ball:1,2,3"), config_error);

    RadiusField cf = parse_radius_field("const:0.2");
    CHECK(cf({5, 5}) == doctest::Approx(0.2));
    RadiusField iv = parse_radius_field("invsq:0.1");
    CHECK(iv({0, 0}) == doctest::Approx(0.1));
    CHECK(iv({1, 0}) == doctest::Approx(0.05));
    CHECK_THROWS_AS(parse_radius_field("const:-1"), config_error);
}

TEST_CASE("certificate text format round-trips bit-exactly") {
    DynSystem rot = make_rotation(2.0 * kPi / 5.0);
    std::vector<Point> pts{{1, 0}};
    Point p{1, 0};
    for (int i = 0; i < 5; ++i) {
        p = evaluate(rot, p);
        pts.push_back(p);
    }
    Chain orbit = make_chain(rot, kEuclid, pts);
    DiskChainCertificate cert =
        build_disk_chain(rot, kEuclid, orbit, RadiusField::constant(0.1));

    std::stringstream ss;
    write_certificate(ss, cert);
    DiskChainCertificate back = read_certificate(ss);
    REQUIRE(back.disks.size() == cert.disks.size());
    for (std::size_t i = 0; i < cert.disks.size(); ++i) {
        CHECK(back.disks[i].center == cert.disks[i].center);
        CHECK(back.disks[i].radius == cert.disks[i].radius);
    }
    for (std::size_t i = 0; i < cert.steps(); ++i) {
        CHECK(back.iterates[i] == cert.iterates[i]);
        CHECK(back.witnesses[i] == cert.witnesses[i]);
    }

    // a second write of the parsed certificate is byte-identical
    std::stringstream ss2;
    write_certificate(ss2, back);
    std::stringstream ss3;
    write_certificate(ss3, cert);
    CHECK(ss2.str() == ss3.str());

    std::stringstream bad("diskchain 0\n");
    CHECK_THROWS_AS(read_certificate(bad), input_error);
}

TEST_CASE("svg output is deterministic and well formed") {
    auto render = [] {
        SvgScene scene({{-2, -2}, {2, 2}}, 400);
        scene.add_rect({{-2, -2}, {2, 0}}, "#d0d8e8", 0.6);
        scene.add_polyline({{0, 0}, {1, 1}, {2, 0}}, "#1f4e9c", 1.2);
        scene.add_segment({0, 0}, {1, -1}, "#c03030", 1.0, true);
        scene.add_circle({0, 0}, 0.5, "#1f4e9c");
        scene.add_dot({1, 1}, 2.5, "#c03030");
        return scene.str();
    };
    std::string a = render(), b = render();
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    CHECK(a.find("stroke-dasharray") != std::string::npos);

    SvgScene empty({{-1, -1}, {1, 1}}, 100);
    std::string minimal = empty.str();
    CHECK(minimal.find("<svg") != std::string::npos);
    CHECK(minimal.find("</svg>") != std::string::npos);
}

TEST_CASE("cmd_classify prints verdicts and machine-readable lines that re-parse") {
    TempFile json("classify.jsonl");
    RunConfig cfg;
    cfg.system_name = "translation_exp";
    cfg.window_csv = "-1,3,-2,1";
    cfg.nx = 120;
    cfg.ny = 90;
    cfg.notion_name = "eps";
    cfg.eps_values = {0.5};
    cfg.points = {{0, 0}};
    cfg.json_out = json.path;

    std::ostringstream out;
    int rc = cmd_classify(cfg, out);
    CHECK(rc == 0);
    CHECK(out.str().find("CertifiedYes") != std::string::npos);

    std::ifstream jf(json.path);
    REQUIRE(jf.good());
    std::string line;
    int lines = 0;
    while (std::getline(jf, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);   // throws on bad output
        CHECK(j["command"] == "classify");
        CHECK(j["verdict"] == "CertifiedYes");
        ++lines;
    }
    CHECK(lines == 1);
}

TEST_CASE("cmd_classify window-relative qualifier on certified-no") {
    RunConfig cfg;
    cfg.system_name = "line_translation";
    cfg.metric_name = "euclidean";
    cfg.window_csv = "-20,20";
    cfg.nx = 256;
    cfg.ny = 1;
    cfg.notion_name = "eps";
    cfg.eps_values = {0.5};
    cfg.mode_name = "lipschitz";
    cfg.points = {{0, 0}};

    std::ostringstream out;
    int rc = cmd_classify(cfg, out);
    CHECK(rc == 0);
    CHECK(out.str().find("CertifiedNo (window-relative)") != std::string::npos);
}

TEST_CASE("cmd_certify builds and verifies; identity chain is rejected up front") {
    TempFile chain_file("orbit.txt");
    TempFile cert_file("orbit.cert");
    {
        DynSystem rot = make_rotation(2.0 * kPi / 5.0);
        std::vector<Point> pts{{1, 0}};
        Point p{1, 0};
        for (int i = 0; i < 5; ++i) {
            p = evaluate(rot, p);
            pts.push_back(p);
        }
        std::ofstream f(chain_file.path);
        write_chain(f, make_chain(rot, kEuclid, pts), 2);
    }
    RunConfig cfg;
    cfg.system_name = "rotation5";
    cfg.chain_file = chain_file.path;
    cfg.radius_specs = {"const:0.1"};
    cfg.out_path = cert_file.path;
    std::ostringstream out;
    CHECK(cmd_certify(cfg, out) == 0);
    CHECK(out.str().find("PASS (1)(2)(3)") != std::string::npos);

    // verify-only on a hand-broken certificate reports the failed condition
    DiskChainCertificate broken;
    broken.disks = {{{1, 0}, 0.3}, {{1.2, 0}, 0.3}, {{1, 0}, 0.3}};
    broken.iterates = {1, 1};
    broken.witnesses = {{1, 0}, {1.2, 0}};
    TempFile broken_file("broken.cert");
    {
        std::ofstream f(broken_file.path);
        write_certificate(f, broken);
    }
    RunConfig vcfg;
    vcfg.system_name = "rotation5";
    vcfg.verify_only = true;
    vcfg.cert_file = broken_file.path;
    std::ostringstream vout;
    CHECK(cmd_certify(vcfg, vout) == 1);
    CHECK(vout.str().find("FAIL") != std::string::npos);
    CHECK(vout.str().find("(2)") != std::string::npos);

    // the identity chain cannot produce a fixed-point-free field
    TempFile id_chain("id.txt");
    {
        DynSystem id = make_identity();
        std::ofstream f(id_chain.path);
        write_chain(f, make_chain(id, kEuclid, {{0.5, 0.5}, {0.5, 0.5}}), 2);
    }
    RunConfig icfg;
    icfg.system_name = "identity";
    icfg.chain_file = id_chain.path;
    icfg.window_csv = "-1,1,-1,1";
    icfg.nx = icfg.ny = 8;
    std::ostringstream iout;
    CHECK_THROWS_AS(cmd_certify(icfg, iout), not_fixed_point_free);
}

TEST_CASE("cmd_plot writes identical bytes for identical configs") {
    TempFile svg1("plot1.svg");
    TempFile svg2("plot2.svg");
    RunConfig cfg;
    cfg.system_name = "semicircle";
    cfg.window_csv = "-6,6,-3,6";
    cfg.plot_kind = "orbits";
    cfg.seeds = {{0, 0.5}, {0, 1}, {0, 1.5}, {0.5, 0.001}, {1.5, 0.001}};
    cfg.orbit_steps = 30;

    std::ostringstream out;
    cfg.out_path = svg1.path;
    CHECK(cmd_plot(cfg, out) == 0);
    cfg.out_path = svg2.path;
    CHECK(cmd_plot(cfg, out) == 0);

    auto slurp = [](const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    std::string a = slurp(svg1.path), b = slurp(svg2.path);
    CHECK(!a.empty());
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
}

TEST_CASE("cmd_fixedpoint reports both outcomes") {
    RunConfig cfg;
    cfg.system_name = "contraction_half";
    cfg.window_csv = "-1,1,-1,1";
    cfg.resolution = 128;
    cfg.tol = 1e-6;
    std::ostringstream out;
    CHECK(cmd_fixedpoint(cfg, out) == 0);
    CHECK(out.str().find("fixed_point") != std::string::npos);

    RunConfig none;
    none.system_name = "translation_exp";
    none.window_csv = "-3,3,-3,1";
    none.resolution = 64;
    none.tol = 1e-6;
    std::ostringstream nout;
    CHECK(cmd_fixedpoint(none, nout) == 0);
    CHECK(nout.str().find("absent (window-relative)") != std::string::npos);
}

TEST_CASE("cmd_chain build-example writes a verifiable chain file") {
    TempFile chain_file("built.txt");
    RunConfig cfg;
    cfg.chain_action = "build-example";
    cfg.recipe = "translation_exp";
    cfg.eps_values = {0.5};
    cfg.out_path = chain_file.path;
    std::ostringstream out;
    CHECK(cmd_chain(cfg, out) == 0);

    RunConfig vcfg;
    vcfg.chain_action = "verify";
    vcfg.system_name = "translation_exp";
    vcfg.chain_file = chain_file.path;
    vcfg.notion_name = "eps";
    vcfg.eps_values = {0.5};
    std::ostringstream vout;
    CHECK(cmd_chain(vcfg, vout) == 0);
    CHECK(vout.str().find("VALID") != std::string::npos);
}
