#include "chainrec/cli_app.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chainrec/diskchain.h"
#include "chainrec/gridgraph.h"
#include "chainrec/svgplot.h"

namespace chainrec {

namespace {

GraphMode parse_mode(const std::string& name) {
    if (name == "sampled") return GraphMode::sampled;
    if (name == "lipschitz" || name == "lipschitz_inflated") return GraphMode::lipschitz_inflated;
    throw config_error("unknown mode '" + name + "' (sampled | lipschitz)");
}

Window require_window(const RunConfig& cfg, int dimension) {
    if (cfg.window_csv.empty()) throw config_error("this command needs --window");
    return parse_window(cfg.window_csv, dimension);
}

std::string point_str(Point p, int dimension) {
    std::ostringstream os;
    os.precision(17);
    if (dimension == 1) os << "(" << p.x << ")";
    else os << "(" << p.x << ", " << p.y << ")";
    return os.str();
}

struct NamedNotion {
    std::string name;
    ChainNotion notion;
};

std::vector<NamedNotion> make_notions(const RunConfig& cfg, const DynSystem& system,
                                      const MetricSpec& metric) {
    std::vector<NamedNotion> out;
    std::vector<double> ladder = cfg.eps_values;
    if (ladder.empty()) ladder = {0.5, 0.1, 0.02};

    if (cfg.notion_name == "eps") {
        for (double e : ladder) out.push_back({"eps:" + std::to_string(e), ChainNotion::eps_chain(e)});
    } else if (cfg.notion_name == "strong") {
        for (double e : ladder)
            out.push_back({"strong:" + std::to_string(e), ChainNotion::strong_chain(e)});
    } else if (cfg.notion_name == "radius") {
        std::vector<std::string> specs = cfg.radius_specs;
        if (specs.empty()) specs = {"const:0.5", "const:0.1", "const:0.02", "invsq:0.5", "invsq:0.1"};
        for (const std::string& spec : specs) {
            if (spec == "auto") {
                Window w = require_window(cfg, system.dimension);
                std::optional<Window> exclude;
                if (!cfg.exclude_csv.empty()) exclude = parse_window(cfg.exclude_csv, 2);
                out.push_back({"radius:auto",
                               ChainNotion::radius_chain(fixed_point_free_radius(
                                   system, metric, w, cfg.nx, cfg.ny, 1.0 / 3.0, exclude))});
            } else {
                out.push_back({"radius:" + spec, ChainNotion::radius_chain(parse_radius_field(spec))});
            }
        }
    } else if (cfg.notion_name == "restricted") {
        if (cfg.restrict_spec.empty()) throw config_error("restricted notion needs --restrict");
        RestrictionSet w = parse_restriction(cfg.restrict_spec);
        for (double e : ladder)
            out.push_back({"restricted:" + cfg.restrict_spec + ":eps=" + std::to_string(e),
                           ChainNotion::restricted_chain(w, e)});
    } else {
        throw config_error("unknown notion '" + cfg.notion_name + "'");
    }
    return out;
}

void write_chain_file(const std::string& path, const Chain& chain, int dimension) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot write chain file '" + path + "'");
    write_chain(f, chain, dimension);
}

nlohmann::json verdict_json(const RunConfig& cfg, const std::string& notion_name, Point p,
                            const Verdict& v, const DynSystem& system) {
    nlohmann::json j;
    j["command"] = "classify";
    j["system"] = system.name;
    j["metric"] = cfg.metric_name;
    j["point"] = system.dimension == 1 ? nlohmann::json::array({p.x})
                                       : nlohmann::json::array({p.x, p.y});
    j["notion"] = notion_name;
    j["verdict"] = to_string(v.label);
    j["mode"] = v.mode == GraphMode::lipschitz_inflated ? "lipschitz" : "sampled";
    j["window_relative"] = v.window_relative;
    if (std::isfinite(v.eps_threshold)) j["eps_threshold"] = v.eps_threshold;
    if (v.witness) {
        j["witness_points"] = v.witness->points.size();
        j["witness_max_jump"] = *std::max_element(v.witness->jump_costs.begin(),
                                                  v.witness->jump_costs.end());
    }
    j["notes"] = v.notes;
    return j;
}

} // namespace

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
    DynSystem system = resolve_system(cfg);
    MetricSpec metric = parse_metric(cfg.metric_name, system.dimension);
    Window window = require_window(cfg, system.dimension);
    GraphMode mode = parse_mode(cfg.mode_name);
    if (cfg.points.empty()) throw config_error("classify needs at least one --point");
    auto notions = make_notions(cfg, system, metric);

    std::ofstream json_file;
    if (!cfg.json_out.empty()) {
        json_file.open(cfg.json_out);
        if (!json_file) throw config_error("cannot write '" + cfg.json_out + "'");
    }

    bool any_unknown = false;
    int witness_idx = 0;
    for (Point p : cfg.points) {
        for (const auto& nn : notions) {
            Verdict v = classify_recurrence(system, metric, p, nn.notion, window, cfg.nx, cfg.ny,
                                            mode, cfg.samples_per_box, cfg.workers);
            out << to_string(v.label);
            if (v.label == VerdictLabel::certified_no) out << " (window-relative)";
            out << " system=" << system.name << " point=" << point_str(p, system.dimension)
                << " notion=" << nn.name;
            if (std::isfinite(v.eps_threshold)) out << " eps_threshold=" << v.eps_threshold;
            if (v.witness) {
                out << " witness_steps=" << v.witness->steps();
                if (!cfg.out_path.empty()) {
                    std::string path = cfg.out_path;
                    if (cfg.points.size() * notions.size() > 1)
                        path += "." + std::to_string(witness_idx);
                    write_chain_file(path, *v.witness, system.dimension);
                    out << " witness_file=" << path;
                }
            }
            out << "\n";
            if (json_file.is_open())
                json_file << verdict_json(cfg, nn.name, p, v, system).dump() << "\n";
            if (v.label == VerdictLabel::unknown) any_unknown = true;
            ++witness_idx;
        }
    }
    return any_unknown ? 1 : 0;
}

int cmd_chain(const RunConfig& cfg, std::ostream& out) {
    DynSystem system = resolve_system(cfg);
    MetricSpec metric = parse_metric(cfg.metric_name, system.dimension);

    if (cfg.chain_action == "build-example") {
        Chain chain;
        if (cfg.recipe == "translation_exp") {
            double eps = cfg.eps_values.empty() ? 0.5 : cfg.eps_values.front();
            Point start = cfg.has_from ? cfg.from : Point{0.0, 0.0};
            chain = build_translation_exp_chain(start, eps);
        } else if (cfg.recipe == "semicircle") {
            RadiusField r = parse_radius_field(
                cfg.radius_specs.empty() ? "const:0.2" : cfg.radius_specs.front());
            Point start = cfg.has_from ? cfg.from : Point{0.0, 1.0};
            chain = build_semicircle_tcr_chain(start, r);
        } else {
            throw config_error("unknown recipe '" + cfg.recipe + "'");
        }
        std::string path = cfg.out_path.empty() ? "chain.txt" : cfg.out_path;
        write_chain_file(path, chain, 2);
        out << "chain points=" << chain.points.size() << " file=" << path << "\n";
        return 0;
    }

    if (cfg.chain_action == "verify") {
        if (cfg.chain_file.empty()) throw config_error("chain verify needs --chain FILE");
        std::ifstream f(cfg.chain_file);
        if (!f) throw config_error("cannot read chain file '" + cfg.chain_file + "'");
        Chain chain = make_chain(system, metric, read_chain_points(f, system.dimension));
        auto notions = make_notions(cfg, system, metric);
        bool all_valid = true;
        for (const auto& nn : notions) {
            ChainReport r = verify_chain(system, metric, chain, nn.notion);
            out << (r.valid ? "VALID" : "INVALID") << " notion=" << nn.name
                << " max_jump=" << r.max_jump << " total_jump=" << r.total_jump;
            if (r.first_violation) out << " first_violation=" << *r.first_violation;
            out << "\n";
            all_valid = all_valid && r.valid;
        }
        return all_valid ? 0 : 1;
    }

    if (cfg.chain_action == "find") {
        if (!cfg.has_from) throw config_error("chain find needs --from");
        Window window = require_window(cfg, system.dimension);
        GraphMode mode = parse_mode(cfg.mode_name);
        Point to = cfg.has_to ? cfg.to : cfg.from;
        auto notions = make_notions(cfg, system, metric);
        BoxGrid grid = build_grid(window, cfg.nx, cfg.ny, system.dimension);
        TransitionGraph graph = build_transition_graph(system, metric, grid, cfg.samples_per_box,
                                                       mode, std::numeric_limits<double>::infinity(),
                                                       cfg.workers);
        for (const auto& nn : notions) {
            auto chain = find_chain(graph, cfg.from, to, nn.notion);
            if (chain) {
                out << "found notion=" << nn.name << " steps=" << chain->steps() << "\n";
                if (!cfg.out_path.empty()) write_chain_file(cfg.out_path, *chain, system.dimension);
            } else {
                out << "absent notion=" << nn.name << "\n";
            }
        }
        return 0;
    }
    throw config_error("chain needs an action: find | verify | build-example");
}

int cmd_certify(const RunConfig& cfg, std::ostream& out) {
    DynSystem system = resolve_system(cfg);
    MetricSpec metric = parse_metric(cfg.metric_name, system.dimension);

    DiskChainCertificate cert;
    if (cfg.verify_only) {
        if (cfg.cert_file.empty()) throw config_error("certify --verify-only needs --certificate");
        std::ifstream f(cfg.cert_file);
        if (!f) throw config_error("cannot read certificate '" + cfg.cert_file + "'");
        cert = read_certificate(f);
    } else {
        if (cfg.chain_file.empty()) throw config_error("certify needs --chain FILE");
        std::ifstream f(cfg.chain_file);
        if (!f) throw config_error("cannot read chain file '" + cfg.chain_file + "'");
        Chain chain = make_chain(system, metric, read_chain_points(f, system.dimension));

        RadiusField field;
        std::string spec = cfg.radius_specs.empty() ? "auto" : cfg.radius_specs.front();
        if (spec == "auto") {
            Window w = require_window(cfg, system.dimension);
            std::optional<Window> exclude;
            if (!cfg.exclude_csv.empty()) exclude = parse_window(cfg.exclude_csv, 2);
            field = fixed_point_free_radius(system, metric, w, cfg.nx, cfg.ny, 1.0 / 3.0, exclude);
        } else {
            field = parse_radius_field(spec);
        }
        cert = build_disk_chain(system, metric, chain, field);
        std::string path = cfg.out_path.empty() ? "certificate.txt" : cfg.out_path;
        std::ofstream cf(path);
        if (!cf) throw config_error("cannot write certificate '" + path + "'");
        write_certificate(cf, cert);
        out << "certificate disks=" << cert.steps() << " file=" << path << "\n";
    }

    DiskChainReport report = verify_disk_chain(system, metric, cert);
    if (report.pass) {
        out << "PASS (1)(2)(3) margin1=" << report.margin_image
            << " margin2=" << report.margin_pairwise << "\n";
        return 0;
    }
    out << "FAIL";
    if (!report.image_disjoint) out << " (1)";
    if (!report.pairwise_ok) out << " (2)";
    if (!report.witnesses_ok) out << " (3)";
    out << "\n";
    for (const std::string& f : report.failures) out << "  " << f << "\n";
    return 1;
}

int cmd_fixedpoint(const RunConfig& cfg, std::ostream& out) {
    DynSystem system = resolve_system(cfg);
    Window window = require_window(cfg, system.dimension);
    auto p = find_fixed_point(system, window, cfg.resolution, cfg.tol);
    if (p) {
        MetricSpec euclid{MetricKind::euclidean, system.dimension};
        out << "fixed_point " << point_str(*p, system.dimension)
            << " displacement=" << displacement(system, euclid, *p) << "\n";
    } else {
        out << "absent (window-relative)\n";
    }
    return 0;
}

int cmd_plot(const RunConfig& cfg, std::ostream& out) {
    DynSystem system = resolve_system(cfg);
    Window window = cfg.window_csv.empty()
                        ? Window{{-6.0, -3.0}, {6.0, 6.0}}
                        : parse_window(cfg.window_csv, 2);
    SvgScene scene(window, 800);

    // Fixed region of the semicircle system, drawn as a filled band.
    if (system.name == "semicircle" && window.lo.y < 0.0)
        scene.add_rect({window.lo, {window.hi.x, std::min(0.0, window.hi.y)}}, "#d0d8e8", 0.6);

    // Axes.
    if (window.lo.y < 0.0 && window.hi.y > 0.0)
        scene.add_segment({window.lo.x, 0.0}, {window.hi.x, 0.0}, "#888888", 1.0);
    if (window.lo.x < 0.0 && window.hi.x > 0.0)
        scene.add_segment({0.0, window.lo.y}, {0.0, window.hi.y}, "#888888", 1.0);

    if (cfg.plot_kind == "orbits") {
        for (Point seed : cfg.seeds) {
            std::vector<Point> orbit;
            if (system.dimension == 1) {
                Point p = seed;
                for (int k = 0; k <= cfg.orbit_steps; ++k) {
                    orbit.push_back(embed_line_to_circle(p.x));
                    p = evaluate(system, p);
                }
            } else if (system.name == "semicircle") {
                Point p = seed;
                orbit.push_back(p);
                for (int k = 0; k < cfg.orbit_steps * 8; ++k) {
                    p = semicircle_flow(p, 0.125);
                    orbit.push_back(p);
                }
            } else {
                Point p = seed;
                orbit.push_back(p);
                for (int k = 0; k < cfg.orbit_steps; ++k) {
                    p = evaluate(system, p);
                    orbit.push_back(p);
                }
            }
            scene.add_polyline(orbit, "#1f4e9c", 1.2);
            scene.add_dot(orbit.front(), 2.5, "#1f4e9c");
        }
    } else if (cfg.plot_kind == "chain") {
        if (cfg.chain_file.empty()) throw config_error("plot chain needs --chain FILE");
        std::ifstream f(cfg.chain_file);
        if (!f) throw config_error("cannot read chain file '" + cfg.chain_file + "'");
        std::vector<Point> pts = read_chain_points(f, system.dimension);
        scene.add_polyline(pts, "#1f4e9c", 1.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            Point img = evaluate(system, pts[i - 1]);
            scene.add_segment(img, pts[i], "#c03030", 1.0, true);
        }
        if (!pts.empty()) scene.add_dot(pts.front(), 3.0, "#c03030");
    } else if (cfg.plot_kind == "certificate") {
        if (cfg.cert_file.empty()) throw config_error("plot certificate needs --certificate FILE");
        std::ifstream f(cfg.cert_file);
        if (!f) throw config_error("cannot read certificate '" + cfg.cert_file + "'");
        DiskChainCertificate cert = read_certificate(f);
        for (std::size_t i = 1; i < cert.disks.size(); ++i)
            scene.add_circle(cert.disks[i].center, cert.disks[i].radius, "#1f4e9c", "#9fc0e8");
        for (const Point& w : cert.witnesses) scene.add_dot(w, 2.5, "#c03030");
    } else {
        throw config_error("unknown plot kind '" + cfg.plot_kind + "'");
    }

    std::string path = cfg.out_path.empty() ? "plot.svg" : cfg.out_path;
    std::ofstream svg(path, std::ios::binary);
    if (!svg) throw config_error("cannot write '" + path + "'");
    svg << scene.str();
    out << "svg file=" << path << "\n";
    return 0;
}

namespace {

void add_common_options(CLI::App* app, RunConfig& cfg, std::string& point_csv,
                        std::string& from_csv, std::string& to_csv, std::string& seeds_csv,
                        std::string& grid_csv, std::string& config_path) {
    app->add_option("--config", config_path, "JSON config file (loaded first; flags override)");
    app->add_option("--system", cfg.system_name, "built-in system name");
    app->add_option("--metric", cfg.metric_name, "euclidean | bounded | circle");
    app->add_option("--window", cfg.window_csv, "x0,x1,y0,y1 (x0,x1 on the line)");
    app->add_option("--grid", grid_csv, "NX,NY");
    app->add_option("--eps", cfg.eps_values, "eps ladder");
    app->add_option("--notion", cfg.notion_name, "eps | strong | radius | restricted");
    app->add_option("--radius-field", cfg.radius_specs, "const:V | invsq:V | auto");
    app->add_option("--restrict", cfg.restrict_spec, "disk:cx,cy,r | box:x0,x1,y0,y1");
    app->add_option("--exclude", cfg.exclude_csv, "carved-out window for auto radius fields");
    app->add_option("--mode", cfg.mode_name, "sampled | lipschitz");
    app->add_option("--samples", cfg.samples_per_box, "samples per box");
    app->add_option("--workers", cfg.workers, "graph build workers (0 = all cores)");
    app->add_option("--point", point_csv, "x,y (repeatable via commas per point; one point)");
    app->add_option("--from", from_csv, "x,y");
    app->add_option("--to", to_csv, "x,y");
    app->add_option("--seeds", seeds_csv, "x,y;x,y;... orbit seeds");
    app->add_option("--chain", cfg.chain_file, "chain file");
    app->add_option("--certificate", cfg.cert_file, "certificate file");
    app->add_option("--out", cfg.out_path, "output path");
    app->add_option("--json-out", cfg.json_out, "machine-readable JSONL output path");
    app->add_option("--resolution", cfg.resolution, "fixed point subdivision resolution");
    app->add_option("--tol", cfg.tol, "fixed point displacement tolerance");
    app->add_option("--kind", cfg.plot_kind, "orbits | chain | certificate");
    app->add_option("--steps", cfg.orbit_steps, "orbit iterations");
    app->add_option("--recipe", cfg.recipe, "translation_exp | semicircle");
    app->add_flag("--verify-only", cfg.verify_only, "verify an existing certificate");
}

void finish_config(RunConfig& cfg, const std::string& point_csv, const std::string& from_csv,
                   const std::string& to_csv, const std::string& seeds_csv,
                   const std::string& grid_csv, int dimension_guess) {
    if (!grid_csv.empty()) {
        auto pos = grid_csv.find(',');
        if (pos == std::string::npos) throw config_error("--grid needs NX,NY");
        cfg.nx = std::stoi(grid_csv.substr(0, pos));
        cfg.ny = std::stoi(grid_csv.substr(pos + 1));
    }
    if (!point_csv.empty()) cfg.points.push_back(parse_point(point_csv, dimension_guess));
    if (!from_csv.empty()) {
        cfg.from = parse_point(from_csv, dimension_guess);
        cfg.has_from = true;
    }
    if (!to_csv.empty()) {
        cfg.to = parse_point(to_csv, dimension_guess);
        cfg.has_to = true;
    }
    if (!seeds_csv.empty()) {
        std::stringstream ss(seeds_csv);
        std::string item;
        while (std::getline(ss, item, ';'))
            if (!item.empty()) cfg.seeds.push_back(parse_point(item, dimension_guess));
    }
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"chain recurrence analysis for line and plane homeomorphisms"};
    app.require_subcommand(1);

    RunConfig cfg;
    try {
        // A config file forms the baseline; explicit flags overwrite it because
        // CLI11 only touches bound variables for options that actually appear.
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string(argv[i]) == "--config") cfg = load_config_file(argv[i + 1]);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::string config_path, point_csv, from_csv, to_csv, seeds_csv, grid_csv;
    app.add_option("--config", config_path, "JSON config file");

    CLI::App* sub_classify = app.add_subcommand("classify", "chain recurrence verdicts");
    CLI::App* sub_chain = app.add_subcommand("chain", "find / verify / build-example");
    sub_chain->add_option("action", cfg.chain_action, "find | verify | build-example");
    CLI::App* sub_certify = app.add_subcommand("certify", "periodic disk chain certificates");
    CLI::App* sub_fix = app.add_subcommand("fixedpoint", "fixed point search");
    CLI::App* sub_plot = app.add_subcommand("plot", "SVG figures");
    for (CLI::App* s : {sub_classify, sub_chain, sub_certify, sub_fix, sub_plot})
        add_common_options(s, cfg, point_csv, from_csv, to_csv, seeds_csv, grid_csv, config_path);

    try {
        app.parse(argc, argv);
        int dim_guess = cfg.inline_system ? cfg.inline_system->dimension
                        : cfg.system_name == "line_translation" ? 1
                                                                : 2;
        finish_config(cfg, point_csv, from_csv, to_csv, seeds_csv, grid_csv, dim_guess);

        if (sub_classify->parsed()) return cmd_classify(cfg, std::cout);
        if (sub_chain->parsed()) return cmd_chain(cfg, std::cout);
        if (sub_certify->parsed()) return cmd_certify(cfg, std::cout);
        if (sub_fix->parsed()) return cmd_fixedpoint(cfg, std::cout);
        if (sub_plot->parsed()) return cmd_plot(cfg, std::cout);
        return 2;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;   // usage errors exit 2; --help exits 0
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace chainrec
