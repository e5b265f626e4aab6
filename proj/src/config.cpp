#include "chainrec/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chainrec/errors.h"
#include "chainrec/expr.h"

namespace chainrec {

namespace {

std::vector<double> split_csv(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw config_error("could not parse number '" + item + "' in '" + csv + "'");
        }
    }
    return out;
}

} // namespace

MetricSpec parse_metric(const std::string& name, int dimension) {
    MetricSpec m;
    m.dimension = dimension;
    if (name == "euclidean") m.kind = MetricKind::euclidean;
    else if (name == "bounded") m.kind = MetricKind::bounded;
    else if (name == "circle" || name == "circle_induced") m.kind = MetricKind::circle_induced;
    else throw config_error("unknown metric '" + name + "'");
    if (m.kind == MetricKind::circle_induced && dimension != 1)
        throw config_error("circle metric requires a line system");
    return m;
}

Window parse_window(const std::string& csv, int dimension) {
    auto v = split_csv(csv);
    Window w;
    if (dimension == 1) {
        if (v.size() != 2 && v.size() != 4)
            throw config_error("window on the line needs 'x0,x1'");
        w.lo = {v[0], 0.0};
        w.hi = {v[1], 0.0};
    } else {
        if (v.size() != 4) throw config_error("window needs 'x0,x1,y0,y1'");
        w.lo = {v[0], v[2]};
        w.hi = {v[1], v[3]};
    }
    w.validate(dimension);
    return w;
}

RestrictionSet parse_restriction(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw config_error("restriction spec must be disk:cx,cy,r or box:x0,x1,y0,y1");
    std::string kind = spec.substr(0, colon);
    auto v = split_csv(spec.substr(colon + 1));
    if (kind == "disk") {
        if (v.size() != 3) throw config_error("disk restriction needs cx,cy,r");
        if (!(v[2] > 0.0)) throw config_error("disk restriction needs a positive radius");
        return RestrictionSet::make_disk({v[0], v[1]}, v[2]);
    }
    if (kind == "box") {
        if (v.size() != 4) throw config_error("box restriction needs x0,x1,y0,y1");
        Window w{{v[0], v[2]}, {v[1], v[3]}};
        w.validate(2);
        return RestrictionSet::make_box(w);
    }
    throw config_error("unknown restriction kind '" + kind + "'");
}

RadiusField parse_radius_field(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw config_error("radius field spec must be const:V or invsq:V");
    std::string kind = spec.substr(0, colon);
    auto v = split_csv(spec.substr(colon + 1));
    if (v.size() != 1 || !(v[0] > 0.0))
        throw config_error("radius field spec needs one positive value");
    double c = v[0];
    if (kind == "const") return RadiusField::constant(c);
    if (kind == "invsq") {
        // c / (1 + |p|^2); gradient magnitude peaks at 3*sqrt(3)/8 * c < 0.65 c.
        return RadiusField::closed_form(
            [c](Point p) { return c / (1.0 + p.x * p.x + p.y * p.y); }, 0.65 * c,
            "invsq:" + std::to_string(c));
    }
    throw config_error("unknown radius field kind '" + kind + "'");
}

Point parse_point(const std::string& csv, int dimension) {
    auto v = split_csv(csv);
    if (dimension == 1) {
        if (v.size() != 1 && v.size() != 2) throw config_error("point on the line needs 'x'");
        return {v[0], 0.0};
    }
    if (v.size() != 2) throw config_error("point needs 'x,y'");
    return {v[0], v[1]};
}

DynSystem resolve_system(const RunConfig& cfg) {
    if (cfg.inline_system) {
        const InlineSystem& in = *cfg.inline_system;
        if (in.dimension != 1 && in.dimension != 2)
            throw config_error("inline system dimension must be 1 or 2");
        Expression fx = Expression::parse(in.fx);
        Expression fy;
        if (in.dimension == 2) {
            if (in.fy.empty()) throw config_error("inline plane system needs fy");
            fy = Expression::parse(in.fy);
        }
        DynSystem s;
        s.name = in.name;
        s.dimension = in.dimension;
        if (in.dimension == 2) {
            s.eval = [fx, fy](Point p) { return Point{fx(p.x, p.y), fy(p.x, p.y)}; };
        } else {
            s.eval = [fx](Point p) { return Point{fx(p.x, 0.0), 0.0}; };
        }
        DynSystem probe = s;   // estimator closes over a stable copy
        s.local_lipschitz = [probe](Point p, double r) {
            return estimate_local_lipschitz(probe, p, r);
        };
        s.metadata = "inline expression system";
        return s;
    }
    auto builtin = find_builtin(cfg.system_name);
    if (!builtin) throw config_error("unknown system '" + cfg.system_name + "'");
    return *builtin;
}

void apply_config_json(RunConfig& cfg, const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw config_error("config must be a JSON object");

    static const std::set<std::string> known = {
        "command",  "system",    "metric",     "window",       "grid",    "notion",
        "eps",      "radius_field", "restrict", "exclude",     "mode",    "points",
        "samples_per_box", "workers", "chain",  "certificate", "out",     "json_out",
        "verify_only", "resolution", "tol",     "kind",        "seeds",   "steps",
        "action",   "recipe",    "from",       "to"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!known.count(it.key())) throw config_error("unknown config key '" + it.key() + "'");

    auto get_point = [&](const nlohmann::json& j) -> Point {
        if (!j.is_array() || j.size() < 1 || j.size() > 2)
            throw config_error("points must be [x,y] (or [x] on the line)");
        Point p{j[0].get<double>(), j.size() == 2 ? j[1].get<double>() : 0.0};
        return p;
    };

    if (doc.contains("command")) cfg.command = doc["command"].get<std::string>();
    if (doc.contains("system")) {
        const auto& s = doc["system"];
        if (s.is_string()) {
            cfg.system_name = s.get<std::string>();
        } else if (s.is_object()) {
            InlineSystem in;
            for (auto it = s.begin(); it != s.end(); ++it) {
                if (it.key() == "name") in.name = it.value().get<std::string>();
                else if (it.key() == "dimension") in.dimension = it.value().get<int>();
                else if (it.key() == "fx") in.fx = it.value().get<std::string>();
                else if (it.key() == "fy") in.fy = it.value().get<std::string>();
                else throw config_error("unknown system key '" + it.key() + "'");
            }
            if (in.fx.empty()) throw config_error("inline system needs fx");
            cfg.inline_system = in;
            cfg.system_name = in.name;
        } else {
            throw config_error("system must be a name or an object");
        }
    }
    if (doc.contains("metric")) cfg.metric_name = doc["metric"].get<std::string>();
    if (doc.contains("window")) {
        const auto& w = doc["window"];
        if (w.is_string()) {
            cfg.window_csv = w.get<std::string>();
        } else {
            std::string csv;
            for (const auto& item : w) csv += (csv.empty() ? "" : ",") + std::to_string(item.get<double>());
            cfg.window_csv = csv;
        }
    }
    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        if (!g.is_array() || g.size() != 2) throw config_error("grid must be [nx, ny]");
        cfg.nx = g[0].get<int>();
        cfg.ny = g[1].get<int>();
    }
    if (doc.contains("notion")) cfg.notion_name = doc["notion"].get<std::string>();
    if (doc.contains("eps")) {
        cfg.eps_values.clear();
        if (doc["eps"].is_number()) cfg.eps_values.push_back(doc["eps"].get<double>());
        else for (const auto& e : doc["eps"]) cfg.eps_values.push_back(e.get<double>());
    }
    if (doc.contains("radius_field")) {
        cfg.radius_specs.clear();
        if (doc["radius_field"].is_string())
            cfg.radius_specs.push_back(doc["radius_field"].get<std::string>());
        else for (const auto& r : doc["radius_field"]) cfg.radius_specs.push_back(r.get<std::string>());
    }
    if (doc.contains("restrict")) cfg.restrict_spec = doc["restrict"].get<std::string>();
    if (doc.contains("exclude")) cfg.exclude_csv = doc["exclude"].get<std::string>();
    if (doc.contains("mode")) cfg.mode_name = doc["mode"].get<std::string>();
    if (doc.contains("points")) {
        cfg.points.clear();
        for (const auto& p : doc["points"]) cfg.points.push_back(get_point(p));
    }
    if (doc.contains("samples_per_box")) cfg.samples_per_box = doc["samples_per_box"].get<int>();
    if (doc.contains("workers")) cfg.workers = doc["workers"].get<int>();
    if (doc.contains("chain")) cfg.chain_file = doc["chain"].get<std::string>();
    if (doc.contains("certificate")) cfg.cert_file = doc["certificate"].get<std::string>();
    if (doc.contains("out")) cfg.out_path = doc["out"].get<std::string>();
    if (doc.contains("json_out")) cfg.json_out = doc["json_out"].get<std::string>();
    if (doc.contains("verify_only")) cfg.verify_only = doc["verify_only"].get<bool>();
    if (doc.contains("resolution")) cfg.resolution = doc["resolution"].get<int>();
    if (doc.contains("tol")) cfg.tol = doc["tol"].get<double>();
    if (doc.contains("kind")) cfg.plot_kind = doc["kind"].get<std::string>();
    if (doc.contains("seeds")) {
        cfg.seeds.clear();
        for (const auto& p : doc["seeds"]) cfg.seeds.push_back(get_point(p));
    }
    if (doc.contains("steps")) cfg.orbit_steps = doc["steps"].get<int>();
    if (doc.contains("action")) cfg.chain_action = doc["action"].get<std::string>();
    if (doc.contains("recipe")) cfg.recipe = doc["recipe"].get<std::string>();
    if (doc.contains("from")) { cfg.from = get_point(doc["from"]); cfg.has_from = true; }
    if (doc.contains("to")) { cfg.to = get_point(doc["to"]); cfg.has_to = true; }
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg;
    apply_config_json(cfg, ss.str());
    return cfg;
}

} // namespace chainrec
