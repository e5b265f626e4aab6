#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chainrec/chains.h"
#include "chainrec/geometry.h"
#include "chainrec/radius_field.h"
#include "chainrec/systems.h"

namespace chainrec {

/// Inline system description: coordinate expressions in x and y.
struct InlineSystem {
    std::string name = "inline";
    int dimension = 2;
    std::string fx;
    std::string fy;   // ignored for dimension 1
};

/// One resolved run: everything a command needs, parsed deterministically.
/// Unknown configuration keys are errors.
struct RunConfig {
    std::string command;

    std::string system_name = "translation_exp";
    std::optional<InlineSystem> inline_system;
    std::string metric_name = "euclidean";
    std::string window_csv;                 // "x0,x1,y0,y1" (or "x0,x1" on the line)
    int nx = 100, ny = 100;
    std::string notion_name = "eps";        // eps | strong | radius | restricted
    std::vector<double> eps_values;         // ladder for scalar notions
    std::vector<std::string> radius_specs;  // const:V | invsq:V | auto
    std::string restrict_spec;              // disk:cx,cy,r | box:x0,x1,y0,y1
    std::string exclude_csv;                // optional carve-out for auto radius fields
    std::string mode_name = "sampled";      // sampled | lipschitz
    std::vector<Point> points;
    int samples_per_box = 9;
    int workers = 0;

    std::string chain_file;
    std::string cert_file;
    std::string out_path;
    std::string json_out;
    bool verify_only = false;

    // fixedpoint
    int resolution = 256;
    double tol = 1e-6;

    // plot
    std::string plot_kind = "orbits";       // orbits | chain | certificate
    std::vector<Point> seeds;
    int orbit_steps = 40;

    // chain subcommands
    std::string chain_action;               // find | verify | build-example
    std::string recipe = "translation_exp"; // build-example recipe
    Point from{}, to{};
    bool has_from = false, has_to = false;
};

/// Loads a JSON config document; every key must be known.
RunConfig load_config_file(const std::string& path);
/// Merges a JSON document (already loaded) into a config.
void apply_config_json(RunConfig& cfg, const std::string& json_text);

// Spec-string parsers shared by the CLI and the config file.
MetricSpec parse_metric(const std::string& name, int dimension);
Window parse_window(const std::string& csv, int dimension);
RestrictionSet parse_restriction(const std::string& spec);
/// "const:V" or "invsq:V" (V/(1+|p|^2)); "auto" is resolved by the caller.
RadiusField parse_radius_field(const std::string& spec);
Point parse_point(const std::string& csv, int dimension);

/// Resolves the configured system (built-in name or inline expressions).
DynSystem resolve_system(const RunConfig& cfg);

} // namespace chainrec
