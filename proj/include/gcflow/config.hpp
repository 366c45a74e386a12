#pragma once
#include <string>

#include "gcflow/curvature.hpp"
#include "gcflow/grid.hpp"

namespace gcflow {

// Named end-to-end runs.  Each one drives the solver through a scenario with
// a known verdict and writes its metrics to summary.csv.
enum class ExperimentKind {
    shrink_circle,    // 2d circle against the radial closed form
    shrink_ball,      // 3d ball against the radial closed form
    shrink_ellipse,   // 2d ellipse: monotone shrinkage monitors
    arrival_ball,     // stationary arrival profile on a disk/ball
    andrews_track,    // inscribed-ball constant along a flow
    comparison_pair,  // ordered data stays ordered under stepping
    contraction_pair, // sup-norm gap never grows under stepping
    relabel_check,    // cubed relabeling leaves the zero set in place
    probe_run,        // space-time consistency audit of snapshots
    envelope_audit,   // randomized property sweep of the algebraic layer
};

// Flat key=value configuration.  Unset keys take per-experiment defaults
// documented in the README; all ranges are validated on load and every bad
// key is reported at once.
//
// Keys: experiment, grid.dims, grid.n, grid.h, grid.S, f.family, f.k, f.l,
// f.dim, eps, n_cut, sigma, t_max, snap_every, shape.kind, shape.radius,
// shape.a, shape.b, shape.clamp, arrival.tol, arrival.max_iters,
// arrival.level_h, probe.margin, probe.tol_cone, pairs.count, pairs.steps,
// verify.tau_draws, verify.gamma_draws, out_dir, seed.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::shrink_circle;

    int grid_dims = 2;
    int grid_n = 0;      // cells per axis (cubic grids only)
    double grid_h = 0.0;
    double grid_S = 0.0;

    CurvatureSpec f;
    RegularizationParams reg;

    double t_max = 0.0;
    double snap_every = 0.0;

    std::string shape_kind = "circle"; // circle | ellipse (andrews_track)
    double shape_radius = 1.0;
    double shape_a = 1.0;
    double shape_b = 0.5;
    double shape_clamp = 0.18;

    double arrival_tol = 2e-4;
    long arrival_max_iters = 200000;
    double arrival_level_h = 1.0; // domain mask level in units of h

    double probe_margin = 0.0; // <= 0: five percent of the peak time derivative
    double probe_tol_cone = 1e-9;

    int pairs_count = 20;
    int pairs_steps = 1000;

    long verify_tau_draws = 10000;
    long verify_gamma_draws = 1000;

    std::string out_dir = "out";
    unsigned long seed = 1;
};

// Parse key=value text ('#' starts a comment).  The experiment key is
// required; everything else defaults per experiment.  Duplicate keys name
// their line; unknown keys and out-of-range values are all collected into
// one config_error message.
ExperimentConfig parse_config(const std::string& text);

// Read the file and parse it.  Unreadable path -> config_error.
ExperimentConfig load_config(const std::string& path);

const char* experiment_name(ExperimentKind k);

} // namespace gcflow
