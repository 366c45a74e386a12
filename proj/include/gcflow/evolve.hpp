#pragma once
#include <vector>

#include "gcflow/grid.hpp"

namespace gcflow {

// One instant of the explicit flow.  On smooth data within the time-step
// bound the update is non-expansive in the sup norm; kinks in the data can
// excite small central-difference overshoots on the order of the truncation
// error.
struct FlowState {
    ScalarField field;
    double t = 0.0;
    long step_count = 0;
    double dt = 0.0;
};

// Raw step bound: h^2 / (2 * dims * (lambda + sigma)).
double cfl_dt_formula(int dims, double h, double lambda, double sigma);

// Step bound with lambda taken as the envelope's Lipschitz constant over the
// truncated region of the given family.
double cfl_dt(const RegularizationParams& rp, double h, const CurvatureSpec& cs);

// One forward-Euler step of u_t = Fhat(gamma D2u gamma) + sigma * laplace u.
// Uses state.dt (must be positive and within the CFL bound); interior
// non-far cells advance, everything else is untouched.  Input is not
// modified.  CFL violation -> parameter_error; non-finite update ->
// numeric_error carrying the cell index.
FlowState step(const FlowState& state, const CurvatureSpec& cs, const RegularizationParams& rp);

// Run from t=0 to t_max at the CFL step (final step clipped to land exactly
// on t_max).  Returns deep-copy snapshots at every multiple of snap_every
// plus the final state; snap_every <= 0 keeps only the final state.
std::vector<FlowState> run_flow(const ScalarField& initial, const CurvatureSpec& cs,
                                const RegularizationParams& rp, double t_max,
                                double snap_every);

// Monitors reported alongside runs.
double sup_norm(const ScalarField& f);
// max over axis-adjacent cell pairs of |difference| / h
double lipschitz_seminorm(const ScalarField& f);
// radius of the disk/ball matching the measure of the negative region
double front_radius_estimate(const ScalarField& f);

} // namespace gcflow
