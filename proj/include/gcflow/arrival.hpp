#pragma once

#include <vector>

#include "gcflow/curvature.hpp"
#include "gcflow/grid.hpp"

namespace gcflow {

// A bounded cell region together with its boundary band: the region cells
// that share a face with the complement.  Region cells may not touch the
// grid edge, and every complement cell must be reachable from the grid edge
// through face-adjacent complement cells, so sealed exterior pockets are
// rejected up front.
struct DomainMask {
    GridSpec spec{};
    std::vector<char> inside;
    std::vector<char> band;
    long inside_count = 0;
};

// The region is the sublevel set {f < level} of a cell-centered field.
DomainMask domain_from_field(const ScalarField& f, double level);

// Stationary profile whose sublevel sets replay the shrinking flow of the
// region: the speed operator applied to v equals one across the region
// interior while v is held at zero on the boundary band.  The solver relaxes
// in pseudo-time at the explicit stable step, so the iterate sweeps inward
// like the flow itself and settles once the sweep crosses the deepest cell.
struct ArrivalSolution {
    ScalarField v;
    double residual = 0.0;      // final sup norm of (operator value - 1)
    long iters = 0;             // pseudo-time steps taken
    double grad_bound = 0.0;    // max |Dv| over the region; -grad_bound*dist bounds v below
    double barrier_lambda = 0.0;  // 2 * (10 h) * grad_bound
};

ArrivalSolution solve_stationary(const DomainMask& mask, const CurvatureSpec& cs,
                                 const RegularizationParams& rp, double tol, long max_iters);

// Distance from each cell center to the nearest boundary-band cell center:
// zero on the band itself, +inf when the mask has no band or the cell lies
// outside the region.
std::vector<double> boundary_distance(const DomainMask& mask);

// Depth of the profile: sup of |v| over the region, zero for an empty mask.
double extinction_time(const ScalarField& v, const DomainMask& mask);

}  // namespace gcflow
