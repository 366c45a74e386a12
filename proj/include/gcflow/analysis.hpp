#pragma once
#include <functional>
#include <vector>

#include "gcflow/evolve.hpp"
#include "gcflow/grid.hpp"

namespace gcflow {

// Quadratic-expansion parameters at one audited cell together with the
// consistency defect found there.
struct ProbeViolation {
    long cell = 0;
    Vec p{};          // gradient from central differences
    double q = 0.0;   // centered time difference across the snapshot pair
    SymMat hess{};    // spatial Hessian from central differences
    double residual = 0.0; // q - operator value; positive breaks the upper
                           // inequality, negative the lower one
    double slack = 0.0;    // |residual|
};

// Outcome of the sub/supersolution audit over one snapshot triple.
//   violations     cells whose defect exceeds the margin, sorted by slack
//                  descending
//   max_slack      largest defect over every judged cell (violating or not)
//   n_probed       judged cells
//   n_indeterminate cells skipped because the gradient is numerically zero;
//                  counted, not judged, since the degenerate-direction case
//                  has no pointwise discrete analogue
//   n_outside_cone cells whose projected-Hessian eigenvalues sit outside the
//                  admissibility cone beyond the tolerance
struct ProbeReport {
    std::vector<ProbeViolation> violations;
    double max_slack = 0.0;
    long n_probed = 0;
    long n_indeterminate = 0;
    long n_outside_cone = 0;
};

// Discrete sup-convolution: out(x) = max over grid nodes y of
// f(y) - |x - y|^2 / eps_c.  The maximum over all nodes is computed exactly;
// candidates are pruned to per-axis offsets of at most
// ceil(sqrt(eps_c * osc(f)) / h) cells, beyond which the quadratic penalty
// already exceeds the field's oscillation so the stationary candidate y = x
// wins.  The result dominates the input pointwise, and adding |x|^2 / eps_c
// makes it convex along every grid line.  far_value is copied unchanged; the
// output is an analysis object, not a flow state.
ScalarField sup_convolution(const ScalarField& f, double eps_c);

// Dual smoothing: out(x) = min over y of f(y) + |x - y|^2 / eps_c.  Lies
// below the input; subtracting |x|^2 / eps_c is concave along grid lines.
ScalarField inf_convolution(const ScalarField& f, double eps_c);

// Pointwise relabeling by a nondecreasing map (applied to far_value too, so
// a pinned field stays pinned).  Zero sets are preserved whenever
// psi(0) = 0 and psi is strictly monotone near 0.
ScalarField relabel(const ScalarField& f, const std::function<double(double)>& psi);

// Audit three consecutive snapshots of a flow (equally spaced within ten
// percent, absorbing step-boundary jitter) against the regularized
// equation.  At every interior, non-far cell of the middle snapshot the
// local expansion (p, q, R) is formed from central space and time
// differences; cells with |p| above a fixed floor and projected-Hessian
// eigenvalues inside the admissibility cone (after a tol_cone shift toward
// the diagonal) are judged by the defect |q - operator value|.  Defects
// beyond `margin` are reported as violations; a too-large defect of either
// sign flags the corresponding one-sided inequality.  With sigma_only the
// operator reduces to its linear diffusion part and the cone gate is
// skipped, which audits fields generated by pure heat flow.  Unequal
// snapshot spacing or mismatched grids -> parameter_error.
ProbeReport viscosity_probe(const FlowState& prev, const FlowState& mid, const FlowState& next,
                            const CurvatureSpec& cs, const RegularizationParams& rp,
                            double tol_cone, double margin, bool sigma_only = false);

} // namespace gcflow
