#pragma once
// Tangent-plane machinery behind the truncated concave extension of a
// curvature function.
//
// Degree-one homogeneity makes every tangent plane of f pass through the
// origin: f(l) + Df(l).(t - l) = Df(l).t.  The extension is therefore the
// infimum of the linear forms Df(w).t over unit directions w whose ray meets
// the truncated admissible region.  That direction set is the intersection of
// a convex cone with the unit sphere: a geodesically convex patch containing
// the diagonal axis.  Consequences used here:
//   * a geodesic from the axis crosses the patch boundary exactly once, so
//     the boundary curve can be solved by bisection in the polar angle;
//   * for a query t whose own ray is infeasible, the minimizing direction
//     lies on the boundary curve (the only interior stationary directions
//     are parallel to +-t, and the -t one is a strict local maximum), so a
//     one-dimensional search along the curve is exact;
//   * for a feasible query the minimum is attained along t's own ray and the
//     value is just f(t).
// In two dimensions the curve degenerates to the two endpoints of an arc and
// evaluation is closed-form.  In three dimensions the curve is tabulated at
// fixed azimuth resolution; exact queries refine the discrete argmin by
// golden-section search with the crossing re-solved per azimuth, while the
// fast path (used inside grid sweeps) returns the tabulated minimum via a
// pruned block scan.

#include <cstddef>
#include <vector>

#include "gcflow/curvature.hpp"

namespace gcflow::detail {

class EnvelopeTable {
 public:
  EnvelopeTable(const CurvatureSpec& spec, ConeCut cut);

  // Exact evaluation (boundary-curve search refined to roundoff level).
  double value(const double* tau) const;
  double value_grad(const double* tau, double* grad_out) const;

  // Tabulated evaluation: same feasible-ray branch, but the infeasible
  // branch returns the plane minimum over the stored samples only.
  double value_fast(const double* tau) const;
  double value_fast_grad(const double* tau, double* grad_out) const;

  // Upper bound for |gradient| over the truncated region (curve and
  // interior sweeps plus a slack covering inter-sample variation).
  double lipschitz() const { return lipschitz_; }

  bool ray_feasible(const double* tau) const;

  // Test hooks.
  double scan_all_planes(const double* tau) const;  // unpruned discrete min
  std::size_t plane_count() const { return gx_.size(); }

 private:
  void build2d();
  void build3d();
  void push_plane(const double* grad);

  double plane_value(std::size_t i, const double* tau) const;
  std::size_t min_planes(const double* tau) const;        // pruned, == full scan
  double refine3d(const double* tau, double* grad_out) const;

  CurvatureSpec spec_;
  ConeCut cut_;
  int dim_;

  // Plane gradients, struct-of-arrays for the scan loops.  In 2d these are
  // the two arc endpoints; in 3d one sample per azimuth along the boundary
  // curve, cyclically ordered.
  std::vector<double> gx_, gy_, gz_;
  // Polar angle of each tabulated crossing (3d only), for refinement.
  std::vector<double> theta_;
  // Two-level componentwise gradient ranges for the pruned scan (3d): fine
  // blocks of kBlock planes grouped under coarse blocks of kSuper planes.
  static constexpr std::size_t kBlock = 32;
  static constexpr std::size_t kSuper = 512;
  std::vector<double> bmin_[3], bmax_[3];
  std::vector<double> sbmin_[3], sbmax_[3];

  double lipschitz_ = 0.0;
  double max_jump_ = 0.0;  // largest gradient change between adjacent samples
};

// Process-wide cache keyed by (family, k, l, dim, n_cut); tables are
// immutable after construction.
const EnvelopeTable& envelope_table(const CurvatureSpec& spec, ConeCut cut);

}  // namespace gcflow::detail
