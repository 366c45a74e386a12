#pragma once

#include <vector>

#include "gcflow/front.hpp"
#include "gcflow/linalg.hpp"

namespace gcflow {

// Penalty comparing a front point y against the ball of radius delta/F_x
// tangent at sample x from inside:
//   z = (F_x/2)<x-y, x-y> + delta <x-y, nu_x>,
// with nu_x the sample's inward normal, so that
//   |y - C_x|^2 - (delta/F_x)^2 = (2/F_x) z,   C_x = x + (delta/F_x) nu_x.
// Nonnegative z for all front y means the tangent ball stays inside.
double z_value(const FrontSample& x, const Vec& y, double delta);

// Largest tangent-ball radii at one sample against the other samples: the
// chord through x and y caps the inside radius at |x-y|^2 / (2<y-x, nu_x>)
// when y lies on the inward side, and the outside radius likewise with the
// outward normal.  +inf when no sample constrains that side.  Partners
// closer than a few median sample spacings are skipped: such chords sit
// below the extraction resolution and report vertex noise as curvature.
struct BallRadii {
    double interior = 0.0;
    double exterior = 0.0;
};
BallRadii ball_radii(const FrontSample& x, const std::vector<FrontSample>& front);

// Front-wide audit of the ball condition.  Samples with speed <= 0 are
// flagged and left out of the aggregates (a flat spot needs an infinite
// ball, vacuously fine) but still serve as chord partners.  The aggregates
// are infima of speed times radius; +inf when nothing constrains them.
struct AndrewsReport {
    std::vector<double> interior_radius;  // per sample
    std::vector<double> exterior_radius;
    std::vector<double> speed;
    double alpha_int = 0.0;
    double alpha_ext = 0.0;
    std::vector<long> flagged;  // samples excluded for nonpositive speed

    // samples whose speed * interior radius falls short of the target
    std::vector<long> violations(double alpha_target) const;
};

AndrewsReport andrews_alpha(const std::vector<FrontSample>& front);

}  // namespace gcflow
