#include "gcflow/noncollapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gcflow/errors.hpp"

namespace gcflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Partners closer than this many median sample spacings are ignored in the
// chord search: a sub-resolution chord measures vertex interpolation noise,
// not surface geometry, and its tiny normal gap fakes an arbitrarily small
// ball.  Eight spacings keeps a unit circle's audited radius within 1% while
// still resolving osculating radii down to a few cells.
constexpr double kNeighborFloorFactor = 8.0;

double squared_pair_floor(const std::vector<FrontSample>& front) {
    const std::size_t m = front.size();
    if (m < 2) return 0.0;
    std::vector<double> nn(m, kInf);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            double d2 = 0.0;
            for (int a = 0; a < front[i].position.n; ++a) {
                const double d = front[i].position.v[a] - front[j].position.v[a];
                d2 += d * d;
            }
            if (d2 < nn[i]) nn[i] = d2;
            if (d2 < nn[j]) nn[j] = d2;
        }
    std::nth_element(nn.begin(), nn.begin() + static_cast<long>(m / 2), nn.end());
    return kNeighborFloorFactor * kNeighborFloorFactor * nn[m / 2];
}

// chord-limited radius on the side of `axis` (unit, pointing off the front):
// min over partners y of |x-y|^2 / (2<y-x, axis>) restricted to <y-x, axis> > 0
double side_radius(const Vec& x, const Vec& axis, int dims,
                   const std::vector<FrontSample>& front, double floor2) {
    double best = kInf;
    for (const FrontSample& s : front) {
        double d2 = 0.0, along = 0.0;
        for (int a = 0; a < dims; ++a) {
            const double d = s.position.v[a] - x.v[a];
            d2 += d * d;
            along += d * axis.v[a];
        }
        if (d2 <= floor2 || d2 == 0.0 || along <= 0.0) continue;
        const double r = d2 / (2.0 * along);
        if (r < best) best = r;
    }
    return best;
}

}  // namespace

double z_value(const FrontSample& x, const Vec& y, double delta) {
    if (!(x.speed > 0.0))
        throw parameter_error("z value: sample speed must be positive");
    if (x.position.n != y.n)
        throw parameter_error("z value: point dimension does not match the sample");
    double d2 = 0.0, along = 0.0;
    for (int a = 0; a < x.position.n; ++a) {
        const double d = x.position.v[a] - y.v[a];
        d2 += d * d;
        along += d * x.inward_normal.v[a];
    }
    return 0.5 * x.speed * d2 + delta * along;
}

BallRadii ball_radii(const FrontSample& x, const std::vector<FrontSample>& front) {
    if (front.size() < 2)
        throw parameter_error("ball radii: need at least two front samples");
    const double floor2 = squared_pair_floor(front);
    const int dims = x.position.n;
    Vec outward = x.inward_normal;
    for (int a = 0; a < dims; ++a) outward.v[a] = -outward.v[a];
    BallRadii r;
    r.interior = side_radius(x.position, x.inward_normal, dims, front, floor2);
    r.exterior = side_radius(x.position, outward, dims, front, floor2);
    return r;
}

AndrewsReport andrews_alpha(const std::vector<FrontSample>& front) {
    if (front.empty()) throw parameter_error("ball audit: empty front");
    AndrewsReport rep;
    const long m = static_cast<long>(front.size());
    rep.interior_radius.resize(static_cast<std::size_t>(m), kInf);
    rep.exterior_radius.resize(static_cast<std::size_t>(m), kInf);
    rep.speed.resize(static_cast<std::size_t>(m), 0.0);
    rep.alpha_int = kInf;
    rep.alpha_ext = kInf;
    const double floor2 = squared_pair_floor(front);
    for (long i = 0; i < m; ++i) {
        const FrontSample& s = front[static_cast<std::size_t>(i)];
        rep.speed[static_cast<std::size_t>(i)] = s.speed;
        if (!(s.speed > 0.0)) {
            rep.flagged.push_back(i);
            continue;
        }
        const int dims = s.position.n;
        Vec outward = s.inward_normal;
        for (int a = 0; a < dims; ++a) outward.v[a] = -outward.v[a];
        const double ri = side_radius(s.position, s.inward_normal, dims, front, floor2);
        const double re = side_radius(s.position, outward, dims, front, floor2);
        rep.interior_radius[static_cast<std::size_t>(i)] = ri;
        rep.exterior_radius[static_cast<std::size_t>(i)] = re;
        const double ai = s.speed * ri;
        const double ae = s.speed * re;
        if (ai < rep.alpha_int) rep.alpha_int = ai;
        if (ae < rep.alpha_ext) rep.alpha_ext = ae;
    }
    return rep;
}

std::vector<long> AndrewsReport::violations(double alpha_target) const {
    std::vector<long> out;
    const long m = static_cast<long>(speed.size());
    for (long i = 0; i < m; ++i) {
        if (!(speed[static_cast<std::size_t>(i)] > 0.0)) continue;
        if (speed[static_cast<std::size_t>(i)] * interior_radius[static_cast<std::size_t>(i)] <
            alpha_target)
            out.push_back(i);
    }
    return out;
}

}  // namespace gcflow
