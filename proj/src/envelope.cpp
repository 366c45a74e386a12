#include "gcflow/envelope_table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "gcflow/errors.hpp"

namespace gcflow::detail {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// positive real p-th root for the small exponents that occur here
double proot(double x, int p) {
    switch (p) {
        case 1: return x;
        case 2: return std::sqrt(x);
        case 3: return std::cbrt(x);
        default: return std::pow(x, 1.0 / p);
    }
}

void sigmas3(const double* w, int dim, double* e) {
    e[0] = 1.0;
    if (dim == 2) {
        e[1] = w[0] + w[1];
        e[2] = w[0] * w[1];
        e[3] = 0.0;
    } else {
        e[1] = w[0] + w[1] + w[2];
        e[2] = w[0] * w[1] + w[0] * w[2] + w[1] * w[2];
        e[3] = w[0] * w[1] * w[2];
    }
}

// Does the open ray through w meet the truncated region?  Both sides of the
// threshold are degree-one homogeneous, so the test is scale invariant:
// w in cone and n_cut^2 f(w) > max_i w_i.
bool ray_feasible_impl(const CurvatureSpec& spec, const ConeCut& cut, const double* w) {
    double e[4];
    sigmas3(w, spec.dim, e);
    for (int j = 1; j <= spec.k; ++j)
        if (!(e[j] > 0.0)) return false;
    double mx = w[0];
    for (int i = 1; i < spec.dim; ++i) mx = std::max(mx, w[i]);
    double f;
    if (spec.family == CurvatureFamily::sigma_k)
        f = proot(e[spec.k] * spec.normalization(), spec.k);
    else
        f = proot(e[spec.k] / e[spec.l] * spec.normalization(), spec.k - spec.l);
    const double n2 = static_cast<double>(cut.n_cut) * static_cast<double>(cut.n_cut);
    return n2 * f > mx;
}

// Orthonormal frame adapted to the diagonal axis; the polar angle theta runs
// from the axis (0, always feasible) to the equator (pi/2, where the trace
// vanishes and feasibility always fails).
void frame_dir(double theta, double phi, double* w) {
    static const double s3 = 1.0 / std::sqrt(3.0);
    static const double s2 = 1.0 / std::sqrt(2.0);
    static const double s6 = 1.0 / std::sqrt(6.0);
    static const double u0[3] = {s3, s3, s3};
    static const double e1[3] = {s2, -s2, 0.0};
    static const double e2[3] = {s6, s6, -2.0 * s6};
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);
    for (int c = 0; c < 3; ++c) w[c] = ct * u0[c] + st * (cp * e1[c] + sp * e2[c]);
}

double norm3(const double* g, int dim) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) s += g[c] * g[c];
    return std::sqrt(s);
}

double dist3(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(s);
}

}  // namespace

EnvelopeTable::EnvelopeTable(const CurvatureSpec& spec, ConeCut cut)
    : spec_(spec), cut_(cut), dim_(spec.dim) {
    if (dim_ == 2)
        build2d();
    else
        build3d();
    // Slack covering gradient variation between adjacent curve samples, so
    // the reported constant genuinely dominates |gradient| along the whole
    // boundary curve (including refined evaluation points).
    lipschitz_ += 2.0 * max_jump_;
}

bool EnvelopeTable::ray_feasible(const double* tau) const {
    return ray_feasible_impl(spec_, cut_, tau);
}

void EnvelopeTable::push_plane(const double* grad) {
    gx_.push_back(grad[0]);
    gy_.push_back(grad[1]);
    gz_.push_back(dim_ == 3 ? grad[2] : 0.0);
    lipschitz_ = std::max(lipschitz_, norm3(grad, dim_));
}

void EnvelopeTable::build2d() {
    const double axis = kPi / 4.0;
    auto feas = [&](double phi) {
        double w[2] = {std::cos(phi), std::sin(phi)};
        return ray_feasible_impl(spec_, cut_, w);
    };
    if (!feas(axis))
        throw numeric_error("envelope: diagonal direction infeasible; truncation too tight", -1);
    // The feasible direction set is one arc around the diagonal (convex cone
    // cut by the circle); the opposite direction has negative trace, so a
    // single sign change lies on each side.  Bisect both, keeping the
    // feasible iterate.
    auto cross = [&](double good, double bad) {
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (good + bad);
            (feas(mid) ? good : bad) = mid;
        }
        return good;
    };
    const double phiL = cross(axis, axis - kPi);
    const double phiR = cross(axis, axis + kPi);
    double w[2], g[2];
    w[0] = std::cos(phiL), w[1] = std::sin(phiL);
    eval_with_grad(spec_, w, g);
    push_plane(g);
    w[0] = std::cos(phiR), w[1] = std::sin(phiR);
    eval_with_grad(spec_, w, g);
    push_plane(g);
    // Dense sweep of the arc interior for the Lipschitz bound (the largest
    // |gradient| over the region is not necessarily at the arc endpoints).
    const int sweep = 4096;
    double prev[2];
    bool have_prev = false;
    for (int t = 0; t <= sweep; ++t) {
        double phi = phiL + (phiR - phiL) * t / sweep;
        w[0] = std::cos(phi), w[1] = std::sin(phi);
        if (!ray_feasible_impl(spec_, cut_, w)) continue;
        eval_with_grad(spec_, w, g);
        lipschitz_ = std::max(lipschitz_, norm3(g, 2));
        if (have_prev) max_jump_ = std::max(max_jump_, dist3(g, prev, 2));
        prev[0] = g[0], prev[1] = g[1];
        have_prev = true;
    }
}

void EnvelopeTable::build3d() {
    const std::size_t m = 8192;
    {
        double w[3];
        frame_dir(0.0, 0.0, w);
        if (!ray_feasible_impl(spec_, cut_, w))
            throw numeric_error("envelope: diagonal direction infeasible; truncation too tight", -1);
    }
    gx_.reserve(m), gy_.reserve(m), gz_.reserve(m), theta_.reserve(m);
    double first[3] = {0, 0, 0}, prev[3] = {0, 0, 0};
    for (std::size_t i = 0; i < m; ++i) {
        const double phi = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(m);
        double lo = 0.0, hi = 0.5 * kPi;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            double w[3];
            frame_dir(mid, phi, w);
            (ray_feasible_impl(spec_, cut_, w) ? lo : hi) = mid;
        }
        double w[3], g[3];
        frame_dir(lo, phi, w);
        eval_with_grad(spec_, w, g);
        push_plane(g);
        theta_.push_back(lo);
        if (i == 0)
            std::copy(g, g + 3, first);
        else
            max_jump_ = std::max(max_jump_, dist3(g, prev, 3));
        std::copy(g, g + 3, prev);
    }
    max_jump_ = std::max(max_jump_, dist3(prev, first, 3));
    // Two-level gradient-range bounds for the pruned scan.
    const std::size_t nb = (m + kBlock - 1) / kBlock;
    const std::size_t nsb = (m + kSuper - 1) / kSuper;
    for (int c = 0; c < 3; ++c) {
        bmin_[c].assign(nb, kInf);
        bmax_[c].assign(nb, -kInf);
        sbmin_[c].assign(nsb, kInf);
        sbmax_[c].assign(nsb, -kInf);
    }
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t b = i / kBlock;
        const std::size_t s = i / kSuper;
        const double gc[3] = {gx_[i], gy_[i], gz_[i]};
        for (int c = 0; c < 3; ++c) {
            bmin_[c][b] = std::min(bmin_[c][b], gc[c]);
            bmax_[c][b] = std::max(bmax_[c][b], gc[c]);
            sbmin_[c][s] = std::min(sbmin_[c][s], gc[c]);
            sbmax_[c][s] = std::max(sbmax_[c][s], gc[c]);
        }
    }
    // Interior sweep (spiral point set over the sphere, filtered to feasible
    // directions) so the Lipschitz bound covers the whole region.
    const int sweep = 4096;
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < sweep; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / sweep;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * i;
        double w[3] = {r * std::cos(phi), r * std::sin(phi), z};
        if (!ray_feasible_impl(spec_, cut_, w)) continue;
        double g[3];
        eval_with_grad(spec_, w, g);
        lipschitz_ = std::max(lipschitz_, norm3(g, 3));
    }
}

double EnvelopeTable::plane_value(std::size_t i, const double* tau) const {
    double v = gx_[i] * tau[0] + gy_[i] * tau[1];
    if (dim_ == 3) v += gz_[i] * tau[2];
    return v;
}

std::size_t EnvelopeTable::min_planes(const double* tau) const {
    const std::size_t n = gx_.size();
    if (dim_ == 2 || n <= kBlock) {
        std::size_t bi = 0;
        double best = plane_value(0, tau);
        for (std::size_t i = 1; i < n; ++i) {
            double v = plane_value(i, tau);
            if (v < best) best = v, bi = i;
        }
        return bi;
    }
    // Best-first branch and bound over the two bound levels.  A branch is
    // skipped only when its interval lower bound strictly exceeds the current
    // best plane value, so the returned value always equals the full scan's.
    const std::size_t nsb = sbmin_[0].size();
    constexpr std::size_t kMaxSuper = 64;
    double slb[kMaxSuper];
    std::size_t order[kMaxSuper];
    const bool sorted = nsb <= kMaxSuper;
    if (sorted) {
        for (std::size_t s = 0; s < nsb; ++s) {
            double lb = 0.0;
            for (int c = 0; c < 3; ++c)
                lb += std::min(sbmin_[c][s] * tau[c], sbmax_[c][s] * tau[c]);
            std::size_t pos = s;
            while (pos > 0 && slb[pos - 1] > lb) {
                slb[pos] = slb[pos - 1];
                order[pos] = order[pos - 1];
                --pos;
            }
            slb[pos] = lb;
            order[pos] = s;
        }
    }
    double best = kInf;
    std::size_t bi = 0;
    for (std::size_t r = 0; r < nsb; ++r) {
        std::size_t s = r;
        if (sorted) {
            if (slb[r] > best) break;
            s = order[r];
        } else {
            double lb = 0.0;
            for (int c = 0; c < 3; ++c)
                lb += std::min(sbmin_[c][s] * tau[c], sbmax_[c][s] * tau[c]);
            if (lb > best) continue;
        }
        const std::size_t bend = std::min(bmin_[0].size(), (s + 1) * (kSuper / kBlock));
        for (std::size_t b = s * (kSuper / kBlock); b < bend; ++b) {
            double lb = 0.0;
            for (int c = 0; c < 3; ++c)
                lb += std::min(bmin_[c][b] * tau[c], bmax_[c][b] * tau[c]);
            if (lb > best) continue;
            const std::size_t end = std::min(n, (b + 1) * kBlock);
            for (std::size_t i = b * kBlock; i < end; ++i) {
                double v = plane_value(i, tau);
                if (v < best) best = v, bi = i;
            }
        }
    }
    return bi;
}

double EnvelopeTable::scan_all_planes(const double* tau) const {
    const std::size_t n = gx_.size();
    double best = plane_value(0, tau);
    for (std::size_t i = 1; i < n; ++i) best = std::min(best, plane_value(i, tau));
    return best;
}

double EnvelopeTable::refine3d(const double* tau, double* grad_out) const {
    const std::size_t m = gx_.size();
    // Discrete minimum over the tabulated curve.
    double bestd = kInf;
    for (std::size_t i = 0; i < m; ++i) bestd = std::min(bestd, plane_value(i, tau));
    // Any basin that could undercut the discrete minimum has a sample within
    // one inter-sample variation of it; collect those local minima.
    const double margin = 4.0 * max_jump_ * norm3(tau, 3) + 1e-12;
    std::size_t cand[32];
    int nc = 0;
    double vm = plane_value(m - 1, tau), v0 = plane_value(0, tau), vp;
    for (std::size_t i = 0; i < m && nc < 32; ++i) {
        vp = plane_value((i + 1) % m, tau);
        if (v0 <= vm && v0 <= vp && v0 <= bestd + margin) cand[nc++] = i;
        vm = v0, v0 = vp;
    }
    // Golden-section search along the curve around each candidate, with the
    // boundary crossing re-solved per azimuth.
    auto psi = [&](double phi, double* gout) {
        double lo = 0.0, hi = 0.5 * kPi;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            double w[3];
            frame_dir(mid, phi, w);
            (ray_feasible_impl(spec_, cut_, w) ? lo : hi) = mid;
        }
        double w[3], g[3];
        frame_dir(lo, phi, w);
        eval_with_grad(spec_, w, g);
        if (gout) std::copy(g, g + 3, gout);
        return g[0] * tau[0] + g[1] * tau[1] + g[2] * tau[2];
    };
    const double step = 2.0 * kPi / static_cast<double>(m);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double best = kInf, bg[3] = {0, 0, 0};
    bool have = false;
    for (int t = 0; t < nc; ++t) {
        double a = step * (static_cast<double>(cand[t]) - 1.0);
        double b = a + 2.0 * step;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = psi(c, nullptr), fd = psi(d, nullptr);
        for (int it = 0; it < 48; ++it) {
            if (fc <= fd) {
                b = d, d = c, fd = fc;
                c = b - gr * (b - a);
                fc = psi(c, nullptr);
            } else {
                a = c, c = d, fc = fd;
                d = a + gr * (b - a);
                fd = psi(d, nullptr);
            }
        }
        double g[3];
        double v = psi(0.5 * (a + b), g);
        if (!have || v < best) {
            best = v;
            std::copy(g, g + 3, bg);
            have = true;
        }
    }
    if (!have || bestd < best) {
        // Refinement cannot genuinely lose to the table; keep the guard so a
        // degenerate candidate set still returns the tabulated minimum.
        std::size_t bi = min_planes(tau);
        best = plane_value(bi, tau);
        bg[0] = gx_[bi], bg[1] = gy_[bi], bg[2] = gz_[bi];
    }
    if (grad_out) std::copy(bg, bg + 3, grad_out);
    return best;
}

double EnvelopeTable::value(const double* tau) const {
    if (ray_feasible_impl(spec_, cut_, tau))
        return eval_f(spec_, std::span<const double>(tau, static_cast<std::size_t>(dim_)));
    if (dim_ == 2) return plane_value(min_planes(tau), tau);
    return refine3d(tau, nullptr);
}

double EnvelopeTable::value_grad(const double* tau, double* grad_out) const {
    if (ray_feasible_impl(spec_, cut_, tau))
        return eval_with_grad(spec_, tau, grad_out);
    if (dim_ == 2) {
        std::size_t bi = min_planes(tau);
        grad_out[0] = gx_[bi], grad_out[1] = gy_[bi];
        return plane_value(bi, tau);
    }
    return refine3d(tau, grad_out);
}

double EnvelopeTable::value_fast(const double* tau) const {
    if (ray_feasible_impl(spec_, cut_, tau))
        return eval_f(spec_, std::span<const double>(tau, static_cast<std::size_t>(dim_)));
    return plane_value(min_planes(tau), tau);
}

double EnvelopeTable::value_fast_grad(const double* tau, double* grad_out) const {
    if (ray_feasible_impl(spec_, cut_, tau))
        return eval_with_grad(spec_, tau, grad_out);
    std::size_t bi = min_planes(tau);
    grad_out[0] = gx_[bi], grad_out[1] = gy_[bi];
    if (dim_ == 3) grad_out[2] = gz_[bi];
    return plane_value(bi, tau);
}

const EnvelopeTable& envelope_table(const CurvatureSpec& spec, ConeCut cut) {
    using Key = std::tuple<int, int, int, int, int>;
    static std::map<Key, std::unique_ptr<EnvelopeTable>> cache;
    static std::mutex mu;
    Key key{static_cast<int>(spec.family), spec.k, spec.l, spec.dim, cut.n_cut};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<EnvelopeTable>(spec, cut)).first;
    return *it->second;
}

}  // namespace gcflow::detail
