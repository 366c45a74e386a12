#include "gcflow/arrival.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "gcflow/envelope_table.hpp"
#include "gcflow/errors.hpp"
#include "gcflow/evolve.hpp"

namespace gcflow {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Relax the active cells one pseudo-time step: out = in + dtau * (op - 1).
// Inactive cells (band and complement) are already identical in both buffers
// and are left untouched.
double relax_into(const double* u, double* v, const std::vector<std::uint8_t>& act,
                  const GridSpec& spec, const detail::EnvelopeTable& table,
                  const RegularizationParams& rp, double dtau) {
    const long sy = spec.shape[0];
    const long sz = static_cast<long>(spec.shape[0]) * spec.shape[1];
    const double h = spec.h;
    const double inv2h = 1.0 / (2.0 * h);
    const double invh2 = 1.0 / (h * h);
    const double inv4h2 = 0.25 * invh2;
    const long n = static_cast<long>(spec.shape[0]) * spec.shape[1] *
                   (spec.dims == 3 ? spec.shape[2] : 1);
    double res = 0.0;
    if (spec.dims == 2) {
        for (long c = 0; c < n; ++c) {
            if (!act[c]) continue;
            const double uc = u[c];
            Vec p{};
            p.n = 2;
            p.v[0] = (u[c + 1] - u[c - 1]) * inv2h;
            p.v[1] = (u[c + sy] - u[c - sy]) * inv2h;
            SymMat hs{};
            hs.n = 2;
            hs.m[0][0] = (u[c + 1] - 2.0 * uc + u[c - 1]) * invh2;
            hs.m[1][1] = (u[c + sy] - 2.0 * uc + u[c - sy]) * invh2;
            hs.m[0][1] = hs.m[1][0] =
                (u[c + 1 + sy] - u[c + 1 - sy] - u[c - 1 + sy] + u[c - 1 - sy]) * inv4h2;
            const double op = detail::operator_value_with(p, hs, table, rp.eps, rp.sigma, true);
            const double un = uc + dtau * (op - 1.0);
            if (!std::isfinite(un))
                throw numeric_error("stationary solve: non-finite update at cell " +
                                        std::to_string(c),
                                    c);
            v[c] = un;
            const double r = std::fabs(op - 1.0);
            if (r > res) res = r;
        }
        return res;
    }
    for (long c = 0; c < n; ++c) {
        if (!act[c]) continue;
        const double uc = u[c];
        Vec p{};
        p.n = 3;
        p.v[0] = (u[c + 1] - u[c - 1]) * inv2h;
        p.v[1] = (u[c + sy] - u[c - sy]) * inv2h;
        p.v[2] = (u[c + sz] - u[c - sz]) * inv2h;
        SymMat hs{};
        hs.n = 3;
        hs.m[0][0] = (u[c + 1] - 2.0 * uc + u[c - 1]) * invh2;
        hs.m[1][1] = (u[c + sy] - 2.0 * uc + u[c - sy]) * invh2;
        hs.m[2][2] = (u[c + sz] - 2.0 * uc + u[c - sz]) * invh2;
        hs.m[0][1] = hs.m[1][0] =
            (u[c + 1 + sy] - u[c + 1 - sy] - u[c - 1 + sy] + u[c - 1 - sy]) * inv4h2;
        hs.m[0][2] = hs.m[2][0] =
            (u[c + 1 + sz] - u[c + 1 - sz] - u[c - 1 + sz] + u[c - 1 - sz]) * inv4h2;
        hs.m[1][2] = hs.m[2][1] =
            (u[c + sy + sz] - u[c + sy - sz] - u[c - sy + sz] + u[c - sy - sz]) * inv4h2;
        const double op = detail::operator_value_with(p, hs, table, rp.eps, rp.sigma, true);
        const double un = uc + dtau * (op - 1.0);
        if (!std::isfinite(un))
            throw numeric_error("stationary solve: non-finite update at cell " +
                                    std::to_string(c),
                                c);
        v[c] = un;
        const double r = std::fabs(op - 1.0);
        if (r > res) res = r;
    }
    return res;
}

}  // namespace

DomainMask domain_from_field(const ScalarField& f, double level) {
    if (!std::isfinite(level))
        throw parameter_error("domain mask: level must be finite");
    DomainMask m;
    m.spec = f.spec;
    const long n = f.size();
    m.inside.assign(static_cast<std::size_t>(n), 0);
    m.band.assign(static_cast<std::size_t>(n), 0);
    for (long c = 0; c < n; ++c) {
        if (!std::isfinite(f.values[static_cast<std::size_t>(c)]))
            throw parameter_error("domain mask: field is non-finite at cell " + std::to_string(c));
        if (f.values[static_cast<std::size_t>(c)] < level) {
            m.inside[static_cast<std::size_t>(c)] = 1;
            ++m.inside_count;
        }
    }
    for (long c = 0; c < n; ++c)
        if (m.inside[static_cast<std::size_t>(c)] && !f.interior(c))
            throw parameter_error("domain mask: region touches the grid edge at cell " +
                                  std::to_string(c));

    // Flood the complement from the grid edge over face-adjacent cells; any
    // complement cell left unvisited sits in a pocket sealed off by the
    // region.
    const long sy = m.spec.shape[0];
    const long sz = static_cast<long>(m.spec.shape[0]) * m.spec.shape[1];
    const int dims = m.spec.dims;
    const long strides[3] = {1, sy, sz};
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<long> stack;
    for (long c = 0; c < n; ++c)
        if (!f.interior(c)) {
            seen[static_cast<std::size_t>(c)] = 1;
            stack.push_back(c);
        }
    while (!stack.empty()) {
        const long c = stack.back();
        stack.pop_back();
        int ci = 0, cj = 0, ck = 0;
        f.coords(c, ci, cj, ck);
        const int ix[3] = {ci, cj, ck};
        for (int a = 0; a < dims; ++a) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                const int j = ix[a] + sgn;
                if (j < 0 || j >= m.spec.shape[a]) continue;
                const long nb = c + sgn * strides[a];
                if (seen[static_cast<std::size_t>(nb)] || m.inside[static_cast<std::size_t>(nb)])
                    continue;
                seen[static_cast<std::size_t>(nb)] = 1;
                stack.push_back(nb);
            }
        }
    }
    for (long c = 0; c < n; ++c)
        if (!m.inside[static_cast<std::size_t>(c)] && !seen[static_cast<std::size_t>(c)])
            throw parameter_error(
                "domain mask: complement pocket sealed off from the grid edge at cell " +
                std::to_string(c));

    for (long c = 0; c < n; ++c) {
        if (!m.inside[static_cast<std::size_t>(c)]) continue;
        for (int a = 0; a < dims; ++a) {
            if (!m.inside[static_cast<std::size_t>(c - strides[a])] ||
                !m.inside[static_cast<std::size_t>(c + strides[a])]) {
                m.band[static_cast<std::size_t>(c)] = 1;
                break;
            }
        }
    }
    return m;
}

ArrivalSolution solve_stationary(const DomainMask& mask, const CurvatureSpec& cs,
                                 const RegularizationParams& rp, double tol, long max_iters) {
    validate(rp);
    if (mask.spec.dims != cs.dim)
        throw parameter_error("stationary solve: mask dimension does not match the family");
    if (!(tol > 0.0))
        throw parameter_error("stationary solve: tolerance must be positive");
    if (max_iters < 1)
        throw parameter_error("stationary solve: max_iters must be at least one");
    ArrivalSolution sol;
    sol.v = ScalarField::constant(mask.spec, 0.0);
    const long n = sol.v.size();
    if (static_cast<long>(mask.inside.size()) != n || static_cast<long>(mask.band.size()) != n)
        throw parameter_error("stationary solve: mask arrays do not match the grid");
    if (mask.inside_count == 0) return sol;

    std::vector<std::uint8_t> act(static_cast<std::size_t>(n), 0);
    long active_count = 0;
    for (long c = 0; c < n; ++c)
        if (mask.inside[static_cast<std::size_t>(c)] && !mask.band[static_cast<std::size_t>(c)]) {
            act[static_cast<std::size_t>(c)] = 1;
            ++active_count;
        }

    const double dtau = cfl_dt(rp, mask.spec.h, cs);
    const auto& table = detail::envelope_table(cs, ConeCut{rp.n_cut});
    if (active_count > 0) {
        // Seed the relaxation with a depth-squared paraboloid of the band
        // distance: exact for round regions up to band placement, so the
        // pseudo-time loop only has to repair the boundary layer and let the
        // correction creep inward instead of sweeping the whole profile.
        const std::vector<double> dist = boundary_distance(mask);
        double dmax = 0.0;
        for (long c = 0; c < n; ++c)
            if (act[static_cast<std::size_t>(c)] && dist[static_cast<std::size_t>(c)] > dmax)
                dmax = dist[static_cast<std::size_t>(c)];
        if (dmax > 0.0)
            for (long c = 0; c < n; ++c)
                if (act[static_cast<std::size_t>(c)]) {
                    const double depth = dmax - dist[static_cast<std::size_t>(c)];
                    sol.v.values[static_cast<std::size_t>(c)] =
                        std::min(0.0, depth * depth - dmax * dmax);
                }
        std::vector<double> next(sol.v.values);
        bool done = false;
        while (sol.iters < max_iters) {
            const double res =
                relax_into(sol.v.values.data(), next.data(), act, mask.spec, table, rp, dtau);
            sol.v.values.swap(next);
            ++sol.iters;
            sol.residual = res;
            if (res <= tol) {
                done = true;
                break;
            }
        }
        if (!done)
            throw solve_error("stationary solve: residual " + fmt(sol.residual) +
                                  " above tolerance " + fmt(tol) + " after " +
                                  std::to_string(sol.iters) + " iterations",
                              sol.residual);
    }

    // Slope constant for the depth bounds.  Taken over the whole region: the
    // band cells alone underestimate the slope because their stencils span
    // the clamped zero plateau, while the region-wide maximum is attained in
    // a thin collar just inside the band.
    for (long c = 0; c < n; ++c) {
        if (!mask.inside[static_cast<std::size_t>(c)]) continue;
        const Vec g = gradient_at(sol.v, c);
        const double gn = norm2(g);
        if (gn > sol.grad_bound) sol.grad_bound = gn;
    }
    sol.barrier_lambda = 2.0 * (10.0 * mask.spec.h) * sol.grad_bound;
    return sol;
}

std::vector<double> boundary_distance(const DomainMask& mask) {
    const long n = static_cast<long>(mask.inside.size());
    std::vector<double> out(static_cast<std::size_t>(n),
                            std::numeric_limits<double>::infinity());
    std::vector<Vec> band_pts;
    ScalarField probe = ScalarField::constant(mask.spec, 0.0);
    for (long c = 0; c < n; ++c)
        if (mask.band[static_cast<std::size_t>(c)]) band_pts.push_back(probe.cell_center(c));
    if (band_pts.empty()) return out;
    const int dims = mask.spec.dims;
    for (long c = 0; c < n; ++c) {
        if (!mask.inside[static_cast<std::size_t>(c)]) continue;
        const Vec x = probe.cell_center(c);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : band_pts) {
            double s = 0.0;
            for (int a = 0; a < dims; ++a) s += (x.v[a] - b.v[a]) * (x.v[a] - b.v[a]);
            if (s < best) best = s;
        }
        out[static_cast<std::size_t>(c)] = std::sqrt(best);
    }
    return out;
}

double extinction_time(const ScalarField& v, const DomainMask& mask) {
    const long n = v.size();
    if (static_cast<long>(mask.inside.size()) != n)
        throw parameter_error("extinction time: mask does not match the field");
    double best = 0.0;
    for (long c = 0; c < n; ++c) {
        if (!mask.inside[static_cast<std::size_t>(c)]) continue;
        const double a = std::fabs(v.values[static_cast<std::size_t>(c)]);
        if (a > best) best = a;
    }
    return best;
}

}  // namespace gcflow
