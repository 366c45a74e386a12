#include "gcflow/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "gcflow/envelope_table.hpp"
#include "gcflow/errors.hpp"

namespace gcflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// cells that actually move: interior stencil support and inside the far zone
std::vector<std::uint8_t> active_mask(const ScalarField& f) {
    std::vector<std::uint8_t> act(f.values.size(), 0);
    const long n = f.size();
    for (long c = 0; c < n; ++c)
        if (f.interior(c) && !f.far_cell(c)) act[c] = 1;
    return act;
}

void require_clean_initial(const ScalarField& f) {
    const long n = f.size();
    for (long c = 0; c < n; ++c) {
        if (!std::isfinite(f.values[c]))
            throw parameter_error("flow: initial data is non-finite at cell " +
                                  std::to_string(c));
        if (f.far_cell(c) && f.values[c] != f.far_value)
            throw parameter_error("flow: initial data does not hold the far value at cell " +
                                  std::to_string(c));
    }
}

// Advance one explicit step of size dt from `in` into `out`.  Frozen cells
// copy through.  A stencil that is constant across the cell's full neighbor
// set short-circuits to a zero increment: a flat graph has zero speed, and
// the speed function maps the zero matrix to exactly zero.
void step_into(const ScalarField& in, ScalarField& out, const std::vector<std::uint8_t>& act,
               const detail::EnvelopeTable& table, const RegularizationParams& rp, double dt) {
    const double* u = in.values.data();
    double* v = out.values.data();
    const long sy = in.spec.shape[0];
    const long sz = static_cast<long>(in.spec.shape[0]) * in.spec.shape[1];
    const double h = in.spec.h;
    const double inv2h = 1.0 / (2.0 * h);
    const double invh2 = 1.0 / (h * h);
    const double inv4h2 = 0.25 * invh2;
    const long n = in.size();
    if (in.spec.dims == 2) {
        for (long c = 0; c < n; ++c) {
            if (!act[c]) {
                v[c] = u[c];
                continue;
            }
            const double uc = u[c];
            const double uxp = u[c + 1], uxm = u[c - 1];
            const double uyp = u[c + sy], uym = u[c - sy];
            const double upp = u[c + 1 + sy], upm = u[c + 1 - sy];
            const double ump = u[c - 1 + sy], umm = u[c - 1 - sy];
            if (uxp == uc && uxm == uc && uyp == uc && uym == uc && upp == uc && upm == uc &&
                ump == uc && umm == uc) {
                v[c] = uc;
                continue;
            }
            Vec p{};
            p.n = 2;
            p.v[0] = (uxp - uxm) * inv2h;
            p.v[1] = (uyp - uym) * inv2h;
            SymMat hs{};
            hs.n = 2;
            hs.m[0][0] = (uxp - 2.0 * uc + uxm) * invh2;
            hs.m[1][1] = (uyp - 2.0 * uc + uym) * invh2;
            hs.m[0][1] = hs.m[1][0] = (upp - upm - ump + umm) * inv4h2;
            const double un =
                uc + dt * detail::operator_value_with(p, hs, table, rp.eps, rp.sigma, true);
            if (!std::isfinite(un))
                throw numeric_error("flow: non-finite update at cell " + std::to_string(c), c);
            v[c] = un;
        }
        return;
    }
    for (long c = 0; c < n; ++c) {
        if (!act[c]) {
            v[c] = u[c];
            continue;
        }
        const double uc = u[c];
        const double uxp = u[c + 1], uxm = u[c - 1];
        const double uyp = u[c + sy], uym = u[c - sy];
        const double uzp = u[c + sz], uzm = u[c - sz];
        const double uxpyp = u[c + 1 + sy], uxpym = u[c + 1 - sy];
        const double uxmyp = u[c - 1 + sy], uxmym = u[c - 1 - sy];
        const double uxpzp = u[c + 1 + sz], uxpzm = u[c + 1 - sz];
        const double uxmzp = u[c - 1 + sz], uxmzm = u[c - 1 - sz];
        const double uypzp = u[c + sy + sz], uypzm = u[c + sy - sz];
        const double uymzp = u[c - sy + sz], uymzm = u[c - sy - sz];
        if (uxp == uc && uxm == uc && uyp == uc && uym == uc && uzp == uc && uzm == uc &&
            uxpyp == uc && uxpym == uc && uxmyp == uc && uxmym == uc && uxpzp == uc &&
            uxpzm == uc && uxmzp == uc && uxmzm == uc && uypzp == uc && uypzm == uc &&
            uymzp == uc && uymzm == uc) {
            v[c] = uc;
            continue;
        }
        Vec p{};
        p.n = 3;
        p.v[0] = (uxp - uxm) * inv2h;
        p.v[1] = (uyp - uym) * inv2h;
        p.v[2] = (uzp - uzm) * inv2h;
        SymMat hs{};
        hs.n = 3;
        hs.m[0][0] = (uxp - 2.0 * uc + uxm) * invh2;
        hs.m[1][1] = (uyp - 2.0 * uc + uym) * invh2;
        hs.m[2][2] = (uzp - 2.0 * uc + uzm) * invh2;
        hs.m[0][1] = hs.m[1][0] = (uxpyp - uxpym - uxmyp + uxmym) * inv4h2;
        hs.m[0][2] = hs.m[2][0] = (uxpzp - uxpzm - uxmzp + uxmzm) * inv4h2;
        hs.m[1][2] = hs.m[2][1] = (uypzp - uypzm - uymzp + uymzm) * inv4h2;
        const double un =
            uc + dt * detail::operator_value_with(p, hs, table, rp.eps, rp.sigma, true);
        if (!std::isfinite(un))
            throw numeric_error("flow: non-finite update at cell " + std::to_string(c), c);
        v[c] = un;
    }
}

} // namespace

double cfl_dt_formula(int dims, double h, double lambda, double sigma) {
    if (dims != 2 && dims != 3)
        throw parameter_error("cfl: dims must be 2 or 3");
    if (!(h > 0.0))
        throw parameter_error("cfl: spacing must be positive");
    if (!(lambda > 0.0))
        throw parameter_error("cfl: speed bound must be positive");
    if (!(sigma >= 0.0))
        throw parameter_error("cfl: sigma must be nonnegative");
    return h * h / (2.0 * static_cast<double>(dims) * (lambda + sigma));
}

double cfl_dt(const RegularizationParams& rp, double h, const CurvatureSpec& cs) {
    validate(rp);
    const double lambda = envelope_lipschitz(cs, ConeCut{rp.n_cut});
    return cfl_dt_formula(cs.dim, h, lambda, rp.sigma);
}

FlowState step(const FlowState& state, const CurvatureSpec& cs, const RegularizationParams& rp) {
    validate(rp);
    if (state.field.spec.dims != cs.dim)
        throw parameter_error("step: field dimension does not match the curvature family");
    if (!(state.dt > 0.0))
        throw parameter_error("step: dt must be positive");
    const double bound = cfl_dt(rp, state.field.spec.h, cs);
    if (state.dt > bound * (1.0 + 1e-9))
        throw parameter_error("step: dt " + fmt(state.dt) + " exceeds the stability bound " +
                              fmt(bound));
    FlowState next;
    next.field = state.field;
    const auto act = active_mask(state.field);
    const auto& table = detail::envelope_table(cs, ConeCut{rp.n_cut});
    step_into(state.field, next.field, act, table, rp, state.dt);
    next.t = state.t + state.dt;
    next.step_count = state.step_count + 1;
    next.dt = state.dt;
    return next;
}

std::vector<FlowState> run_flow(const ScalarField& initial, const CurvatureSpec& cs,
                                const RegularizationParams& rp, double t_max,
                                double snap_every) {
    validate(rp);
    if (initial.spec.dims != cs.dim)
        throw parameter_error("flow: field dimension does not match the curvature family");
    if (!(t_max >= 0.0))
        throw parameter_error("flow: t_max must be nonnegative");
    require_clean_initial(initial);
    const double dt0 = cfl_dt(rp, initial.spec.h, cs);
    const auto act = active_mask(initial);
    const auto& table = detail::envelope_table(cs, ConeCut{rp.n_cut});

    std::vector<FlowState> out;
    ScalarField cur = initial;
    ScalarField buf = initial;
    double t = 0.0;
    long steps = 0;
    double next_snap = std::numeric_limits<double>::infinity();
    if (snap_every > 0.0) {
        out.push_back(FlowState{cur, 0.0, 0, dt0});
        next_snap = snap_every;
    }
    while (t_max - t > 1e-15 * std::max(1.0, t_max)) {
        const double rem = t_max - t;
        const double dt = std::min(dt0, rem);
        step_into(cur, buf, act, table, rp, dt);
        cur.values.swap(buf.values);
        ++steps;
        t = (dt < rem) ? t + dt : t_max;
        // the snapshot for a multiple of snap_every is the state nearest it
        if (t >= next_snap - 0.5 * dt0) {
            out.push_back(FlowState{cur, t, steps, dt});
            while (next_snap <= t + 0.5 * dt0) next_snap += snap_every;
        }
    }
    if (out.empty() || out.back().step_count != steps)
        out.push_back(FlowState{cur, t, steps, dt0});
    return out;
}

double sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.values) m = std::max(m, std::fabs(x));
    return m;
}

double lipschitz_seminorm(const ScalarField& f) {
    const int nx = f.spec.shape[0], ny = f.spec.shape[1], nz = f.spec.shape[2];
    const long sy = nx;
    const long sz = static_cast<long>(nx) * ny;
    const double* u = f.values.data();
    double m = 0.0;
    long c = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i, ++c) {
                if (i + 1 < nx) m = std::max(m, std::fabs(u[c + 1] - u[c]));
                if (j + 1 < ny) m = std::max(m, std::fabs(u[c + sy] - u[c]));
                if (k + 1 < nz) m = std::max(m, std::fabs(u[c + sz] - u[c]));
            }
    return m / f.spec.h;
}

double front_radius_estimate(const ScalarField& f) {
    long neg = 0;
    for (double x : f.values)
        if (x < 0.0) ++neg;
    const double h = f.spec.h;
    if (f.spec.dims == 2) return std::sqrt(static_cast<double>(neg) * h * h / kPi);
    return std::cbrt(3.0 * static_cast<double>(neg) * h * h * h / (4.0 * kPi));
}

} // namespace gcflow
