#include "gcflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gcflow/errors.hpp"

namespace gcflow {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void check_positive(double eps_c, const char* what) {
    if (!(eps_c > 0.0) || !std::isfinite(eps_c))
        throw parameter_error(std::string(what) + ": eps_c must be positive and finite, got " +
                              fmt(eps_c));
}

// One max-filter pass along `axis` with the quadratic penalty.  Nesting the
// passes over all axes realizes the full multi-dimensional maximum exactly,
// because the penalty separates into per-axis terms:
//   max_y [f(y) - sum_a (x_a - y_a)^2 / eps_c]
//     = max_{y1} [ ... max_{yd} [f - pen_d] ... - pen_1].
// The per-axis window bound stays valid for intermediate passes since each
// pass output is sandwiched between min f and max f.
void axis_pass(const std::vector<double>& in, std::vector<double>& out, const GridSpec& g,
               int axis, double eps_c) {
    const long sx = 1;
    const long sy = g.shape[0];
    const long sz = static_cast<long>(g.shape[0]) * g.shape[1];
    const long strides[3] = {sx, sy, sz};
    const long stride = strides[axis];
    const int n_axis = g.shape[axis];

    double lo = in[0], hi = in[0];
    for (double v : in) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double osc = hi - lo;
    int w = 0;
    if (osc > 0.0) w = static_cast<int>(std::ceil(std::sqrt(eps_c * osc) / g.h));
    w = std::min(w, n_axis - 1);

    std::vector<double> pen(static_cast<std::size_t>(w) + 1);
    for (int d = 0; d <= w; ++d) pen[static_cast<std::size_t>(d)] = (g.h * d) * (g.h * d) / eps_c;

    const long total = static_cast<long>(in.size());
    for (long c = 0; c < total; ++c) {
        const int i = static_cast<int>((c / stride) % n_axis);
        double best = in[static_cast<std::size_t>(c)];
        const int jlo = std::max(0, i - w), jhi = std::min(n_axis - 1, i + w);
        for (int j = jlo; j <= jhi; ++j) {
            const double cand =
                in[static_cast<std::size_t>(c + static_cast<long>(j - i) * stride)] -
                pen[static_cast<std::size_t>(std::abs(j - i))];
            best = std::max(best, cand);
        }
        out[static_cast<std::size_t>(c)] = best;
    }
}

} // namespace

ScalarField sup_convolution(const ScalarField& f, double eps_c) {
    check_positive(eps_c, "sup convolution");
    for (double v : f.values)
        if (!std::isfinite(v)) throw parameter_error("sup convolution: field is not finite");
    ScalarField out = f;
    std::vector<double> buf(f.values.size());
    std::vector<double>* cur = &out.values;
    std::vector<double>* nxt = &buf;
    for (int axis = 0; axis < f.spec.dims; ++axis) {
        axis_pass(*cur, *nxt, f.spec, axis, eps_c);
        std::swap(cur, nxt);
    }
    if (cur != &out.values) out.values.swap(buf);
    return out;
}

ScalarField inf_convolution(const ScalarField& f, double eps_c) {
    check_positive(eps_c, "inf convolution");
    ScalarField neg = f;
    for (double& v : neg.values) v = -v;
    ScalarField res = sup_convolution(neg, eps_c);
    for (double& v : res.values) v = -v;
    res.far_value = f.far_value;
    return res;
}

ScalarField relabel(const ScalarField& f, const std::function<double(double)>& psi) {
    if (!psi) throw parameter_error("relabel: empty map");
    ScalarField out = f;
    for (double& v : out.values) v = psi(v);
    out.far_value = psi(f.far_value);
    return out;
}

ProbeReport viscosity_probe(const FlowState& prev, const FlowState& mid, const FlowState& next,
                            const CurvatureSpec& cs, const RegularizationParams& rp,
                            double tol_cone, double margin, bool sigma_only) {
    validate(rp);
    if (!(tol_cone >= 0.0) || !std::isfinite(tol_cone))
        throw parameter_error("probe: tol_cone must be nonnegative, got " + fmt(tol_cone));
    if (!(margin > 0.0) || !std::isfinite(margin))
        throw parameter_error("probe: margin must be positive, got " + fmt(margin));
    const GridSpec& g = mid.field.spec;
    if (prev.field.spec.dims != g.dims || next.field.spec.dims != g.dims ||
        prev.field.spec.shape != g.shape || next.field.spec.shape != g.shape ||
        prev.field.spec.h != g.h)
        throw parameter_error("probe: snapshot grids do not match");
    const double dt1 = mid.t - prev.t, dt2 = next.t - mid.t;
    if (!(dt1 > 0.0) || !(dt2 > 0.0))
        throw parameter_error("probe: snapshot times must increase");
    // flow snapshots sit on step boundaries, so their spacing can jitter by
    // one time step; anything beyond ten percent is a genuinely mismatched
    // triple
    if (std::fabs(dt2 - dt1) > 0.1 * std::min(dt1, dt2))
        throw parameter_error("probe: unequal snapshot spacing " + fmt(dt1) + " vs " + fmt(dt2));

    constexpr double kGradFloor = 1e-8;
    ProbeReport rep;
    const long total = mid.field.size();
    for (long c = 0; c < total; ++c) {
        if (!mid.field.interior(c) || mid.field.far_cell(c)) continue;
        const Vec p = gradient_at(mid.field, c);
        if (norm2(p) <= kGradFloor) {
            ++rep.n_indeterminate;
            continue;
        }
        const SymMat hess = hessian_at(mid.field, c);
        double op;
        if (sigma_only) {
            op = rp.sigma * hess.trace();
        } else {
            const SymMat a = sandwich(gamma_eps(p, rp.eps), hess);
            Vec kap = eig_sym(a);
            for (int i = 0; i < kap.n; ++i) kap[i] += tol_cone;
            if (!cone_membership(cs, {kap.v.data(), static_cast<std::size_t>(kap.n)})) {
                ++rep.n_outside_cone;
                continue;
            }
            op = operator_value(mid.field, c, cs, rp);
        }
        const double q =
            (next.field.values[static_cast<std::size_t>(c)] -
             prev.field.values[static_cast<std::size_t>(c)]) /
            (dt1 + dt2);
        const double residual = q - op;
        const double slack = std::fabs(residual);
        ++rep.n_probed;
        rep.max_slack = std::max(rep.max_slack, slack);
        if (slack > margin)
            rep.violations.push_back(ProbeViolation{c, p, q, hess, residual, slack});
    }
    std::stable_sort(rep.violations.begin(), rep.violations.end(),
                     [](const ProbeViolation& a, const ProbeViolation& b) {
                         return a.slack > b.slack;
                     });
    return rep;
}

} // namespace gcflow
