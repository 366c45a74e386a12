#include "gcflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "gcflow/envelope_table.hpp"
#include "gcflow/errors.hpp"

namespace gcflow {

// ---- small dense linear algebra ----

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

SymMat SymMat::identity(int n) {
    SymMat m;
    m.n = n;
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double SymMat::trace() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (*this)(i, i);
    return s;
}

SymMat sandwich(const SymMat& a, const SymMat& b) {
    const int n = a.n;
    SymMat ab;
    ab.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += a(i, k) * b(k, j);
            ab(i, j) = s;
        }
    SymMat out;
    out.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += ab(i, k) * a(k, j);
            out(i, j) = s;
        }
    // clean roundoff asymmetry so downstream symmetry checks stay exact
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = 0.5 * (out(i, j) + out(j, i));
            out(i, j) = v;
            out(j, i) = v;
        }
    return out;
}

// ---- parameters and field layout ----

void validate(const RegularizationParams& p) {
    if (!(p.eps > 0.0 && p.eps < 1.0))
        throw parameter_error("regularization: eps must lie in (0,1), got " + std::to_string(p.eps));
    if (p.n_cut < 2)
        throw parameter_error("regularization: n_cut must be at least 2, got " + std::to_string(p.n_cut));
    if (!(p.sigma >= 0.0))
        throw parameter_error("regularization: sigma must be nonnegative, got " + std::to_string(p.sigma));
}

ScalarField ScalarField::constant(const GridSpec& g, double value) {
    if (g.dims < 2 || g.dims > 3)
        throw parameter_error("grid: dims must be 2 or 3");
    if (g.h <= 0.0) throw parameter_error("grid: spacing must be positive");
    ScalarField f;
    f.spec = g;
    if (g.dims == 2) f.spec.shape[2] = 1;
    long n = 1;
    for (int a = 0; a < 3; ++a) {
        if (f.spec.shape[a] < 1) throw parameter_error("grid: shape entries must be positive");
        n *= f.spec.shape[a];
    }
    f.far_value = value;
    f.values.assign(static_cast<std::size_t>(n), value);
    return f;
}

long ScalarField::size() const {
    return static_cast<long>(values.size());
}

long ScalarField::idx(int i, int j, int k) const {
    return (static_cast<long>(k) * spec.shape[1] + j) * spec.shape[0] + i;
}

void ScalarField::coords(long cell, int& i, int& j, int& k) const {
    i = static_cast<int>(cell % spec.shape[0]);
    long r = cell / spec.shape[0];
    j = static_cast<int>(r % spec.shape[1]);
    k = static_cast<int>(r / spec.shape[1]);
}

Vec ScalarField::cell_center(int i, int j, int k) const {
    Vec x;
    x.n = spec.dims;
    x[0] = spec.origin[0] + spec.h * i;
    x[1] = spec.origin[1] + spec.h * j;
    if (spec.dims == 3) x[2] = spec.origin[2] + spec.h * k;
    return x;
}

Vec ScalarField::cell_center(long cell) const {
    int i, j, k;
    coords(cell, i, j, k);
    return cell_center(i, j, k);
}

bool ScalarField::interior(long cell) const {
    int i, j, k;
    coords(cell, i, j, k);
    if (i < 1 || i >= spec.shape[0] - 1) return false;
    if (j < 1 || j >= spec.shape[1] - 1) return false;
    if (spec.dims == 3 && (k < 1 || k >= spec.shape[2] - 1)) return false;
    return true;
}

bool ScalarField::far_cell(long cell) const {
    return norm2(cell_center(cell)) >= spec.S;
}

void pin_far_cells(ScalarField& f) {
    const long n = f.size();
    for (long c = 0; c < n; ++c)
        if (f.far_cell(c)) f.values[static_cast<std::size_t>(c)] = f.far_value;
}

// ---- stencils ----

namespace {

void require_interior(const ScalarField& f, long cell) {
    if (cell < 0 || cell >= f.size())
        throw stencil_error("stencil out of range: cell " + std::to_string(cell) +
                            " outside array of " + std::to_string(f.size()));
    if (!f.interior(cell))
        throw stencil_error("stencil out of range: cell " + std::to_string(cell) +
                            " touches the array boundary");
}

} // namespace

Vec gradient_at(const ScalarField& f, long cell) {
    require_interior(f, cell);
    const double* u = f.values.data();
    const long sx = 1;
    const long sy = f.spec.shape[0];
    const long sz = static_cast<long>(f.spec.shape[0]) * f.spec.shape[1];
    const double inv2h = 1.0 / (2.0 * f.spec.h);
    Vec g;
    g.n = f.spec.dims;
    g[0] = (u[cell + sx] - u[cell - sx]) * inv2h;
    g[1] = (u[cell + sy] - u[cell - sy]) * inv2h;
    if (g.n == 3) g[2] = (u[cell + sz] - u[cell - sz]) * inv2h;
    return g;
}

SymMat hessian_at(const ScalarField& f, long cell) {
    require_interior(f, cell);
    const double* u = f.values.data();
    const int n = f.spec.dims;
    const long stride[3] = {1, f.spec.shape[0],
                            static_cast<long>(f.spec.shape[0]) * f.spec.shape[1]};
    const double invh2 = 1.0 / (f.spec.h * f.spec.h);
    SymMat hm;
    hm.n = n;
    for (int a = 0; a < n; ++a) {
        const long s = stride[a];
        hm(a, a) = (u[cell + s] - 2.0 * u[cell] + u[cell - s]) * invh2;
        for (int b = a + 1; b < n; ++b) {
            const long t = stride[b];
            double v = (u[cell + s + t] - u[cell + s - t] - u[cell - s + t] + u[cell - s - t]) *
                       0.25 * invh2;
            hm(a, b) = v;
            hm(b, a) = v;
        }
    }
    return hm;
}

// ---- projection matrix ----

SymMat gamma_eps(const Vec& p, double eps) {
    if (!(eps > 0.0)) throw parameter_error("gamma: eps must be positive");
    const double p2 = dot(p, p);
    const double w = std::sqrt(eps * eps + p2);
    const double denom = eps * w + eps * eps + p2; // = w * (eps + w)
    SymMat g = SymMat::identity(p.n);
    for (int i = 0; i < p.n; ++i)
        for (int j = 0; j < p.n; ++j) g(i, j) -= p[i] * p[j] / denom;
    return g;
}

// ---- Jacobi eigensolver ----

Vec eig_sym_full(const SymMat& a0, double tol, SymMat& q_out) {
    const int n = a0.n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::fabs(a0(i, j) - a0(j, i)) > 1e-12)
                throw parameter_error("eig: input matrix is not symmetric");
    SymMat a = a0;
    SymMat q = SymMat::identity(n);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(2.0 * off) <= tol) break;
        for (int p = 0; p < n - 1; ++p)
            for (int r = p + 1; r < n; ++r) {
                const double apr = a(p, r);
                if (apr == 0.0) continue;
                const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), air = a(i, r);
                    a(i, p) = c * aip - s * air;
                    a(i, r) = s * aip + c * air;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a(p, i), ari = a(r, i);
                    a(p, i) = c * api - s * ari;
                    a(r, i) = s * api + c * ari;
                }
                for (int i = 0; i < n; ++i) {
                    const double qip = q(i, p), qir = q(i, r);
                    q(i, p) = c * qip - s * qir;
                    q(i, r) = s * qip + c * qir;
                }
            }
    }
    // sort nondecreasing, carrying eigenvector columns along
    int order[3] = {0, 1, 2};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (a(order[j], order[j]) < a(order[i], order[i])) std::swap(order[i], order[j]);
    Vec lam;
    lam.n = n;
    SymMat qs;
    qs.n = n;
    for (int j = 0; j < n; ++j) {
        lam[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) qs(i, j) = q(i, order[j]);
    }
    q_out = qs;
    return lam;
}

Vec eig_sym(const SymMat& a, double tol) {
    SymMat q;
    return eig_sym_full(a, tol, q);
}

// ---- operator assembly ----

namespace detail {

void eig_values(const SymMat& a, double* lam) {
    if (a.n == 2) {
        const double mean = 0.5 * (a.m[0][0] + a.m[1][1]);
        const double half = 0.5 * (a.m[0][0] - a.m[1][1]);
        const double rad = std::sqrt(half * half + a.m[0][1] * a.m[0][1]);
        lam[0] = mean - rad;
        lam[1] = mean + rad;
        return;
    }
    double d0 = a.m[0][0], d1 = a.m[1][1], d2 = a.m[2][2];
    double o01 = a.m[0][1], o02 = a.m[0][2], o12 = a.m[1][2];
    const double scale =
        std::max({1.0, std::fabs(d0), std::fabs(d1), std::fabs(d2)});
    const double tol2 = 1e-26 * scale * scale;
    for (int sweep = 0; sweep < 32; ++sweep) {
        if (o01 * o01 + o02 * o02 + o12 * o12 <= tol2) break;
        // rotate out (0,1)
        if (o01 != 0.0) {
            const double theta = 0.5 * (d1 - d0) / o01;
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
            const double n02 = c * o02 - s * o12, n12 = s * o02 + c * o12;
            d0 -= t * o01;
            d1 += t * o01;
            o01 = 0.0;
            o02 = n02;
            o12 = n12;
        }
        // rotate out (0,2)
        if (o02 != 0.0) {
            const double theta = 0.5 * (d2 - d0) / o02;
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
            const double n01 = c * o01 - s * o12, n12 = s * o01 + c * o12;
            d0 -= t * o02;
            d2 += t * o02;
            o02 = 0.0;
            o01 = n01;
            o12 = n12;
        }
        // rotate out (1,2)
        if (o12 != 0.0) {
            const double theta = 0.5 * (d2 - d1) / o12;
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
            const double n01 = c * o01 - s * o02, n02 = s * o01 + c * o02;
            d1 -= t * o12;
            d2 += t * o12;
            o12 = 0.0;
            o01 = n01;
            o02 = n02;
        }
    }
    if (d0 > d1) std::swap(d0, d1);
    if (d1 > d2) std::swap(d1, d2);
    if (d0 > d1) std::swap(d0, d1);
    lam[0] = d0;
    lam[1] = d1;
    lam[2] = d2;
}

namespace {

// closed-form symmetric 3x3 eigenvalues, ascending; non-iterative, accurate
// to ~1e-8 of the matrix scale — only ever paired with the tabulated
// envelope path, whose own resolution is far coarser
void eig3_closed(const SymMat& a, double* lam) {
    constexpr double third_turn = 2.0943951023931953;  // 2*pi/3
    const double a00 = a.m[0][0], a11 = a.m[1][1], a22 = a.m[2][2];
    const double a01 = a.m[0][1], a02 = a.m[0][2], a12 = a.m[1][2];
    const double q = (a00 + a11 + a22) / 3.0;
    const double b00 = a00 - q, b11 = a11 - q, b22 = a22 - q;
    const double p2 =
        b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * (a01 * a01 + a02 * a02 + a12 * a12);
    if (p2 <= 0.0) {
        lam[0] = lam[1] = lam[2] = q;
        return;
    }
    const double p = std::sqrt(p2 / 6.0);
    const double det = b00 * (b11 * b22 - a12 * a12) - a01 * (a01 * b22 - a12 * a02) +
                       a02 * (a01 * a12 - b11 * a02);
    const double r = std::clamp(0.5 * det / (p * p * p), -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double hi = q + 2.0 * p * std::cos(phi);
    const double lo = q + 2.0 * p * std::cos(phi + third_turn);
    lam[0] = lo;
    lam[1] = 3.0 * q - hi - lo;
    lam[2] = hi;
}

} // namespace

double operator_value_with(const Vec& p, const SymMat& hess, const EnvelopeTable& table,
                           double eps, double sigma, bool fast) {
    const SymMat g = gamma_eps(p, eps);
    const SymMat m = sandwich(g, hess);
    double lam[3];
    if (fast && m.n == 3)
        eig3_closed(m, lam);
    else
        eig_values(m, lam);
    const double fh = fast ? table.value_fast(lam) : table.value(lam);
    return fh + sigma * hess.trace();
}

// precondition: rp already validated (the stepping loop validates once)
double operator_value_core(const Vec& p, const SymMat& hess, const CurvatureSpec& cs,
                           const RegularizationParams& rp, bool fast) {
    return operator_value_with(p, hess, envelope_table(cs, ConeCut{rp.n_cut}), rp.eps,
                               rp.sigma, fast);
}

} // namespace detail

double operator_value_from(const Vec& p, const SymMat& hess, const CurvatureSpec& cs,
                           const RegularizationParams& rp) {
    validate(rp);
    return detail::operator_value_core(p, hess, cs, rp, false);
}

double operator_value(const ScalarField& f, long cell, const CurvatureSpec& cs,
                      const RegularizationParams& rp) {
    return operator_value_from(gradient_at(f, cell), hessian_at(f, cell), cs, rp);
}

// ---- plain-text exchange ----

void dump_field(const ScalarField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("grid dump: cannot open '" + path + "' for writing");
    char buf[64];
    out << f.spec.dims;
    for (int a = 0; a < f.spec.dims; ++a) out << ' ' << f.spec.shape[a];
    std::snprintf(buf, sizeof buf, "%.17g", f.spec.h);
    out << ' ' << buf;
    for (int a = 0; a < f.spec.dims; ++a) {
        std::snprintf(buf, sizeof buf, "%.17g", f.spec.origin[a]);
        out << ' ' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", f.far_value);
    out << ' ' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", f.spec.S);
    out << ' ' << buf << '\n';
    for (double v : f.values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << '\n';
    }
    if (!out) throw config_error("grid dump: write failure on '" + path + "'");
}

ScalarField read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("grid read: cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw config_error("grid read: missing header line");
    std::istringstream hs(header);
    GridSpec g;
    if (!(hs >> g.dims)) throw config_error("grid read: malformed header");
    if (g.dims < 2 || g.dims > 3) throw config_error("grid read: dims must be 2 or 3");
    for (int a = 0; a < g.dims; ++a)
        if (!(hs >> g.shape[a]) || g.shape[a] < 1)
            throw config_error("grid read: malformed shape");
    if (g.dims == 2) g.shape[2] = 1;
    if (!(hs >> g.h) || g.h <= 0.0) throw config_error("grid read: malformed spacing");
    for (int a = 0; a < g.dims; ++a)
        if (!(hs >> g.origin[a])) throw config_error("grid read: malformed origin");
    double far, S;
    if (!(hs >> far >> S)) throw config_error("grid read: malformed far_value/S");
    g.S = S;
    ScalarField f = ScalarField::constant(g, far);
    for (std::size_t c = 0; c < f.values.size(); ++c) {
        double v;
        if (!(in >> v))
            throw config_error("grid read: expected " + std::to_string(f.values.size()) +
                               " values, got " + std::to_string(c));
        if (!std::isfinite(v))
            throw config_error("grid read: non-finite value at cell " + std::to_string(c));
        f.values[c] = v;
    }
    return f;
}

} // namespace gcflow
