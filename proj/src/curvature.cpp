#include "gcflow/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gcflow/envelope_table.hpp"
#include "gcflow/errors.hpp"

namespace gcflow {

namespace {

long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

void check_spec(const CurvatureSpec& s) {
    if (s.dim < 2 || s.dim > 3)
        throw parameter_error("curvature spec: dim must be 2 or 3, got " + std::to_string(s.dim));
    if (s.k < 1 || s.k > s.dim)
        throw parameter_error("curvature spec: need 1 <= k <= dim");
    if (s.family == CurvatureFamily::quotient && (s.l < 1 || s.l >= s.k))
        throw parameter_error("curvature spec: quotient needs 1 <= l < k");
}

void check_arity(const CurvatureSpec& s, std::span<const double> kappa) {
    if (static_cast<int>(kappa.size()) != s.dim)
        throw parameter_error("curvature spec: argument has " + std::to_string(kappa.size()) +
                              " components, spec dim is " + std::to_string(s.dim));
}

// real branch of x^(1/p) for x possibly negative and p odd; even p keeps the
// formula value (NaN outside the cone, which callers guard against)
double root_p(double x, int p) {
    if (p == 1) return x;
    if (x >= 0.0) return std::pow(x, 1.0 / p);
    if (p % 2 == 1) return -std::pow(-x, 1.0 / p);
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

namespace detail {

double eval_with_grad(const CurvatureSpec& spec, const double* kappa, double* grad) {
    const int n = spec.dim;
    std::span<const double> kv(kappa, static_cast<std::size_t>(n));
    if (spec.family == CurvatureFamily::sigma_k) {
        double sk = sigma_without(kv, spec.k, -1);
        double f = root_p(sk * spec.normalization(), spec.k);
        for (int i = 0; i < n; ++i)
            grad[i] = f * sigma_without(kv, spec.k - 1, i) / (spec.k * sk);
        return f;
    }
    double sk = sigma_without(kv, spec.k, -1);
    double sl = sigma_without(kv, spec.l, -1);
    double f = root_p(sk / sl * spec.normalization(), spec.k - spec.l);
    for (int i = 0; i < n; ++i) {
        double dk = sigma_without(kv, spec.k - 1, i);
        double dl = sigma_without(kv, spec.l - 1, i);
        grad[i] = f / (spec.k - spec.l) * (dk / sk - dl / sl);
    }
    return f;
}

void elementary_symmetric(std::span<const double> vals, int deg, double* out) {
    for (int j = 0; j <= deg; ++j) out[j] = (j == 0) ? 1.0 : 0.0;
    for (double x : vals)
        for (int j = deg; j >= 1; --j) out[j] += x * out[j - 1];
}

double sigma_without(std::span<const double> kappa, int deg, int skip) {
    double e[4];
    if (skip < 0) {
        elementary_symmetric(kappa, deg, e);
        return e[deg];
    }
    double buf[3];
    int m = 0;
    for (int i = 0; i < static_cast<int>(kappa.size()); ++i)
        if (i != skip) buf[m++] = kappa[i];
    elementary_symmetric(std::span<const double>(buf, static_cast<std::size_t>(m)), deg, e);
    return e[deg];
}

} // namespace detail

CurvatureSpec CurvatureSpec::sigma(int k, int dim) {
    CurvatureSpec s;
    s.family = CurvatureFamily::sigma_k;
    s.k = k;
    s.l = 0;
    s.dim = dim;
    check_spec(s);
    return s;
}

CurvatureSpec CurvatureSpec::sigma_quotient(int k, int l, int dim) {
    CurvatureSpec s;
    s.family = CurvatureFamily::quotient;
    s.k = k;
    s.l = l;
    s.dim = dim;
    check_spec(s);
    return s;
}

double CurvatureSpec::normalization() const {
    if (family == CurvatureFamily::sigma_k)
        return 1.0 / static_cast<double>(binom(dim, k));
    // quotient: scale so that f(1,...,1) = 1
    return static_cast<double>(binom(dim, l)) / static_cast<double>(binom(dim, k));
}

double eval_f(const CurvatureSpec& spec, std::span<const double> kappa) {
    check_spec(spec);
    check_arity(spec, kappa);
    if (spec.family == CurvatureFamily::sigma_k) {
        double sk = detail::sigma_without(kappa, spec.k, -1);
        return root_p(sk * spec.normalization(), spec.k);
    }
    double sk = detail::sigma_without(kappa, spec.k, -1);
    double sl = detail::sigma_without(kappa, spec.l, -1);
    if (sl == 0.0)
        throw cone_error("cone violation: quotient denominator sigma_l vanishes");
    return root_p(sk / sl * spec.normalization(), spec.k - spec.l);
}

bool cone_membership(const CurvatureSpec& spec, std::span<const double> kappa) {
    check_spec(spec);
    check_arity(spec, kappa);
    double e[4];
    detail::elementary_symmetric(kappa, spec.k, e);
    for (int j = 1; j <= spec.k; ++j)
        if (!(e[j] > 0.0)) return false;
    return true;
}

bool cone_membership(const CurvatureSpec& spec, std::span<const double> kappa, const ConeCut& cut) {
    if (cut.n_cut <= 1) throw parameter_error("cone cut: n_cut must exceed 1");
    if (!cone_membership(spec, kappa)) return false;
    double mx = *std::max_element(kappa.begin(), kappa.end());
    return eval_f(spec, kappa) > 1.0 / cut.n_cut && mx < static_cast<double>(cut.n_cut);
}

std::vector<double> grad_f(const CurvatureSpec& spec, std::span<const double> kappa) {
    if (!cone_membership(spec, kappa))
        throw cone_error("cone violation: gradient requested outside the admissibility cone");
    std::vector<double> g(static_cast<std::size_t>(spec.dim));
    detail::eval_with_grad(spec, kappa.data(), g.data());
    return g;
}

double envelope_fhat(const CurvatureSpec& spec, std::span<const double> tau, const ConeCut& cut) {
    check_spec(spec);
    check_arity(spec, tau);
    if (cut.n_cut <= 1) throw parameter_error("cone cut: n_cut must exceed 1");
    return detail::envelope_table(spec, cut).value(tau.data());
}

std::vector<double> envelope_grad(const CurvatureSpec& spec, std::span<const double> tau, const ConeCut& cut) {
    check_spec(spec);
    check_arity(spec, tau);
    if (cut.n_cut <= 1) throw parameter_error("cone cut: n_cut must exceed 1");
    std::vector<double> g(static_cast<std::size_t>(spec.dim));
    detail::envelope_table(spec, cut).value_grad(tau.data(), g.data());
    return g;
}

double envelope_lipschitz(const CurvatureSpec& spec, const ConeCut& cut) {
    check_spec(spec);
    if (cut.n_cut <= 1) throw parameter_error("cone cut: n_cut must exceed 1");
    return detail::envelope_table(spec, cut).lipschitz();
}

} // namespace gcflow
