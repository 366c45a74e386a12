#pragma once
#include <span>
#include <vector>

namespace gcflow {

enum class CurvatureFamily {
    sigma_k,  // normalized k-th elementary symmetric root: (sigma_k / C(n,k))^(1/k)
    quotient, // normalized (sigma_k / sigma_l)^(1/(k-l))
};

// A symmetric, concave, degree-one homogeneous curvature function f with
// f(1,...,1) = 1, positive and monotone inside its admissibility cone K
// (sigma_j > 0 for j <= k) and vanishing on the cone boundary.
struct CurvatureSpec {
    CurvatureFamily family = CurvatureFamily::sigma_k;
    int k = 1;
    int l = 0; // quotient denominator index, 0 for sigma_k family
    int dim = 2;

    static CurvatureSpec sigma(int k, int dim);
    static CurvatureSpec sigma_quotient(int k, int l, int dim);

    // scale constant making f(1,...,1) exactly 1
    double normalization() const;

    bool operator==(const CurvatureSpec&) const = default;
};

// Truncation of the cone used when extending f concavely to all of R^n:
// the retained set is { f > 1/n_cut, max component < n_cut }.
struct ConeCut {
    int n_cut = 2;
};

// f(kappa).  Defined by the algebraic formula; meaningful only for kappa in
// the closed cone.  Quotient family throws cone_error when sigma_l == 0.
double eval_f(const CurvatureSpec& spec, std::span<const double> kappa);

// Df(kappa).  Requires kappa strictly inside the cone (throws cone_error).
std::vector<double> grad_f(const CurvatureSpec& spec, std::span<const double> kappa);

// Open-cone membership; with `cut`, membership in the truncated region.
bool cone_membership(const CurvatureSpec& spec, std::span<const double> kappa);
bool cone_membership(const CurvatureSpec& spec, std::span<const double> kappa, const ConeCut& cut);

// Concave envelope of the tangent planes of f over the truncated region,
// evaluated at arbitrary tau.  Coincides with f on the truncated region,
// is concave, componentwise nondecreasing and Lipschitz, and vanishes at 0.
double envelope_fhat(const CurvatureSpec& spec, std::span<const double> tau, const ConeCut& cut);

// Supergradient of the envelope at tau (gradient of the active tangent plane).
std::vector<double> envelope_grad(const CurvatureSpec& spec, std::span<const double> tau, const ConeCut& cut);

// max |Df| (Euclidean) over the truncated region; the envelope's Lipschitz
// constant and the diffusion scale entering the time-step bound.
double envelope_lipschitz(const CurvatureSpec& spec, const ConeCut& cut);

namespace detail {

// elementary symmetric polynomials e_0..e_deg of the given values
void elementary_symmetric(std::span<const double> vals, int deg, double* out);

// sigma_{deg}(kappa with component `skip` removed); skip < 0 keeps all
double sigma_without(std::span<const double> kappa, int deg, int skip);

// f and Df in one pass, no validation, no allocation; kappa must lie
// strictly inside the cone.  Returns f, writes Df into grad[0..dim).
double eval_with_grad(const CurvatureSpec& spec, const double* kappa, double* grad);

} // namespace detail

} // namespace gcflow
