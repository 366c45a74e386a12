#pragma once
#include <array>
#include <string>
#include <vector>

#include "gcflow/curvature.hpp"
#include "gcflow/linalg.hpp"

namespace gcflow {

// Regularization knobs of the approximate flow: gradient-smoothing scale for
// the projection matrix, cone truncation level, linear diffusion weight.
struct RegularizationParams {
    double eps = 1e-2;  // in (0,1)
    int n_cut = 2;      // >= 2
    double sigma = 0.0; // >= 0
};

// throws parameter_error when a field is out of range
void validate(const RegularizationParams& p);

struct GridSpec {
    int dims = 2;
    std::array<int, 3> shape{0, 0, 1}; // cells per axis; shape[2] == 1 in 2d
    double h = 0.0;                    // uniform spacing
    std::array<double, 3> origin{0.0, 0.0, 0.0}; // center of cell (0,0,0)
    double S = 0.0; // truncation radius: cells with |x| >= S hold far_value
};

// Uniform-grid scalar sample set, x-fastest row-major storage.
struct ScalarField {
    GridSpec spec;
    double far_value = 0.0;
    std::vector<double> values;

    static ScalarField constant(const GridSpec& g, double value);

    long size() const;
    long idx(int i, int j, int k = 0) const;
    void coords(long cell, int& i, int& j, int& k) const;
    Vec cell_center(int i, int j, int k = 0) const;
    Vec cell_center(long cell) const;
    // at least one cell away from every array edge (stencils fit)
    bool interior(long cell) const;
    // |x| >= S: pinned to far_value, never stepped
    bool far_cell(long cell) const;
};

// overwrite every far cell with far_value (restores the field invariant)
void pin_far_cells(ScalarField& f);

// second-order central differences; non-interior cell -> stencil_error
Vec gradient_at(const ScalarField& f, long cell);
SymMat hessian_at(const ScalarField& f, long cell);

// Smoothed projection transverse to p: gamma_ik = delta_ik - p_i p_k / d with
// d = eps*sqrt(eps^2+|p|^2) + eps^2 + |p|^2.  Smooth in p for eps > 0 and
// satisfies gamma*gamma = I - p p^T/(eps^2+|p|^2) identically.
SymMat gamma_eps(const Vec& p, double eps);

// Cyclic Jacobi eigenvalues, nondecreasing; input must be symmetric within
// 1e-12 (else parameter_error).  eig_sym_full also accumulates the rotation.
Vec eig_sym(const SymMat& a, double tol = 1e-12);
Vec eig_sym_full(const SymMat& a, double tol, SymMat& q_out);

// The pointwise flow operator: envelope of the curvature function evaluated
// on the eigenvalues of gamma D2u gamma, plus sigma * trace(D2u).
double operator_value(const ScalarField& f, long cell, const CurvatureSpec& cs,
                      const RegularizationParams& rp);

// Synthetic entry point: same composition from a given gradient and Hessian,
// decoupling algebra from discretization in tests.
double operator_value_from(const Vec& p, const SymMat& hess, const CurvatureSpec& cs,
                           const RegularizationParams& rp);

// Plain-text grid exchange format.  Line 1: dims, shape (dims entries), h,
// origin (dims entries), far_value, S; then one value per line, 17
// significant digits, row-major.  Malformed input -> config_error.
void dump_field(const ScalarField& f, const std::string& path);
ScalarField read_field(const std::string& path);

namespace detail {

class EnvelopeTable;

// fast=true uses the tabulated envelope path on the infeasible branch
// (identical in 2d, approximate along the truncation seam in 3d); the public
// entry points always evaluate exactly.
double operator_value_core(const Vec& p, const SymMat& hess, const CurvatureSpec& cs,
                           const RegularizationParams& rp, bool fast);

// same composition against an already-resolved envelope table (the stepping
// loop hoists the table lookup out of its cell loop)
double operator_value_with(const Vec& p, const SymMat& hess, const EnvelopeTable& table,
                           double eps, double sigma, bool fast);

// ascending eigenvalues without eigenvectors or input validation; same Jacobi
// iteration as eig_sym but unrolled for the stepping loop
void eig_values(const SymMat& a, double* lam);

} // namespace detail

} // namespace gcflow
