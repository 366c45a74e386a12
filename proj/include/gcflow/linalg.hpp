#pragma once
#include <array>
#include <cstddef>

namespace gcflow {

// fixed-capacity vector/matrix for 2x2 and 3x3 work; n is the live dimension
struct Vec {
    int n = 0;
    std::array<double, 3> v{0.0, 0.0, 0.0};

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);

// dense symmetric matrix, stored full for simple indexing
struct SymMat {
    int n = 0;
    std::array<std::array<double, 3>, 3> m{};

    double& operator()(int i, int j) { return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    double operator()(int i, int j) const { return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

    static SymMat identity(int n);
    double trace() const;
};

// c = a * b * a for symmetric a, b (the projected Hessian product)
SymMat sandwich(const SymMat& a, const SymMat& b);

} // namespace gcflow
