/*
 * common.hpp — shared numeric tolerances and small helpers.
 *
 * Everything downstream compares complex matrices against these two
 * tolerances:
 *   algebra_tol — closed-form identities (hermiticity, trace, overlaps)
 *   branch_tol  — statistical weights below this count as "does not occur"
 */
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace reldec {

using complexd = std::complex<double>;
using cvector = Eigen::VectorXcd;
using cmatrix = Eigen::MatrixXcd;

// Double-precision dense algebra at total dimension <= 4096 keeps
// accumulated rounding well below this.
inline constexpr double algebra_tol = 1e-10;

// Weights at or below this are treated as non-occurring events;
// conditioning on them is an error rather than a silent zero state.
inline constexpr double branch_tol = 1e-12;

// Dense representation only; refuse anything larger.
inline constexpr int max_total_dim = 4096;

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const cmatrix& m, double tol = algebra_tol) {
    return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

// Probabilities computed as quadratic forms can stick out of [0,1] by
// rounding; clamp after checking the excursion is harmlessly small.
inline double clamp_probability(double p) {
    if (p < 0.0) return 0.0;
    if (p > 1.0) return 1.0;
    return p;
}

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace reldec
