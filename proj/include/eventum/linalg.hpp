// linalg.hpp — dense complex matrix aliases and small numeric helpers

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <complex>

namespace eventum {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Largest absolute entry (max norm).
inline double max_abs(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const Matrix& a) {
    return max_abs(a - a.adjoint());
}

inline bool is_hermitian(const Matrix& a, double tol) {
    return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

/// (A + A†)/2, used after integrator steps and when assembling Λ sums.
inline Matrix hermitize(const Matrix& a) {
    return 0.5 * (a + a.adjoint());
}

/// Smallest eigenvalue of a Hermitian matrix (PSD monitoring).
inline double min_eigenvalue(const Matrix& hermitian) {
    if (hermitian.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(hermitian),
                                                 Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

/// Trace norm ‖A‖₁ = sum of singular values.
inline double trace_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().sum();
}

inline double norm_sq(const Vector& v) { return v.squaredNorm(); }

}  // namespace eventum
