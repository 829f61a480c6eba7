#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "baht/errors.hpp"

namespace baht {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;

enum class MatrixRole { General, Hermitian, Unitary };

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

// Dense complex operator on a dim-level system. The role tag is a checked
// promise: Hermitian and Unitary wrappers validate on construction.
// Tolerances are scaled by the entry magnitude so MHz-scale generators do not
// trip on bare roundoff.
class OperatorMatrix {
 public:
  OperatorMatrix() : m_(Matrix::Zero(2, 2)), role_(MatrixRole::General) {}

  static OperatorMatrix general(Matrix m) {
    check_shape(m);
    return OperatorMatrix(std::move(m), MatrixRole::General);
  }

  static OperatorMatrix hermitian(Matrix m) {
    check_shape(m);
    double scale = std::max(1.0, max_abs(m));
    if (max_abs_diff(m, m.adjoint()) > kHermitianTol * scale)
      throw RoleError("matrix is not Hermitian within tolerance");
    // Symmetrize so downstream identities hold exactly.
    Matrix h = 0.5 * (m + m.adjoint().eval());
    return OperatorMatrix(std::move(h), MatrixRole::Hermitian);
  }

  static OperatorMatrix unitary(Matrix m) {
    check_shape(m);
    Matrix gram = m.adjoint() * m;
    gram -= Matrix::Identity(m.rows(), m.cols());
    if (max_abs(gram) > kUnitaryTol)
      throw RoleError("matrix is not unitary within tolerance");
    return OperatorMatrix(std::move(m), MatrixRole::Unitary);
  }

  const Matrix& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  MatrixRole role() const { return role_; }

 private:
  OperatorMatrix(Matrix m, MatrixRole role) : m_(std::move(m)), role_(role) {}

  static void check_shape(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() < 2)
      throw InvalidArgument("operator matrix must be square with dim >= 2");
  }

  Matrix m_;
  MatrixRole role_;
};

// Largest singular value. dim 2 is closed form; larger dims go through SVD.
inline double spectral_norm(const Matrix& a) {
  if (a.rows() == 2 && a.cols() == 2) {
    // Largest Gram-matrix eigenvalue as mean + deviation; the deviation is a
    // sum of squares, so degenerate singular values stay full precision.
    Matrix b = a.adjoint() * a;
    double mean = 0.5 * (b(0, 0).real() + b(1, 1).real());
    double dx = 0.5 * (b(0, 0).real() - b(1, 1).real());
    double dev = std::sqrt(dx * dx + std::norm(b(0, 1)));
    return std::sqrt(std::max(0.0, mean + dev));
  }
  if (max_abs(a) == 0.0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

inline double spectral_norm(const OperatorMatrix& a) { return spectral_norm(a.mat()); }

// Hilbert-Schmidt inner product Tr(A^dagger B).
inline Complex hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("hs_inner requires matching shapes");
  return (a.adjoint() * b).trace();
}

inline Complex hs_inner(const OperatorMatrix& a, const OperatorMatrix& b) {
  return hs_inner(a.mat(), b.mat());
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

// |<psi| Ua^dagger Ub |psi>|^2 for a normalized state.
inline double state_fidelity(const Vector& psi, const Matrix& ua, const Matrix& ub) {
  if (psi.size() != ua.rows() || ua.rows() != ub.rows())
    throw InvalidArgument("state_fidelity dimension mismatch");
  double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-9) throw InvalidArgument("state must be normalized");
  Complex amp = psi.adjoint() * (ua.adjoint() * (ub * psi));
  return std::norm(amp);
}

inline double state_fidelity(const Vector& psi, const OperatorMatrix& ua,
                             const OperatorMatrix& ub) {
  return state_fidelity(psi, ua.mat(), ub.mat());
}

}  // namespace baht
