#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>

#include "baht/errors.hpp"
#include "baht/operator_matrix.hpp"

namespace baht {

inline constexpr double kBranchGuard = 1e-6;  // radians kept clear of +-pi

// exp(-i * phase_scale * H) for Hermitian H. dim 2 uses the closed form from
// the Pauli decomposition; larger dims go through the Hermitian eigensolver.
// The result is unitary by construction to machine precision.
inline OperatorMatrix mat_exp_hermitian(const OperatorMatrix& h, double phase_scale) {
  if (h.role() != MatrixRole::Hermitian)
    throw RoleError("mat_exp_hermitian requires a Hermitian-tagged operator");
  const Matrix& m = h.mat();
  const int d = h.dim();
  if (d == 2) {
    Complex a0 = 0.5 * m.trace();
    // Traceless part b . sigma: entries fix bx, by, bz.
    double bz = (0.5 * (m(0, 0) - m(1, 1))).real();
    double bx = m(0, 1).real();
    double by = -m(0, 1).imag();
    double b = std::sqrt(bx * bx + by * by + bz * bz);
    double sb = phase_scale * b;
    double c = std::cos(sb);
    // sin(sb)/b with a series fallback as b -> 0.
    double snb = (b > 1e-30) ? std::sin(sb) / b
                             : phase_scale * (1.0 - sb * sb / 6.0);
    Complex phase = std::exp(Complex(0, -phase_scale * a0.real()));
    Matrix u(2, 2);
    Complex i(0, 1);
    u(0, 0) = phase * (c - i * snb * bz);
    u(1, 1) = phase * (c + i * snb * bz);
    u(0, 1) = phase * (-i * snb * Complex(bx, -by));
    u(1, 0) = phase * (-i * snb * Complex(bx, by));
    return OperatorMatrix::unitary(std::move(u));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw Error(ErrorClass::Numerical, "eigensolver failed");
  Vector phases(d);
  for (int k = 0; k < d; ++k)
    phases(k) = std::exp(Complex(0, -phase_scale * es.eigenvalues()(k)));
  Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return OperatorMatrix::unitary(std::move(u));
}

struct UnitaryEigensystem {
  Matrix p;  // unitary eigenvector matrix, U = P D P^dagger
  Vector d;  // unit-modulus eigenvalues
};

// Eigendecomposition of a unitary. dim 2 uses the closed-form quadratic with
// a Cayley-Hamilton eigenvector (the columns of U - lambda2 I span the
// lambda1 eigenspace); larger dims use the complex Schur form, which is
// diagonal for normal input, so the Schur basis is the eigenbasis.
inline UnitaryEigensystem diagonalize_unitary(const OperatorMatrix& u) {
  if (u.role() != MatrixRole::Unitary)
    throw RoleError("diagonalize_unitary requires a Unitary-tagged operator");
  const Matrix& m = u.mat();
  const int d = u.dim();
  if (d == 2) {
    Complex tr = m.trace();
    Complex det = m.determinant();
    Complex disc = std::sqrt(tr * tr - 4.0 * det);
    Complex l1 = 0.5 * (tr + disc);
    Complex l2 = 0.5 * (tr - disc);
    Matrix k = m - l2 * Matrix::Identity(2, 2);
    double c0 = std::sqrt(std::norm(k(0, 0)) + std::norm(k(1, 0)));
    double c1 = std::sqrt(std::norm(k(0, 1)) + std::norm(k(1, 1)));
    UnitaryEigensystem sys;
    sys.p = Matrix::Identity(2, 2);
    sys.d = Vector(2);
    if (std::max(c0, c1) < 1e-14 * std::max(1.0, max_abs(m))) {
      // Scalar matrix: any basis diagonalizes it.
      sys.d << m(0, 0), m(1, 1);
      return sys;
    }
    Eigen::Vector2cd v1 = (c0 >= c1) ? Eigen::Vector2cd(k(0, 0), k(1, 0))
                                     : Eigen::Vector2cd(k(0, 1), k(1, 1));
    v1.normalize();
    Eigen::Vector2cd v2(-std::conj(v1(1)), std::conj(v1(0)));
    sys.p.col(0) = v1;
    sys.p.col(1) = v2;
    sys.d << l1, l2;
    return sys;
  }
  Eigen::ComplexSchur<Matrix> schur(m);
  if (schur.info() != Eigen::Success) throw Error(ErrorClass::Numerical, "Schur failed");
  UnitaryEigensystem sys;
  sys.p = schur.matrixU();
  sys.d = schur.matrixT().diagonal();
  return sys;
}

// Principal logarithm generator: Hermitian G with exp(-i G) = U and
// eigenvalues in (-pi + guard, pi - guard). Eigenphases inside the guard band
// around the +-pi branch cut are rejected.
//
// For dim 2 the rotation vector is read linearly off the entries of
// V = exp(-i phi) U = c I - i (s . sigma); this avoids the catastrophic loss
// of eigenphase accuracy the quadratic formula suffers when U is close to a
// scalar, which matters for generators extracted from near-identity unitaries.
inline OperatorMatrix principal_log_unitary(const OperatorMatrix& u) {
  if (u.dim() == 2) {
    if (u.role() != MatrixRole::Unitary)
      throw RoleError("principal_log_unitary requires a Unitary-tagged operator");
    const Matrix& m = u.mat();
    double phi = 0.5 * std::arg(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    Matrix v = std::exp(Complex(0, -phi)) * m;
    double c = 0.5 * (v(0, 0).real() + v(1, 1).real());
    double sx = -0.5 * (v(0, 1).imag() + v(1, 0).imag());
    double sy = 0.5 * (v(1, 0).real() - v(0, 1).real());
    double sz = 0.5 * (v(1, 1).imag() - v(0, 0).imag());
    double r = std::sqrt(sx * sx + sy * sy + sz * sz);
    double theta = std::atan2(r, c);
    // U = exp(i phi) exp(-i theta n.sigma), so G = -phi I + theta n.sigma.
    if (std::abs(-phi + theta) <= M_PI - kBranchGuard &&
        std::abs(-phi - theta) <= M_PI - kBranchGuard) {
      double f = r > 0 ? theta / r : 1.0;
      Matrix g(2, 2);
      g(0, 0) = Complex(-phi + f * sz, 0);
      g(1, 1) = Complex(-phi - f * sz, 0);
      g(0, 1) = Complex(f * sx, -f * sy);
      g(1, 0) = Complex(f * sx, f * sy);
      return OperatorMatrix::hermitian(std::move(g));
    }
    // phases of this decomposition leave the principal window; the general
    // route below resolves the wrap or rejects at the cut
  }
  UnitaryEigensystem sys = diagonalize_unitary(u);
  const int d = u.dim();
  Eigen::VectorXd theta(d);
  for (int k = 0; k < d; ++k) {
    double phase = -std::arg(sys.d(k));  // lambda = exp(-i theta)
    if (std::abs(phase) > M_PI - kBranchGuard)
      throw BranchCutError("eigenphase within guard band of the +-pi branch cut");
    theta(k) = phase;
  }
  Matrix g = sys.p * theta.asDiagonal().toDenseMatrix().cast<Complex>() * sys.p.adjoint();
  return OperatorMatrix::hermitian(std::move(g));
}

}  // namespace baht
