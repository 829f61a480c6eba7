#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "baht/errors.hpp"
#include "baht/operator_matrix.hpp"

namespace baht {

// Spin operators for a dim-level system (spin J = (dim-1)/2), hbar = 1.
// dim 2 gives the Pauli matrices over 2.
struct SpinBasis {
  int dim;
  OperatorMatrix sx;
  OperatorMatrix sy;
  OperatorMatrix sz;
  OperatorMatrix identity;
};

inline SpinBasis spin_operators(int dim) {
  if (dim < 2) throw InvalidArgument("spin_operators requires dim >= 2");
  double j = 0.5 * (dim - 1);
  Matrix sz = Matrix::Zero(dim, dim);
  Matrix sp = Matrix::Zero(dim, dim);  // raising operator
  for (int k = 0; k < dim; ++k) {
    double m = j - k;  // basis ordered m = J..-J
    sz(k, k) = m;
    if (k > 0) {
      double mlow = j - k;
      sp(k - 1, k) = std::sqrt(j * (j + 1) - mlow * (mlow + 1));
    }
  }
  Matrix sx = 0.5 * (sp + sp.adjoint().eval());
  Matrix sy = Complex(0, -0.5) * (sp - sp.adjoint().eval());
  return SpinBasis{dim, OperatorMatrix::hermitian(sx), OperatorMatrix::hermitian(sy),
                   OperatorMatrix::hermitian(sz),
                   OperatorMatrix::unitary(Matrix::Identity(dim, dim))};
}

// n . S for a unit axis n.
inline Matrix axis_dot_spin(const Eigen::Vector3d& axis, const SpinBasis& basis) {
  return axis.x() * basis.sx.mat() + axis.y() * basis.sy.mat() + axis.z() * basis.sz.mat();
}

}  // namespace baht
