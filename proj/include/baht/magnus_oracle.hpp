#pragma once

#include <vector>

#include "baht/errors.hpp"
#include "baht/operator_matrix.hpp"
#include "baht/sequence.hpp"

namespace baht {

// Direct Riemann evaluation of the order-m nested Magnus integrals (m <= 3)
// for the piecewise-constant generator O(t) = -i H(t):
//   Omega_1 = int O
//   Omega_2 = 1/2 int_{t2<t1} [O(t1), O(t2)]
//   Omega_3 = 1/6 int_{t3<t2<t1} ([O1,[O2,O3]] + [[O1,O2],O3])
// Returns i * Omega_m, the Hermitian phase matrix, so order 1 equals
// hbar1(frames).matrix * t_total. The strict-simplex sums skip the diagonal
// cells, so the error falls off as O(1/steps); order 1 and 2 are exact for
// piecewise-constant input. Inner sums are folded into prefix accumulators,
// which keeps the cost at O(cells^2) for m = 3.
inline Matrix nested_integral_oracle(const std::vector<FrameInterval>& frames, int m,
                                     int steps_per_tau = 200) {
  if (frames.empty()) throw InvalidArgument("frame list is empty");
  if (m < 1 || m > 3) throw InvalidArgument("nested_integral_oracle supports m in 1..3");
  if (steps_per_tau < 200) throw InvalidArgument("steps_per_tau must be at least 200");

  const int d = frames.front().hamiltonian.dim();
  double tau_min = frames.front().duration;
  for (const FrameInterval& f : frames) tau_min = std::min(tau_min, f.duration);

  // One entry per grid cell: generator index and cell width.
  std::vector<int> cell_frame;
  std::vector<double> cell_h;
  std::vector<Matrix> ops;
  ops.reserve(frames.size());
  for (size_t k = 0; k < frames.size(); ++k) {
    ops.push_back(Complex(0, -1) * frames[k].hamiltonian.mat());
    int cells = static_cast<int>(std::lround(steps_per_tau * frames[k].duration / tau_min));
    if (cells < 1) cells = 1;
    double h = frames[k].duration / cells;
    for (int c = 0; c < cells; ++c) {
      cell_frame.push_back(static_cast<int>(k));
      cell_h.push_back(h);
    }
  }
  const int n = static_cast<int>(cell_frame.size());

  if (m == 1) {
    Matrix acc = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) acc += cell_h[i] * ops[cell_frame[i]];
    return Complex(0, 1) * acc;
  }

  if (m == 2) {
    Matrix acc = Matrix::Zero(d, d);
    Matrix a = Matrix::Zero(d, d);  // prefix sum of O h
    Matrix oi(d, d);
    for (int i = 0; i < n; ++i) {
      oi = cell_h[i] * ops[cell_frame[i]];
      acc.noalias() += oi * a;
      acc.noalias() -= a * oi;
      a += oi;
    }
    return Complex(0, 0.5) * acc;
  }

  // m == 3. Prefix arrays: a[j] = sum_{k<j} O_k h_k and w = running
  // sum_{j<i} [O_j, a[j]] h_j for the right-nested part.
  std::vector<Matrix> a(n);
  {
    Matrix run = Matrix::Zero(d, d);
    for (int j = 0; j < n; ++j) {
      a[j] = run;
      run += cell_h[j] * ops[cell_frame[j]];
    }
  }
  Matrix term1 = Matrix::Zero(d, d);
  Matrix term2 = Matrix::Zero(d, d);
  Matrix w = Matrix::Zero(d, d);
  Matrix comm(d, d), tmp(d, d);
  for (int i = 0; i < n; ++i) {
    const Matrix& oi = ops[cell_frame[i]];
    double hi = cell_h[i];
    term1.noalias() += hi * (oi * w);
    term1.noalias() -= hi * (w * oi);
    for (int j = 0; j < i; ++j) {
      const Matrix& oj = ops[cell_frame[j]];
      double hj = cell_h[j];
      comm.noalias() = oi * oj;
      comm.noalias() -= oj * oi;
      tmp.noalias() = comm * a[j];
      tmp.noalias() -= a[j] * comm;
      term2 += (hi * hj) * tmp;
    }
    // grow w by the i-th contribution for later outer indices
    comm.noalias() = oi * a[i];
    comm.noalias() -= a[i] * oi;
    w += hi * comm;
  }
  return Complex(0, 1.0 / 6.0) * (term1 + term2);
}

}  // namespace baht
