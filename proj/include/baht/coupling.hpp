#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "baht/errors.hpp"
#include "baht/matrix_functions.hpp"
#include "baht/operator_matrix.hpp"
#include "baht/parallel.hpp"
#include "baht/propagation.hpp"
#include "baht/sequence.hpp"
#include "baht/spin.hpp"

namespace baht {

enum class CouplingMethod { AHT1, Exact };

// Sensor response to the perturbation over one run of total time t.
// components are the cosine projections of the epsilon-normalized effective
// perturbation Hamiltonian onto (S_x, S_y, S_z); alpha is their quadrature
// sum. h_eff_per_eps_hz is that normalized operator, so a perfectly tracked
// S_z field gives h_eff_per_eps_hz == S_z and alpha == 1. For pulse-defined
// sequences the components are reported in the lab frame at sequence end;
// alpha itself is frame-independent.
struct CouplingResult {
  double t = 0;
  double alpha = 0;
  std::array<double, 3> components{0, 0, 0};
  OperatorMatrix h_eff_per_eps_hz;
  double epsilon_used_hz = 0;
  CouplingMethod method = CouplingMethod::AHT1;
};

namespace detail {

// Cosine projections of h (per unit epsilon) onto the spin components,
// normalized by the perturbation shape V: a_i = Tr(h S_i) / sqrt(Tr(V V) Tr(S_i S_i)).
inline CouplingResult project_components(const Matrix& h_per_eps, const OperatorMatrix& axis_op,
                                         double t, double eps_used, CouplingMethod method) {
  const int d = static_cast<int>(h_per_eps.rows());
  SpinBasis basis = spin_operators(d);
  double v_norm2 = hs_inner(axis_op.mat(), axis_op.mat()).real();
  if (v_norm2 <= 0) throw InvalidArgument("perturbation axis operator has zero norm");
  const Matrix* comps[3] = {&basis.sx.mat(), &basis.sy.mat(), &basis.sz.mat()};
  CouplingResult r;
  r.t = t;
  r.epsilon_used_hz = eps_used;
  r.method = method;
  double sum2 = 0;
  for (int i = 0; i < 3; ++i) {
    double s_norm2 = hs_inner(*comps[i], *comps[i]).real();
    double a = hs_inner(h_per_eps, *comps[i]).real() / std::sqrt(v_norm2 * s_norm2);
    r.components[i] = a;
    sum2 += a * a;
  }
  r.alpha = std::sqrt(sum2);
  r.h_eff_per_eps_hz = OperatorMatrix::hermitian(h_per_eps);
  return r;
}

}  // namespace detail

// First-order average: duration-weighted mean of the sign-patterned toggled
// perturbation operator. Independent of both H0 and epsilon.
inline CouplingResult alpha_aht1(const PulseSequence& seq, const PerturbationModel& pert) {
  if (pert.kind == PerturbationKind::None)
    throw InvalidArgument("alpha needs a DC or AC perturbation");
  std::vector<FrameInterval> v = toggled_operator_frames(seq, pert.axis_operator);
  Matrix mean = Matrix::Zero(seq.dim(), seq.dim());
  double t = 0;
  for (const FrameInterval& f : v) {
    int s = (pert.kind == PerturbationKind::DC) ? 1 : pert.pattern(f.index);
    mean += (s * f.duration) * f.hamiltonian.mat();
    t += f.duration;
  }
  mean /= t;
  return detail::project_components(mean, pert.axis_operator, t, 0.0, CouplingMethod::AHT1);
}

// Propagator with the perturbation on, referenced to the unperturbed run:
// U_eps = U_on U_off^dagger.
inline OperatorMatrix u_epsilon(const PulseSequence& seq, const OperatorMatrix& h0_hz,
                                const PerturbationModel& pert) {
  Matrix on = exact_unitary(seq, h0_hz, pert).mat();
  Matrix off = exact_unitary(seq, h0_hz).mat();
  return OperatorMatrix::unitary(on * off.adjoint());
}

// Hermitian generator of u over time t, in Hz: exp(-i 2 pi H t) == u.
inline OperatorMatrix effective_hamiltonian(const OperatorMatrix& u, double t) {
  if (t <= 0) throw InvalidArgument("t must be positive");
  OperatorMatrix g = principal_log_unitary(u);
  return OperatorMatrix::hermitian(g.mat() / (kTwoPi * t));
}

// Exact route: effective perturbation Hamiltonian from the principal log of
// U_eps, validated by an epsilon/2 rerun. Nonlinear response at the working
// epsilon raises LinearityError; callers retry with a smaller epsilon.
inline CouplingResult alpha_exact(const PulseSequence& seq, const OperatorMatrix& h0_hz,
                                  const PerturbationModel& pert) {
  if (pert.kind == PerturbationKind::None)
    throw InvalidArgument("alpha needs a DC or AC perturbation");
  double eps = pert.epsilon_hz;
  double t = seq.total_time();
  if (eps <= 0) throw InvalidArgument("epsilon must be positive");
  if (kTwoPi * eps * t > 0.1)
    throw InvalidArgument("epsilon too large for log-based extraction: 2 pi eps t > 0.1");

  auto at_eps = [&](double e) {
    PerturbationModel p = pert;
    p.epsilon_hz = e;
    Matrix h = effective_hamiltonian(u_epsilon(seq, h0_hz, p), t).mat() / e;
    return detail::project_components(h, pert.axis_operator, t, e, CouplingMethod::Exact);
  };
  CouplingResult full = at_eps(eps);
  CouplingResult half = at_eps(eps / 2);
  if (std::abs(full.alpha - half.alpha) > 1e-6 * std::max(1.0, std::abs(full.alpha)))
    throw LinearityError("alpha not linear in epsilon at eps=" + std::to_string(eps) +
                         " Hz: " + std::to_string(full.alpha) + " vs " +
                         std::to_string(half.alpha) + " at eps/2");
  return full;
}

// Exact-route sweep over total times. Each point rescales the sequence,
// picks epsilon so 2 pi eps t == 0.01, and halves it (up to 16 times) if the
// linearity check fails.
inline std::vector<CouplingResult> alpha_sweep(const PulseSequence& seq,
                                               const OperatorMatrix& h0_hz,
                                               PerturbationKind kind,
                                               const std::vector<double>& t_grid) {
  if (kind == PerturbationKind::None)
    throw InvalidArgument("alpha needs a DC or AC perturbation");
  std::vector<CouplingResult> rows(t_grid.size());
  parallel_for_index(static_cast<int>(t_grid.size()), [&](int i) {
    PulseSequence scaled = seq.scaled_to_total_time(t_grid[i]);
    PerturbationModel pert = (kind == PerturbationKind::DC)
                                 ? PerturbationModel::dc(1.0, seq.dim())
                                 : PerturbationModel::ac(
                                       1.0, default_sign_pattern(kind, scaled), seq.dim());
    pert.epsilon_hz = 0.01 / (kTwoPi * t_grid[i]);
    for (int attempt = 0;; ++attempt) {
      try {
        rows[i] = alpha_exact(scaled, h0_hz, pert);
        return;
      } catch (const LinearityError&) {
        if (attempt >= 16) throw;
        pert.epsilon_hz /= 2;
      }
    }
  });
  return rows;
}

}  // namespace baht
