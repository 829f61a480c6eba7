#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "baht/errors.hpp"
#include "baht/magnus.hpp"
#include "baht/matrix_functions.hpp"
#include "baht/operator_matrix.hpp"
#include "baht/parallel.hpp"
#include "baht/sequence.hpp"
#include "baht/spin.hpp"

namespace baht {

enum class PerturbationKind { None, DC, ACSquare };

// Per-frame sign of the perturbation, as a function of the 1-based frame
// index. Square-wave patterns are first-class so sequences whose echo blocks
// span several frames can align the wave with the block boundary.
struct SignPattern {
  std::function<int(int)> fn;
  std::string description;

  int operator()(int index_1based) const { return fn ? fn(index_1based) : 1; }

  static SignPattern constant() {
    return SignPattern{[](int) { return 1; }, "constant"};
  }
  // (-1)^k over 1-based frame index k.
  static SignPattern alternating() {
    return SignPattern{[](int k) { return (k % 2 == 0) ? 1 : -1; }, "alternating"};
  }
  // +1 on the first half of each period of `frames_per_period` frames, -1 on
  // the second half.
  static SignPattern half_period_blocks(int frames_per_period) {
    if (frames_per_period < 2 || frames_per_period % 2 != 0)
      throw InvalidArgument("half_period_blocks needs an even frames_per_period");
    int half = frames_per_period / 2;
    return SignPattern{[frames_per_period, half](int k) {
                         return ((k - 1) % frames_per_period) < half ? 1 : -1;
                       },
                       "half_period_blocks(" + std::to_string(frames_per_period) + ")"};
  }
};

// Static (DC) or square-wave (AC) field along axis_operator with amplitude
// epsilon_hz. axis_operator carries the shape (default S_z); epsilon scales it.
struct PerturbationModel {
  PerturbationKind kind = PerturbationKind::None;
  double epsilon_hz = 0.0;
  OperatorMatrix axis_operator;
  SignPattern pattern = SignPattern::constant();

  static PerturbationModel none(int dim = 2) {
    PerturbationModel p;
    p.axis_operator = spin_operators(dim).sz;
    return p;
  }
  static PerturbationModel dc(double epsilon_hz, int dim = 2) {
    PerturbationModel p = none(dim);
    p.kind = PerturbationKind::DC;
    p.epsilon_hz = epsilon_hz;
    return p;
  }
  static PerturbationModel ac(double epsilon_hz, SignPattern pattern, int dim = 2) {
    PerturbationModel p = none(dim);
    p.kind = PerturbationKind::ACSquare;
    p.epsilon_hz = epsilon_hz;
    p.pattern = std::move(pattern);
    return p;
  }
};

// Documented defaults: DC is constant; AC alternates per frame, except
// wahuha_echo, where the square wave flips at the embedded echo boundary
// (half-period blocks). The per-frame alternation would average the
// first-order response of that sequence to zero.
inline SignPattern default_sign_pattern(PerturbationKind kind, const PulseSequence& seq) {
  if (kind != PerturbationKind::ACSquare) return SignPattern::constant();
  if (seq.name() == "wahuha_echo")
    return SignPattern::half_period_blocks(seq.intervals_per_period());
  return SignPattern::alternating();
}

namespace detail {

// Angular generator for each interval, including the signed perturbation.
inline std::vector<Matrix> interval_generators(const PulseSequence& seq,
                                               const OperatorMatrix& h0_hz,
                                               const PerturbationModel& pert) {
  const int n = seq.n_intervals();
  std::vector<Matrix> gen;
  gen.reserve(n);
  auto sign_at = [&](int k1) {
    switch (pert.kind) {
      case PerturbationKind::None: return 0;
      case PerturbationKind::DC: return 1;
      case PerturbationKind::ACSquare: return pert.pattern(k1);
    }
    return 0;
  };
  if (seq.pulse_defined()) {
    // Lab frame: the pulses stay explicit, so H0 and the field are untoggled.
    for (int k = 0; k < n; ++k) {
      Matrix g = kTwoPi * h0_hz.mat();
      int s = sign_at(k + 1);
      if (s != 0) g += (kTwoPi * pert.epsilon_hz * s) * pert.axis_operator.mat();
      gen.push_back(std::move(g));
    }
    return gen;
  }
  std::vector<FrameInterval> h = toggling_frames(seq, h0_hz);
  if (pert.kind == PerturbationKind::None) {
    for (int k = 0; k < n; ++k) gen.push_back(h[k].hamiltonian.mat());
    return gen;
  }
  std::vector<FrameInterval> v = toggled_operator_frames(seq, pert.axis_operator);
  for (int k = 0; k < n; ++k) {
    Matrix g = h[k].hamiltonian.mat();
    int s = sign_at(k + 1);
    if (s != 0) g += (kTwoPi * pert.epsilon_hz * s) * v[k].hamiltonian.mat();
    gen.push_back(std::move(g));
  }
  return gen;
}

}  // namespace detail

// Time-ordered propagator over the full sequence: for pulse-defined input
// each interval contributes exp(-i G_k tau_k) P_k (pulse first), for
// frame-defined input the plain product of frame exponentials.
inline OperatorMatrix exact_unitary(const PulseSequence& seq, const OperatorMatrix& h0_hz,
                                    const PerturbationModel& pert) {
  std::vector<Matrix> gen = detail::interval_generators(seq, h0_hz, pert);
  SpinBasis basis = spin_operators(seq.dim());
  Matrix u = Matrix::Identity(seq.dim(), seq.dim());
  for (int k = 0; k < seq.n_intervals(); ++k) {
    if (seq.pulse_defined()) u = pulse_unitary(seq.pulses()[k], basis) * u;
    OperatorMatrix g = OperatorMatrix::hermitian(gen[k]);
    u = mat_exp_hermitian(g, seq.duration_of(k)).mat() * u;
  }
  return OperatorMatrix::unitary(std::move(u));
}

inline OperatorMatrix exact_unitary(const PulseSequence& seq, const OperatorMatrix& h0_hz) {
  return exact_unitary(seq, h0_hz, PerturbationModel::none(seq.dim()));
}

// exp(-i (sum of terms) t). All terms must come from the same evaluation
// (equal t_total); t itself is free, which is what stroboscopic use needs.
inline OperatorMatrix aht_unitary(const std::vector<MagnusTerm>& terms, double t) {
  if (terms.empty()) throw InvalidArgument("no terms given");
  const int d = terms.front().matrix.dim();
  double t_ref = terms.front().t_total;
  Matrix sum = Matrix::Zero(d, d);
  for (const MagnusTerm& term : terms) {
    if (std::abs(term.t_total - t_ref) > 1e-12 * std::max(1.0, t_ref))
      throw InvalidArgument("terms were computed for different total times");
    sum += term.matrix.mat();
  }
  return mat_exp_hermitian(OperatorMatrix::hermitian(std::move(sum)), t);
}

// Cumulative averaged Hamiltonian through order m for one period of `seq`.
inline std::vector<MagnusTerm> magnus_terms_through(const PulseSequence& seq,
                                                    const OperatorMatrix& h0_hz, int m,
                                                    const MagnusParams& params = MagnusParams{}) {
  std::vector<FrameInterval> frames =
      split_to_equal_tau(toggling_frames(seq, h0_hz), seq.base_unit_tau());
  std::vector<MagnusTerm> terms;
  terms.reserve(m);
  for (int k = 1; k <= m; ++k) terms.push_back(magnus_term_combinatorial(frames, k, params));
  return terms;
}

struct TimeSeries {
  std::vector<double> times;   // seconds, uniform, starting at 0
  std::vector<double> values;  // expectation of the observable
  std::string label;
};

enum class PropagatorKind { Exact, Aht };

struct PropagatorChoice {
  PropagatorKind kind = PropagatorKind::Exact;
  int order = 1;  // averaged-Hamiltonian truncation order when kind == Aht
};

// Expectation of `observable` sampled stroboscopically over n_periods copies
// of `seq`. samples_per_period == 1 samples period boundaries; larger values
// subsample at equal interval-unit strides and must divide the period's unit
// count. The exact branch marches the time-ordered product; the averaged
// branch evaluates exp(-i Hbar t) at the same instants.
inline TimeSeries stroboscopic_series(const PulseSequence& seq, const OperatorMatrix& h0_hz,
                                      const Vector& psi0, const OperatorMatrix& observable,
                                      int n_periods, int samples_per_period,
                                      PropagatorChoice choice,
                                      const MagnusParams& params = MagnusParams{}) {
  if (n_periods < 1) throw InvalidArgument("n_periods must be >= 1");
  int units = seq.total_units();
  if (samples_per_period < 1 || units % samples_per_period != 0)
    throw InvalidArgument("samples_per_period must divide the period's unit count");
  int stride = units / samples_per_period;
  double period = seq.total_time();
  double dt = period / samples_per_period;
  const int n_samples = n_periods * samples_per_period;

  TimeSeries out;
  out.times.reserve(n_samples);
  out.values.reserve(n_samples);
  out.label = seq.name();

  auto record = [&](int j, const Matrix& u) {
    Vector psi = u * psi0;
    out.times.push_back(j * dt);
    out.values.push_back((psi.adjoint() * (observable.mat() * psi))(0, 0).real());
  };

  if (choice.kind == PropagatorKind::Aht) {
    std::vector<MagnusTerm> terms = magnus_terms_through(seq, h0_hz, choice.order, params);
    Matrix sum = Matrix::Zero(seq.dim(), seq.dim());
    for (const MagnusTerm& t : terms) sum += t.matrix.mat();
    OperatorMatrix hbar = OperatorMatrix::hermitian(std::move(sum));
    for (int j = 0; j < n_samples; ++j) record(j, mat_exp_hermitian(hbar, j * dt).mat());
    return out;
  }

  std::vector<Matrix> gen =
      detail::interval_generators(seq, h0_hz, PerturbationModel::none(seq.dim()));
  SpinBasis basis = spin_operators(seq.dim());
  // Unit-slice propagators per interval; pulses fire at interval starts.
  std::vector<Matrix> slice_u;
  slice_u.reserve(seq.n_intervals());
  for (int k = 0; k < seq.n_intervals(); ++k)
    slice_u.push_back(
        mat_exp_hermitian(OperatorMatrix::hermitian(gen[k]), seq.base_unit_tau()).mat());

  Matrix u = Matrix::Identity(seq.dim(), seq.dim());
  int unit_count = 0;
  int sample_index = 0;
  record(sample_index++, u);
  for (int p = 0; p < n_periods; ++p) {
    for (int k = 0; k < seq.n_intervals(); ++k) {
      if (seq.pulse_defined()) u = pulse_unitary(seq.pulses()[k], basis) * u;
      for (int c = 0; c < seq.duration_units()[k]; ++c) {
        u = slice_u[k] * u;
        ++unit_count;
        if (unit_count % stride == 0 && sample_index < n_samples)
          record(sample_index++, u);
      }
    }
  }
  return out;
}

enum class Window { Rect, Hann };

struct PowerSpectrum {
  std::vector<double> freq_hz;
  std::vector<double> power;
};

// One-sided power spectrum of a uniformly sampled series. Power is
// normalized so the bins sum to the windowed sum of squares (Parseval).
inline PowerSpectrum power_spectrum(const TimeSeries& series, Window window = Window::Rect) {
  const int n = static_cast<int>(series.values.size());
  if (n < 2) throw InvalidArgument("series too short for a spectrum");
  double dt = series.times[1] - series.times[0];
  if (dt <= 0) throw InvalidArgument("series times must increase");
  for (int j = 1; j < n; ++j)
    if (std::abs(series.times[j] - series.times[j - 1] - dt) > 1e-9 * dt)
      throw InvalidArgument("series must be uniformly sampled");

  std::vector<double> x(series.values);
  if (window == Window::Hann)
    for (int j = 0; j < n; ++j)
      x[j] *= 0.5 * (1.0 - std::cos(kTwoPi * j / (n - 1)));

  PowerSpectrum out;
  const int half = n / 2;
  out.freq_hz.reserve(half + 1);
  out.power.reserve(half + 1);
  for (int k = 0; k <= half; ++k) {
    Complex xk(0, 0);
    double w = -kTwoPi * k / n;
    for (int j = 0; j < n; ++j) xk += x[j] * Complex(std::cos(w * j), std::sin(w * j));
    double scale = (k == 0 || (n % 2 == 0 && k == half)) ? 1.0 : 2.0;
    out.freq_hz.push_back(k / (n * dt));
    out.power.push_back(scale * std::norm(xk) / n);
  }
  return out;
}

struct FidelityRow {
  double t = 0;
  int order = 0;
  double fidelity = 0;
};

// |<psi| U_aht(m)^dagger U_exact |psi>|^2 over a grid of total times; the
// grid rescales the base interval with the sequence shape fixed. For
// pulse-defined sequences the accumulated pulse product is reapplied on top
// of the averaged propagator so both sides live in the same frame.
inline std::vector<FidelityRow> fidelity_sweep(const PulseSequence& seq,
                                               const OperatorMatrix& h0_hz, const Vector& psi0,
                                               const std::vector<int>& orders,
                                               const std::vector<double>& t_grid,
                                               const MagnusParams& params = MagnusParams{}) {
  if (orders.empty()) throw InvalidArgument("orders list is empty");
  std::vector<int> ord(orders);
  std::sort(ord.begin(), ord.end());
  int m_top = ord.back();
  std::vector<FidelityRow> rows(ord.size() * t_grid.size());
  parallel_for_index(static_cast<int>(t_grid.size()), [&](int i) {
    PulseSequence scaled = seq.scaled_to_total_time(t_grid[i]);
    Matrix u_exact = exact_unitary(scaled, h0_hz).mat();
    std::vector<MagnusTerm> terms = magnus_terms_through(scaled, h0_hz, m_top, params);
    Matrix closing = Matrix::Identity(seq.dim(), seq.dim());
    if (scaled.pulse_defined())
      closing = pulse_prefixes(scaled, spin_operators(scaled.dim())).back();
    Matrix sum = Matrix::Zero(seq.dim(), seq.dim());
    int next = 0;
    for (size_t k = 0; k < ord.size(); ++k) {
      while (next < ord[k]) sum += terms[next++].matrix.mat();
      Matrix u_aht =
          closing *
          mat_exp_hermitian(OperatorMatrix::hermitian(sum), t_grid[i]).mat();
      rows[i * ord.size() + k] =
          FidelityRow{t_grid[i], ord[k], state_fidelity(psi0, u_aht, u_exact)};
    }
  });
  return rows;
}

}  // namespace baht
