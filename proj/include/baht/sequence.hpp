#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "baht/errors.hpp"
#include "baht/matrix_functions.hpp"
#include "baht/operator_matrix.hpp"
#include "baht/spin.hpp"

namespace baht {

inline constexpr double kTwoPi = 2.0 * M_PI;

// Rotation pulse: exp(-i angle_rad * axis . S). Taken as instantaneous.
struct Pulse {
  Eigen::Vector3d axis;
  double angle_rad = 0.0;
};

// One interval of free evolution in the toggling frame. The Hamiltonian is
// in angular units (rad/s); duration in seconds; index is 1-based.
struct FrameInterval {
  OperatorMatrix hamiltonian;
  double duration = 0.0;
  int index = 0;
};

// Frame-table entry: the interval Hamiltonian is sign * delta * (axis . S).
struct FrameSpec {
  Eigen::Vector3d axis;
  int sign = 1;
};

// A pulsed sequence over equal base intervals. Two representations exist:
// an explicit pulse list (pulse k fires at the start of interval k), or a
// toggling-frame table for sequences specified directly by where the pulses
// carry the z axis. Every interval lasts duration_units * base_unit_tau.
class PulseSequence {
 public:
  static PulseSequence from_pulses(std::string name, int dim, double base_unit_tau,
                                   std::vector<Pulse> pulses, std::vector<int> units,
                                   int intervals_per_period = 0) {
    if (pulses.size() != units.size() || pulses.empty())
      throw InvalidArgument("pulse list and duration list must match and be non-empty");
    PulseSequence s(std::move(name), dim, base_unit_tau, std::move(units),
                    intervals_per_period);
    for (const Pulse& p : pulses) check_axis(p.axis);
    s.pulses_ = std::move(pulses);
    return s;
  }

  static PulseSequence from_frames(std::string name, int dim, double base_unit_tau,
                                   std::vector<FrameSpec> frames, std::vector<int> units,
                                   int intervals_per_period = 0) {
    if (frames.size() != units.size() || frames.empty())
      throw InvalidArgument("frame list and duration list must match and be non-empty");
    PulseSequence s(std::move(name), dim, base_unit_tau, std::move(units),
                    intervals_per_period);
    for (const FrameSpec& f : frames) {
      check_axis(f.axis);
      if (f.sign != 1 && f.sign != -1) throw InvalidArgument("frame sign must be +-1");
    }
    s.frames_ = std::move(frames);
    return s;
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double base_unit_tau() const { return base_tau_; }
  const std::vector<int>& duration_units() const { return units_; }
  bool pulse_defined() const { return !pulses_.empty(); }
  const std::vector<Pulse>& pulses() const { return pulses_; }
  const std::vector<FrameSpec>& frame_table() const { return frames_; }
  int n_intervals() const { return static_cast<int>(units_.size()); }
  int intervals_per_period() const { return per_period_; }

  int total_units() const {
    int t = 0;
    for (int u : units_) t += u;
    return t;
  }
  double total_time() const { return total_units() * base_tau_; }
  double duration_of(int k) const { return units_[k] * base_tau_; }

  // Same table, rescaled so the whole sequence lasts `t` seconds.
  PulseSequence scaled_to_total_time(double t) const {
    if (t <= 0) throw InvalidArgument("total time must be positive");
    PulseSequence s = *this;
    s.base_tau_ = t / total_units();
    return s;
  }

  PulseSequence repeated(int reps) const {
    if (reps < 1) throw InvalidArgument("repetitions must be >= 1");
    PulseSequence s = *this;
    s.per_period_ = per_period_ == 0 ? n_intervals() : per_period_;
    for (int r = 1; r < reps; ++r) {
      s.units_.insert(s.units_.end(), units_.begin(), units_.end());
      if (pulse_defined())
        s.pulses_.insert(s.pulses_.end(), pulses_.begin(), pulses_.end());
      else
        s.frames_.insert(s.frames_.end(), frames_.begin(), frames_.end());
    }
    return s;
  }

 private:
  PulseSequence(std::string name, int dim, double base_tau, std::vector<int> units,
                int per_period)
      : name_(std::move(name)), dim_(dim), base_tau_(base_tau), units_(std::move(units)),
        per_period_(per_period == 0 ? static_cast<int>(units_.size()) : per_period) {
    if (dim_ < 2) throw InvalidArgument("sequence dim must be >= 2");
    if (base_tau_ <= 0) throw InvalidArgument("base_unit_tau must be positive");
    for (int u : units_)
      if (u < 1) throw InvalidArgument("duration_units must be positive integers");
  }

  static void check_axis(const Eigen::Vector3d& axis) {
    if (std::abs(axis.norm() - 1.0) > 1e-10)
      throw InvalidArgument("axis must be a unit vector");
  }

  std::string name_;
  int dim_;
  double base_tau_;
  std::vector<int> units_;
  int per_period_;
  std::vector<Pulse> pulses_;
  std::vector<FrameSpec> frames_;
};

inline Matrix pulse_unitary(const Pulse& p, const SpinBasis& basis) {
  OperatorMatrix gen = OperatorMatrix::hermitian(axis_dot_spin(p.axis, basis));
  return mat_exp_hermitian(gen, p.angle_rad).mat();
}

// Cumulative pulse products Q_k = P_k ... P_1 for k = 1..n.
inline std::vector<Matrix> pulse_prefixes(const PulseSequence& seq, const SpinBasis& basis) {
  if (!seq.pulse_defined())
    throw InvalidArgument("pulse_prefixes requires a pulse-defined sequence");
  std::vector<Matrix> q;
  q.reserve(seq.n_intervals());
  Matrix acc = Matrix::Identity(seq.dim(), seq.dim());
  for (const Pulse& p : seq.pulses()) {
    acc = pulse_unitary(p, basis) * acc;
    q.push_back(acc);
  }
  return q;
}

namespace detail {

// Coefficient c with op = c * S_z, rejecting operators off the z axis.
inline double z_coefficient(const OperatorMatrix& op, const SpinBasis& basis,
                            const char* who) {
  double denom = hs_inner(basis.sz, basis.sz).real();
  double c = hs_inner(basis.sz, op).real() / denom;
  Matrix residual = op.mat() - c * basis.sz.mat();
  if (max_abs(residual) > 1e-9 * std::max(1.0, max_abs(op.mat())))
    throw InvalidArgument(std::string(who) +
                          ": frame-table sequences require an operator proportional to S_z");
  return c;
}

}  // namespace detail

// Conjugates `op` into each interval's toggling frame, in the units of `op`
// itself. Frame-table sequences support only operators along z (the table
// records where the pulses carry that axis).
inline std::vector<FrameInterval> toggled_operator_frames(const PulseSequence& seq,
                                                          const OperatorMatrix& op) {
  SpinBasis basis = spin_operators(seq.dim());
  if (op.dim() != seq.dim()) throw InvalidArgument("operator dim does not match sequence");
  std::vector<FrameInterval> out;
  out.reserve(seq.n_intervals());
  if (seq.pulse_defined()) {
    std::vector<Matrix> q = pulse_prefixes(seq, basis);
    for (int k = 0; k < seq.n_intervals(); ++k) {
      Matrix h = q[k].adjoint() * op.mat() * q[k];
      out.push_back({OperatorMatrix::hermitian(std::move(h)), seq.duration_of(k), k + 1});
    }
    return out;
  }
  double c = detail::z_coefficient(op, basis, "toggled_operator_frames");
  for (int k = 0; k < seq.n_intervals(); ++k) {
    const FrameSpec& f = seq.frame_table()[k];
    Matrix h = (c * f.sign) * axis_dot_spin(f.axis, basis);
    out.push_back({OperatorMatrix::hermitian(std::move(h)), seq.duration_of(k), k + 1});
  }
  return out;
}

// Toggling-frame Hamiltonians H_k = Q_k^dagger H0 Q_k in angular units.
// H0 is in Hz; the 2 pi conversion happens here, at the boundary.
inline std::vector<FrameInterval> toggling_frames(const PulseSequence& seq,
                                                  const OperatorMatrix& h0_hz) {
  std::vector<FrameInterval> frames = toggled_operator_frames(seq, h0_hz);
  for (FrameInterval& f : frames)
    f.hamiltonian = OperatorMatrix::hermitian(kTwoPi * f.hamiltonian.mat());
  return frames;
}

// Splits every interval into unit-length frames of duration base_tau.
// Durations must be integer multiples of base_tau; splitting an already
// equal-tau list is the identity.
inline std::vector<FrameInterval> split_to_equal_tau(const std::vector<FrameInterval>& frames,
                                                     double base_tau) {
  if (base_tau <= 0) throw InvalidArgument("base_tau must be positive");
  std::vector<FrameInterval> out;
  int index = 1;
  for (const FrameInterval& f : frames) {
    double ratio = f.duration / base_tau;
    double rounded = std::round(ratio);
    if (rounded < 1 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
      throw CommensurabilityError("interval duration is not an integer multiple of base_tau");
    for (int r = 0; r < static_cast<int>(rounded); ++r)
      out.push_back({f.hamiltonian, base_tau, index++});
  }
  return out;
}

namespace detail {

inline const Eigen::Vector3d kAxisX{1, 0, 0};
inline const Eigen::Vector3d kAxisY{0, 1, 0};
inline const Eigen::Vector3d kAxisZ{0, 0, 1};

inline std::vector<FrameSpec> builtin_frame_table(const std::string& name) {
  auto z = [](int s) { return FrameSpec{kAxisZ, s}; };
  auto y = [](int s) { return FrameSpec{kAxisY, s}; };
  auto x = [](int s) { return FrameSpec{kAxisX, s}; };
  if (name == "ramsey") return {z(1)};
  if (name == "echo") return {z(1), z(-1)};
  if (name == "wahuha") return {z(1), y(1), x(1), x(1), y(1), z(1)};
  if (name == "wahuha_echo")
    return {z(1), y(1), x(1), x(1), y(1), z(1), z(-1), y(-1), x(-1), x(-1), y(-1), z(-1)};
  if (name == "xy8") return {z(1), z(-1), z(1), z(-1), z(1), z(-1), z(1), z(-1)};
  if (name == "droid_like")
    return {z(1), z(-1), y(1), y(-1), x(1), x(-1), x(1), x(-1), y(1), y(-1), z(1), z(-1)};
  throw InvalidArgument("unknown built-in sequence: " + name);
}

}  // namespace detail

inline const std::vector<std::string>& builtin_sequence_names() {
  static const std::vector<std::string> names = {"ramsey",      "echo", "wahuha",
                                                 "wahuha_echo", "xy8",  "droid_like"};
  return names;
}

inline PulseSequence builtin_sequence(const std::string& name, double tau,
                                      int repetitions = 1) {
  std::vector<FrameSpec> table = detail::builtin_frame_table(name);
  std::vector<int> units(table.size(), 1);
  PulseSequence one =
      PulseSequence::from_frames(name, 2, tau, std::move(table), std::move(units));
  return repetitions == 1 ? one : one.repeated(repetitions);
}

}  // namespace baht
