#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "baht/magnus.hpp"
#include "baht/operator_matrix.hpp"
#include "baht/rng.hpp"
#include "baht/sequence.hpp"
#include "baht/spin.hpp"

namespace baht {

// Outcome of the rapid-echo structure check and, when requested, of the
// term-by-term vanishing verification. violating_pairs indexes pairs
// (2l-1, 2l) by l, 1-based.
struct EchoReport {
  bool is_rapid_echo = false;
  std::vector<int> violating_pairs;
  int m_checked = 0;
  double max_norm_hz = 0;
  std::string note;

  bool vanishes(double tol_hz = 1e-12) const {
    return is_rapid_echo && m_checked > 0 && max_norm_hz <= tol_hz;
  }
};

// Structural predicate: equal durations and H_{2l} == -H_{2l-1} for every
// pair. Malformed input is reported, not thrown.
inline EchoReport check_rapid_echo(const std::vector<FrameInterval>& frames) {
  EchoReport r;
  const int n = static_cast<int>(frames.size());
  if (n == 0) {
    r.note = "empty frame list";
    return r;
  }
  if (n % 2 != 0) {
    r.note = "odd frame count";
    return r;
  }
  double tau = frames.front().duration;
  double scale = 1.0;
  for (const FrameInterval& f : frames) {
    if (std::abs(f.duration - tau) > 1e-12 * tau) {
      r.note = "durations are not all equal";
      return r;
    }
    scale = std::max(scale, max_abs(f.hamiltonian.mat()));
  }
  double tol = 1e-10 * scale;
  for (int l = 1; 2 * l <= n; ++l) {
    const Matrix& a = frames[2 * l - 2].hamiltonian.mat();
    const Matrix& b = frames[2 * l - 1].hamiltonian.mat();
    if (max_abs(a + b) > tol) r.violating_pairs.push_back(l);
  }
  r.is_rapid_echo = r.violating_pairs.empty();
  if (!r.is_rapid_echo)
    r.note = std::to_string(r.violating_pairs.size()) + " pair(s) break H_even == -H_odd";
  return r;
}

// n_pairs pairs (+H, -H) with H a unit-spectral-norm direction on the Pauli
// sphere (1 Hz scale), drawn deterministically from per-pair substreams.
inline std::vector<FrameInterval> random_echo_sequence(int n_pairs, std::uint64_t seed,
                                                       double tau = 0.01) {
  if (n_pairs < 1) throw InvalidArgument("n_pairs must be >= 1");
  if (tau <= 0) throw InvalidArgument("tau must be positive");
  std::vector<FrameInterval> frames;
  frames.reserve(2 * n_pairs);
  SpinBasis basis = spin_operators(2);
  for (int l = 1; l <= n_pairs; ++l) {
    SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(l));
    double theta = kTwoPi / 2 * rng.next_double();
    double phi = kTwoPi * rng.next_double();
    // Pauli combination: unit coefficients on sigma = 2 S.
    Matrix h = kTwoPi * 2.0 *
               (std::sin(theta) * std::cos(phi) * basis.sx.mat() +
                std::sin(theta) * std::sin(phi) * basis.sy.mat() +
                std::cos(theta) * basis.sz.mat());
    OperatorMatrix hm = OperatorMatrix::hermitian(h);
    frames.push_back(FrameInterval{hm, tau, 2 * l - 1});
    frames.push_back(FrameInterval{OperatorMatrix::hermitian(-h), tau, 2 * l});
  }
  return frames;
}

// Checks the structure, then evaluates every averaged-Hamiltonian term
// through m_max and records the largest norm found. For a true rapid echo
// all of them vanish identically.
inline EchoReport verify_vanishing(const std::vector<FrameInterval>& frames, int m_max,
                                   const MagnusParams& params = MagnusParams{}) {
  if (m_max < 1) throw InvalidArgument("m_max must be >= 1");
  EchoReport r = check_rapid_echo(frames);
  if (!r.is_rapid_echo) return r;
  for (int m = 1; m <= m_max; ++m) {
    MagnusTerm term = magnus_term_combinatorial(frames, m, params);
    r.max_norm_hz = std::max(r.max_norm_hz, term.norm / kTwoPi);
    r.m_checked = m;
  }
  return r;
}

}  // namespace baht
