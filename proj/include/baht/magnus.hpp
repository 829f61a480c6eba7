#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "baht/errors.hpp"
#include "baht/operator_matrix.hpp"
#include "baht/parallel.hpp"
#include "baht/sequence.hpp"

namespace baht {

// Convergence radius of the Magnus series for the scaled generator
// (Blanes/Moan bound), int_0^t |H(s)| ds < r_c / (2 pi) in Hz * s.
inline constexpr double kMagnusRadius = 1.086868702;

inline constexpr int kMaxSupportedOrder = 12;

enum class MagnusMethod { ClosedForm, Combinatorial };

// One averaged-Hamiltonian term H^(m). Matrix and norm are in angular units;
// divide norms by 2 pi to report Hz.
struct MagnusTerm {
  int order = 0;
  OperatorMatrix matrix;
  double norm = 0.0;    // spectral norm of `matrix`
  double t_total = 0.0; // seconds
  MagnusMethod method = MagnusMethod::ClosedForm;
};

struct MagnusParams {
  int m_max = 7;
  double budget_cap = 2e8;  // estimated matrix products
};

// Permutation bookkeeping for the order-m term. `weight` is
// (-1)^descents * ascents! * descents! / (m * m!), kept as an exact integer
// ratio until the final conversion.
struct PermutationStat {
  std::vector<int> sigma;  // images sigma(1..m), 1-based
  int ascents = 0;
  int descents = 0;
  long long weight_num = 0;  // (-1)^descents * ascents! * descents!
  long long weight_den = 1;  // m * m!
  double weight = 0.0;
};

// Weakly decreasing interval-index vector together with its multiplicity
// factor f = tau^m / prod_j k_j! over the run lengths k_j.
struct IndexVector {
  std::vector<int> values;
  double multiplicity_factor = 0.0;
};

namespace detail {

inline long long factorial_ll(int k) {
  long long f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace detail

inline std::vector<PermutationStat> permutation_stats(int m) {
  if (m < 1 || m > kMaxSupportedOrder) throw InvalidArgument("order out of range");
  std::vector<int> sigma(m);
  for (int i = 0; i < m; ++i) sigma[i] = i + 1;
  std::vector<PermutationStat> out;
  long long den = static_cast<long long>(m) * detail::factorial_ll(m);
  do {
    PermutationStat st;
    st.sigma = sigma;
    for (int i = 0; i + 1 < m; ++i)
      (sigma[i] < sigma[i + 1] ? st.ascents : st.descents) += 1;
    long long mag = detail::factorial_ll(st.ascents) * detail::factorial_ll(st.descents);
    st.weight_num = (st.descents % 2 == 0) ? mag : -mag;
    st.weight_den = den;
    st.weight = static_cast<double>(st.weight_num) / static_cast<double>(st.weight_den);
    out.push_back(std::move(st));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return out;
}

// All weakly decreasing vectors in [1..n]^m, ordered by ascending nested
// loops (x1 outermost). Count is C(n+m-1, m).
inline std::vector<IndexVector> enumerate_index_vectors(int n, int m, double tau) {
  if (n < 1 || m < 1 || m > kMaxSupportedOrder || tau <= 0)
    throw InvalidArgument("enumerate_index_vectors: bad arguments");
  std::vector<IndexVector> out;
  std::vector<int> x(m, 1);
  double tau_pow = std::pow(tau, m);
  for (;;) {
    IndexVector iv;
    iv.values = x;
    double denom = 1.0;
    int run = 1;
    for (int i = 1; i <= m; ++i) {
      if (i < m && x[i] == x[i - 1]) {
        ++run;
      } else {
        denom *= static_cast<double>(detail::factorial_ll(run));
        run = 1;
      }
    }
    iv.multiplicity_factor = tau_pow / denom;
    out.push_back(std::move(iv));
    // advance: rightmost position that can grow without breaking x[i] <= x[i-1]
    int p = m - 1;
    while (p >= 0) {
      int cap = (p == 0) ? n : x[p - 1];
      if (x[p] < cap) break;
      --p;
    }
    if (p < 0) break;
    ++x[p];
    for (int i = p + 1; i < m; ++i) x[i] = 1;
  }
  return out;
}

inline double index_vector_count(int n, int m) {
  double c = 1.0;  // C(n+m-1, m)
  for (int i = 1; i <= m; ++i) c = c * (n + m - i) / i;
  return c;
}

namespace detail {

inline void require_equal_tau(const std::vector<FrameInterval>& frames) {
  if (frames.empty()) throw InvalidArgument("frame list is empty");
  double tau = frames.front().duration;
  for (const FrameInterval& f : frames)
    if (std::abs(f.duration - tau) > 1e-12 * tau)
      throw InvalidArgument("frames must share one duration; split_to_equal_tau first");
}

inline double total_time(const std::vector<FrameInterval>& frames) {
  double t = 0;
  for (const FrameInterval& f : frames) t += f.duration;
  return t;
}

inline MagnusTerm wrap_term(int order, Matrix m, double t_total, MagnusMethod method) {
  Matrix h = 0.5 * (m + m.adjoint().eval());
  MagnusTerm term;
  term.order = order;
  term.matrix = OperatorMatrix::hermitian(std::move(h));
  term.norm = spectral_norm(term.matrix);
  term.t_total = t_total;
  term.method = method;
  return term;
}

// Per-order coefficient tables for the word-sum evaluation below. For a word
// w in [1..n]^m the sum over (index vector, permutation) pairs collapses to
//   coeff(w) = tau^m * S(comp, ranks(w)) / (m! * prod_j k_j!)
// where comp = run-length composition of sorted(w) and S accumulates
// (-1)^descents * ascents! * descents! over the permutations realizing the
// rank pattern. Everything here is exact integer arithmetic.
struct WordTables {
  std::unordered_map<std::uint32_t, int> comp_index;  // packed run lengths -> id
  std::vector<double> inv_denom;                      // 1 / (m! * prod k_j!)
  std::unordered_map<std::uint64_t, long long> coeff; // (comp_id << 24) | ranks
};

inline WordTables build_word_tables(int m) {
  WordTables t;
  // ordered compositions of m
  std::vector<std::vector<int>> comps;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int left) -> void {
    if (left == 0) {
      comps.push_back(cur);
      return;
    }
    for (int part = 1; part <= left; ++part) {
      cur.push_back(part);
      self(self, left - part);
      cur.pop_back();
    }
  };
  rec(rec, m);

  long long mfact = factorial_ll(m);
  std::vector<std::array<int, 13>> group_of(comps.size());
  for (size_t c = 0; c < comps.size(); ++c) {
    std::uint32_t key = 0;
    long long denom = mfact;
    int pos = 1;
    for (size_t j = 0; j < comps[c].size(); ++j) {
      key = (key << 3) | static_cast<std::uint32_t>(comps[c][j]);
      denom *= factorial_ll(comps[c][j]);
      for (int r = 0; r < comps[c][j]; ++r) group_of[c][pos++] = static_cast<int>(j) + 1;
    }
    t.comp_index.emplace(key, static_cast<int>(c));
    t.inv_denom.push_back(1.0 / static_cast<double>(denom));
  }

  std::vector<int> sigma(m);
  for (int i = 0; i < m; ++i) sigma[i] = i + 1;
  do {
    int descents = 0;
    for (int i = 0; i + 1 < m; ++i)
      if (sigma[i] > sigma[i + 1]) ++descents;
    long long mag = factorial_ll(m - 1 - descents) * factorial_ll(descents);
    long long w = (descents % 2 == 0) ? mag : -mag;
    for (size_t c = 0; c < comps.size(); ++c) {
      std::uint64_t ranks = 0;
      for (int p = 0; p < m; ++p) ranks = (ranks << 3) | group_of[c][sigma[p]];
      t.coeff[(static_cast<std::uint64_t>(c) << 24) | ranks] += w;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return t;
}

inline const WordTables& word_tables(int m) {
  static std::array<WordTables, kMaxSupportedOrder + 1> cache;
  static std::array<std::once_flag, kMaxSupportedOrder + 1> flags;
  std::call_once(flags[m], [m] { cache[m] = build_word_tables(m); });
  return cache[m];
}

}  // namespace detail

// Order-m term of the averaged Hamiltonian for equal-duration frames,
// evaluated from the permutation sum over weakly decreasing index vectors.
// The double sum is reorganized as a single pass over words w in [1..n]^m
// (each word is one product O_{w_1}...O_{w_m} taken once, with its exact
// rational coefficient), with prefix products shared between neighbouring
// words. The reported estimate m! * C(n+m-1, m) counts the raw pair sum.
inline MagnusTerm magnus_term_combinatorial(const std::vector<FrameInterval>& frames, int m,
                                            const MagnusParams& params = MagnusParams{}) {
  detail::require_equal_tau(frames);
  if (m < 1) throw InvalidArgument("order must be >= 1");
  if (m > params.m_max || m > kMaxSupportedOrder)
    throw InvalidArgument("order exceeds configured m_max");
  const int n = static_cast<int>(frames.size());
  double estimate = static_cast<double>(detail::factorial_ll(m)) * index_vector_count(n, m);
  if (estimate > params.budget_cap) {
    std::ostringstream os;
    os << "order-" << m << " evaluation over " << n << " frames needs about " << estimate
       << " matrix products, above the budget cap " << params.budget_cap;
    throw BudgetError(os.str());
  }

  const detail::WordTables& tbl = detail::word_tables(m);
  const int d = frames.front().hamiltonian.dim();
  const double tau = frames.front().duration;
  const double t_total = detail::total_time(frames);
  const double tau_pow = std::pow(tau, m);
  const Complex minus_i(0, -1);

  std::vector<Matrix> ops;
  ops.reserve(n);
  for (const FrameInterval& f : frames) ops.push_back(minus_i * f.hamiltonian.mat());

  std::vector<Matrix> prefix(m + 1, Matrix::Identity(d, d));
  Matrix omega = Matrix::Zero(d, d);
  std::vector<int> w(m + 1, 1);  // current word, w[1..m]
  int dirty = 1;                 // prefix[j] valid for j < dirty
  std::array<int, 13> sorted{}, vals{}, mult{};
  for (;;) {
    // run-length data of the word, values descending
    for (int j = 1; j <= m; ++j) sorted[j - 1] = w[j];
    std::sort(sorted.begin(), sorted.begin() + m, std::greater<int>());
    int r = 0;
    for (int j = 0; j < m; ++j) {
      if (j == 0 || sorted[j] != vals[r - 1]) {
        vals[r] = sorted[j];
        mult[r] = 1;
        ++r;
      } else {
        ++mult[r - 1];
      }
    }
    std::uint32_t comp_key = 0;
    for (int j = 0; j < r; ++j) comp_key = (comp_key << 3) | static_cast<std::uint32_t>(mult[j]);
    int comp_id = tbl.comp_index.at(comp_key);
    std::uint64_t ranks = 0;
    for (int p = 1; p <= m; ++p) {
      int rank = 0;
      while (vals[rank] != w[p]) ++rank;
      ranks = (ranks << 3) | static_cast<std::uint64_t>(rank + 1);
    }
    auto it = tbl.coeff.find((static_cast<std::uint64_t>(comp_id) << 24) | ranks);
    long long num = (it == tbl.coeff.end()) ? 0 : it->second;
    if (num != 0) {
      for (int j = dirty; j <= m; ++j) prefix[j].noalias() = prefix[j - 1] * ops[w[j] - 1];
      dirty = m + 1;
      omega.noalias() +=
          (tau_pow * static_cast<double>(num) * tbl.inv_denom[comp_id]) * prefix[m];
    }
    int p = m;
    while (p >= 1 && w[p] == n) {
      w[p] = 1;
      --p;
    }
    if (p < 1) break;
    ++w[p];
    if (p < dirty) dirty = p;
  }

  Matrix hbar = Complex(0, 1) * omega / t_total;
  return detail::wrap_term(m, std::move(hbar), t_total, MagnusMethod::Combinatorial);
}

// First-order term: duration-weighted mean of the frame Hamiltonians.
inline MagnusTerm hbar1(const std::vector<FrameInterval>& frames) {
  if (frames.empty()) throw InvalidArgument("frame list is empty");
  const int d = frames.front().hamiltonian.dim();
  Matrix acc = Matrix::Zero(d, d);
  double t = 0;
  for (const FrameInterval& f : frames) {
    acc += f.duration * f.hamiltonian.mat();
    t += f.duration;
  }
  return detail::wrap_term(1, acc / t, t, MagnusMethod::ClosedForm);
}

// Second-order term: (1 / 2i t) sum_{j>i} [H_j, H_i] tau_j tau_i, evaluated
// with a running prefix sum.
inline MagnusTerm hbar2(const std::vector<FrameInterval>& frames) {
  if (frames.empty()) throw InvalidArgument("frame list is empty");
  const int d = frames.front().hamiltonian.dim();
  Matrix acc = Matrix::Zero(d, d);
  Matrix prefix = Matrix::Zero(d, d);
  double t = 0;
  for (const FrameInterval& f : frames) {
    Matrix h = f.duration * f.hamiltonian.mat();
    acc += h * prefix - prefix * h;
    prefix += h;
    t += f.duration;
  }
  return detail::wrap_term(2, Complex(0, -0.5) * acc / t, t, MagnusMethod::ClosedForm);
}

struct ConvergenceMargin {
  double lhs;    // sum_i |H_i|_Hz * tau_i
  double bound;  // kMagnusRadius / (2 pi)
  bool guaranteed;
};

// Sufficient-condition check for Magnus convergence. For |H_i| = Delta/2 the
// inequality reads Delta * t < kMagnusRadius / pi (about 0.346).
inline ConvergenceMargin convergence_margin(const std::vector<FrameInterval>& frames) {
  double lhs = 0;
  for (const FrameInterval& f : frames)
    lhs += spectral_norm(f.hamiltonian) / kTwoPi * f.duration;
  double bound = kMagnusRadius / kTwoPi;
  return ConvergenceMargin{lhs, bound, lhs < bound};
}

struct NormRow {
  double t = 0;
  int order = 0;
  double norm_hz = 0;
};

// |H^(m)| in Hz over a grid of total times. The grid is realized by scaling
// the base interval with the sequence shape and H0 fixed.
inline std::vector<NormRow> norm_scaling_sweep(const PulseSequence& seq,
                                               const OperatorMatrix& h0_hz,
                                               const std::vector<int>& orders,
                                               const std::vector<double>& t_grid,
                                               const MagnusParams& params = MagnusParams{}) {
  std::vector<NormRow> rows(orders.size() * t_grid.size());
  parallel_for_index(static_cast<int>(t_grid.size()), [&](int i) {
    PulseSequence scaled = seq.scaled_to_total_time(t_grid[i]);
    std::vector<FrameInterval> frames =
        split_to_equal_tau(toggling_frames(scaled, h0_hz), scaled.base_unit_tau());
    for (size_t k = 0; k < orders.size(); ++k) {
      MagnusTerm term = magnus_term_combinatorial(frames, orders[k], params);
      rows[i * orders.size() + k] = NormRow{t_grid[i], orders[k], term.norm / kTwoPi};
    }
  });
  return rows;
}

}  // namespace baht
