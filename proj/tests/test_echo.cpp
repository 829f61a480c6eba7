#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "baht/echo.hpp"
#include "baht/magnus.hpp"

using namespace baht;

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Echo train with the pairing broken by a signed offset: members are
// (delta + eps) A and -(delta - eps) A, so pair sums are 2 eps (a . S).
std::vector<FrameInterval> skewed_pairs(const std::vector<Eigen::Vector3d>& axes,
                                        double delta_hz, double eps_hz, double tau) {
  SpinBasis basis = spin_operators(2);
  std::vector<FrameInterval> frames;
  int k = 1;
  for (const Eigen::Vector3d& a : axes) {
    for (int sign : {1, -1}) {
      Matrix h = kTwoPi * (sign * delta_hz + eps_hz) * axis_dot_spin(a, basis);
      frames.push_back({OperatorMatrix::hermitian(std::move(h)), tau, k++});
    }
  }
  return frames;
}

const std::vector<Eigen::Vector3d> kZyxAxes = {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}};
// droid_like pair axes in order: palindromic
const std::vector<Eigen::Vector3d> kDroidAxes = {{0, 0, 1}, {0, 1, 0}, {1, 0, 0},
                                                 {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

}  // namespace

TEST_CASE("structure check recognizes paired sign flips") {
  SpinBasis b = spin_operators(2);
  OperatorMatrix h0 = OperatorMatrix::hermitian(1.0 * b.sz.mat());
  for (const char* name : {"echo", "xy8", "droid_like"}) {
    EchoReport r = check_rapid_echo(toggling_frames(builtin_sequence(name, 0.01), h0));
    INFO(name);
    CHECK(r.is_rapid_echo);
    CHECK(r.violating_pairs.empty());
  }
  EchoReport w = check_rapid_echo(toggling_frames(builtin_sequence("wahuha", 0.01), h0));
  CHECK_FALSE(w.is_rapid_echo);
  CHECK(w.violating_pairs.size() == 3);  // (z,y), (x,x), (y,z)
  CHECK(w.violating_pairs[0] == 1);

  EchoReport empty = check_rapid_echo({});
  CHECK_FALSE(empty.is_rapid_echo);
  CHECK(empty.note.find("empty") != std::string::npos);

  std::vector<FrameInterval> odd = random_echo_sequence(2, 1);
  odd.pop_back();
  EchoReport o = check_rapid_echo(odd);
  CHECK_FALSE(o.is_rapid_echo);
  CHECK(o.note.find("odd") != std::string::npos);

  std::vector<FrameInterval> uneven = random_echo_sequence(2, 1);
  uneven[3].duration *= 2;
  EchoReport u = check_rapid_echo(uneven);
  CHECK_FALSE(u.is_rapid_echo);
  CHECK(u.note.find("duration") != std::string::npos);
}

TEST_CASE("random echo sequences are reproducible unit-norm pairs") {
  std::vector<FrameInterval> a = random_echo_sequence(10, 42);
  std::vector<FrameInterval> b = random_echo_sequence(10, 42);
  std::vector<FrameInterval> c = random_echo_sequence(10, 43);
  REQUIRE(a.size() == 20);
  CHECK(check_rapid_echo(a).is_rapid_echo);
  double diff_seeds = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(max_abs_diff(a[k].hamiltonian.mat(), b[k].hamiltonian.mat()) == 0.0);
    CHECK(a[k].duration == 0.01);
    CHECK(a[k].index == static_cast<int>(k) + 1);
    CHECK(spectral_norm(a[k].hamiltonian) / kTwoPi == Catch::Approx(1.0).epsilon(1e-12));
    diff_seeds += max_abs_diff(a[k].hamiltonian.mat(), c[k].hamiltonian.mat());
  }
  CHECK(diff_seeds > 1e-3);
  // substream indexing: the first pair does not depend on how many follow
  std::vector<FrameInterval> longer = random_echo_sequence(11, 42);
  CHECK(max_abs_diff(longer[0].hamiltonian.mat(), a[0].hamiltonian.mat()) == 0.0);
  CHECK_THROWS_AS(random_echo_sequence(0, 1), InvalidArgument);
  CHECK_THROWS_AS(random_echo_sequence(1, 1, -0.5), InvalidArgument);
}

TEST_CASE("every averaged term of a rapid echo vanishes") {
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    std::vector<FrameInterval> frames = random_echo_sequence(10, seed);
    EchoReport r = verify_vanishing(frames, 5);
    CHECK(r.is_rapid_echo);
    CHECK(r.m_checked == 5);
    CHECK(r.max_norm_hz <= 1e-12);
    CHECK(r.vanishes());
  }
}

TEST_CASE("a broken pair is caught and produces a nonzero second order") {
  std::vector<FrameInterval> frames = random_echo_sequence(10, 5);
  SpinBasis b = spin_operators(2);
  Matrix bumped = frames[4].hamiltonian.mat() + kTwoPi * 1e-6 * b.sx.mat();
  frames[4].hamiltonian = OperatorMatrix::hermitian(bumped);

  EchoReport r = check_rapid_echo(frames);
  CHECK_FALSE(r.is_rapid_echo);
  REQUIRE(r.violating_pairs.size() == 1);
  CHECK(r.violating_pairs[0] == 3);  // frames 5,6 form pair 3
  CHECK(r.note.find("1 pair(s)") != std::string::npos);

  EchoReport v = verify_vanishing(frames, 5);
  CHECK_FALSE(v.is_rapid_echo);
  CHECK(v.m_checked == 0);
  CHECK_FALSE(v.vanishes());

  // the averaged terms see the break directly
  MagnusTerm t1 = hbar1(frames);
  CHECK(t1.norm / kTwoPi > 1e-9);
  MagnusTerm t2 = magnus_term_combinatorial(frames, 2);
  CHECK(t2.norm / kTwoPi > 1e-9);

  CHECK_THROWS_AS(verify_vanishing(frames, 0), InvalidArgument);
}

TEST_CASE("echo-breaking offsets scale each order with its own power") {
  double delta = 1.0, tau = 0.01;
  std::vector<double> eps_grid = {1e-3, 3e-3, 1e-2, 3e-2};
  for (int m : {1, 2, 3}) {
    std::vector<double> norms;
    for (double eps : eps_grid) {
      std::vector<FrameInterval> frames = skewed_pairs(kZyxAxes, delta, eps, tau);
      norms.push_back(magnus_term_combinatorial(frames, m).norm / kTwoPi);
    }
    double slope = fit_slope(eps_grid, norms);
    INFO("order " << m);
    CHECK(slope > m - 0.2);
    CHECK(slope < m + 0.4);
  }
  // eps = 0 restores the ideal echo
  EchoReport ideal = verify_vanishing(skewed_pairs(kZyxAxes, delta, 0.0, tau), 4);
  CHECK(ideal.vanishes());

  // the droid pair arrangement is palindromic, which cancels the cross-pair
  // commutators: its second order stays zero even with the pairing broken
  std::vector<FrameInterval> droid = skewed_pairs(kDroidAxes, delta, 1e-2, tau);
  CHECK(magnus_term_combinatorial(droid, 2).norm / kTwoPi < 1e-10);
  CHECK(magnus_term_combinatorial(skewed_pairs(kZyxAxes, delta, 1e-2, tau), 2).norm /
            kTwoPi >
        1e-7);
}
