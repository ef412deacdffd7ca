#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "vigrid/errors.hpp"
#include "vigrid/inertia.hpp"

using namespace vigrid;

TEST_CASE("bang-bang threshold rule") {
  BangBangPolicy p({0, 1, 2}, {2.0, 0.02});
  Eigen::VectorXd omega(3);

  omega << 0.0, 0.0, 0.0;
  p.begin_step(0.0, 0.01, omega);
  CHECK(p.virtual_inertia(0, 0.0) == 0.0);

  omega << 0.03, 0.0, 0.0;
  p.begin_step(0.01, 0.01, omega);
  for (std::size_t slot = 0; slot < 3; ++slot)
    CHECK(p.virtual_inertia(slot, 0.01) == 2.0);

  // exactly at the threshold: strict inequality keeps it off
  omega << 0.02, 0.02, 0.02;
  p.begin_step(0.02, 0.01, omega);
  CHECK(p.virtual_inertia(0, 0.02) == 0.0);

  // negative deviations count through the magnitude
  omega << -0.05, 0.0, 0.0;
  p.begin_step(0.03, 0.01, omega);
  CHECK(p.virtual_inertia(0, 0.03) == 2.0);
}

TEST_CASE("rate-limited derivative cap and clamp") {
  RateLimitedParams rl;
  rl.magnitude = 10.0;
  rl.filter_rate = 100.0;
  rl.epsilon = 1e-4;
  rl.threshold = 0.02;
  rl.rho = {28.0};
  RateLimitedPolicy p({0}, rl);

  Eigen::VectorXd omega(1);
  omega << 0.05;  // above threshold: u = Ma
  p.begin_step(0.0, 0.01, omega);

  Eigen::VectorXd mv(1), dmv(1);
  mv << 0.0;
  p.state_rhs(mv, dmv);
  CHECK(dmv(0) == doctest::Approx(2.0 * 28.0 - 1e-4));  // rate-capped

  mv << 10.0;  // at the set point
  p.state_rhs(mv, dmv);
  CHECK(dmv(0) == 0.0);

  omega << 0.0;  // below threshold: u = 0, removal is fast
  p.begin_step(0.01, 0.01, omega);
  mv << 10.0;
  p.state_rhs(mv, dmv);
  CHECK(dmv(0) == doctest::Approx(-100.0 * 10.0));

  mv << 0.0;  // projected at zero
  p.state_rhs(mv, dmv);
  CHECK(dmv(0) == 0.0);
}

TEST_CASE("rate-limited scheme rejects non-positive rate bounds") {
  RateLimitedParams rl;
  rl.magnitude = 1.0;
  rl.epsilon = 1e-4;
  rl.rho = {4e-5};  // 2 rho <= epsilon
  CHECK_THROWS_AS(RateLimitedPolicy({0}, rl), ValidationError);
}

TEST_CASE("randomized set-point update rule") {
  CHECK(RandomizedPolicy::update_set_point(0.0, 0.3, 0.5) == 0.0);  // clamped
  CHECK(RandomizedPolicy::update_set_point(0.0, 0.7, 0.5) == 0.5);
  CHECK(RandomizedPolicy::update_set_point(1.0, 0.5, 0.5) == 1.5);  // r = 0.5 raises
  CHECK(RandomizedPolicy::update_set_point(0.2, 0.1, 0.5) == 0.0);
}

TEST_CASE("randomized updates are deterministic under a fixed seed") {
  auto make = [] {
    RateLimitedParams rl;
    rl.magnitude = 2.0;
    rl.rho = {1.0};
    RandomizedParams rp;
    rp.seed = 1234;
    return RandomizedPolicy({0}, rl, rp);
  };
  auto a = make();
  auto b = make();
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(1);
  for (int i = 0; i < 500; ++i) {
    const double t = 0.01 * i;
    a.begin_step(t, 0.01, omega);
    b.begin_step(t, 0.01, omega);
    CHECK(a.set_point(0) == b.set_point(0));
  }
}

TEST_CASE("randomized increase frequency is near one half") {
  UniformRng rng(2024);
  int ups = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    if (rng.next() >= 0.5) ++ups;
  const double freq = static_cast<double>(ups) / n;
  CHECK(freq > 0.47);
  CHECK(freq < 0.53);
}

TEST_CASE("open-loop profile evaluation and rate bound") {
  OpenLoopPolicy p({0}, {{{0.0, 0.0}, {1.0, 2.0}, {3.0, 2.0}, {4.0, 0.0}}});
  CHECK(p.virtual_inertia(0, -1.0) == 0.0);
  CHECK(p.virtual_inertia(0, 0.5) == doctest::Approx(1.0));
  CHECK(p.virtual_inertia(0, 2.0) == doctest::Approx(2.0));
  CHECK(p.virtual_inertia(0, 3.5) == doctest::Approx(1.0));
  CHECK(p.virtual_inertia(0, 9.0) == 0.0);
  CHECK(p.declared_rate_bound(0) == doctest::Approx(2.0));
}

TEST_CASE("assumption-4 check on a constant trace") {
  Eigen::MatrixXd trace = Eigen::MatrixXd::Constant(100, 2, 1.5);
  auto rep = check_assumption4(trace, {1.0, 1.0}, 0.01);
  CHECK(rep.compliant());
  CHECK(rep.empirical_lipschitz == 0.0);
}

TEST_CASE("assumption-4 check flags a jump") {
  Eigen::MatrixXd trace = Eigen::MatrixXd::Zero(10, 1);
  for (Eigen::Index i = 5; i < 10; ++i) trace(i, 0) = 3.0;  // jump at one step
  auto rep = check_assumption4(trace, {0.5}, 0.01);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].bus == 0);
  CHECK(rep.violations[0].rate == doctest::Approx(300.0));
  CHECK(rep.violations[0].bound == doctest::Approx(1.0));
  CHECK(rep.empirical_lipschitz == doctest::Approx(300.0));
}

TEST_CASE("assumption-4 check accepts a compliant ramp") {
  // slope 0.9 < 2 rho = 1.0
  Eigen::MatrixXd trace(200, 1);
  for (Eigen::Index i = 0; i < 200; ++i) trace(i, 0) = 0.9 * 0.01 * static_cast<double>(i);
  auto rep = check_assumption4(trace, {0.5}, 0.01);
  CHECK(rep.compliant());
  CHECK(rep.empirical_lipschitz == doctest::Approx(0.9));
}

TEST_CASE("destabilizer ramps are Lipschitz with the declared slope") {
  DestabilizerParams d;
  d.target_bus = 0;
  d.hold_inertia = 20.0;
  d.ramp_duration = 0.02;
  d.omega_sync_star = 0.0;
  DestabilizerPolicy p(d);
  CHECK(p.declared_rate_bound(0) == doctest::Approx(20.0 / 0.02));
  CHECK(p.virtual_inertia(0, 0.0) == 20.0);  // starts holding
  CHECK(p.phase_label() == "hold");
}
