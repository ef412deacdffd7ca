#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "vigrid/errors.hpp"
#include "vigrid/passivity.hpp"

using namespace vigrid;

namespace {

const TurbineGovernor kBus36{110.1, 0.45, 0.1, 0.0, 13.25, 54.0, 30.3};

// independent oracle: bisection over the positive-real test
double bisect_rho(const LtiSupply& sys) {
  double hi = sys.D();
  if (verify_rho(sys, hi)) return hi;
  double lo = hi - 1.0, step = 1.0;
  while (!verify_rho(sys, lo)) {
    lo -= step;
    step *= 2.0;
    REQUIRE(lo > -1e9);
  }
  for (int it = 0; it < 120 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    (verify_rho(sys, mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("first-order strictness constant equals the damping") {
  auto s = to_state_space(FirstOrderSupply{1.7, 4.0, 0.5});
  auto res = strictness_constant(s);
  CHECK(res.passive);
  CHECK(res.rho == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::isinf(res.argmin_frequency));
  CHECK(max_inertia_rate(res.certificate) == doctest::Approx(1.0));
}

TEST_CASE("bus-36 strictness constant is about 28") {
  auto s = to_state_space(kBus36);
  auto res = strictness_constant(s);
  CHECK(res.passive);
  CHECK(res.rho > 27.5);
  CHECK(res.rho < 28.5);
  CHECK(res.argmin_frequency > 1.0);  // interior minimum near 8.8 rad/s
  CHECK(res.argmin_frequency < 100.0);
  CHECK(max_inertia_rate(res.certificate) == doctest::Approx(2.0 * res.rho));
}

TEST_CASE("pure gain is strictly passive at every frequency") {
  LtiSupply gain(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), Eigen::RowVectorXd(0),
                 3.0);
  auto res = strictness_constant(gain);
  CHECK(res.rho == 3.0);
  CHECK(verify_rho(gain, 3.0));
  CHECK_FALSE(verify_rho(gain, 3.0 + 1e-12));
}

TEST_CASE("lag without damping is passive but not strictly") {
  // G = 1/(1+s): Re G -> 0 as w -> inf
  auto s = to_state_space(FirstOrderSupply{1.0, 1.0, 1e-12});
  LtiSupply undamped(s.A(), s.B(), s.C(), 0.0);
  auto res = strictness_constant(undamped);
  CHECK_FALSE(res.passive);
  CHECK(res.rho == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("verify_rho brackets the first-order optimum") {
  auto s = to_state_space(FirstOrderSupply{1.0, 1.0, 0.5});
  CHECK(verify_rho(s, 0.5));
  CHECK_FALSE(verify_rho(s, 0.51));
  CHECK(verify_rho(s, 0.3));
}

TEST_CASE("verify_rho brackets the bus-36 optimum") {
  auto s = to_state_space(kBus36);
  CHECK(verify_rho(s, 27.0));
  CHECK_FALSE(verify_rho(s, 29.0));
  CHECK_FALSE(verify_rho(s, 40.0));  // above the high-frequency limit
}

TEST_CASE("storage matrix solves the scalar Riccati equation") {
  auto s = to_state_space(FirstOrderSupply{1.0, 1.0, 0.5});
  auto res = strictness_constant(s);
  auto st = storage_matrix(s, res.rho);
  REQUIRE(st.P.rows() == 1);
  // scalar ARE 2 A P + (P B - C)^2 / (2 (D - rho')) = 0, stabilizing root
  const double A = s.A()(0, 0), B = s.B()(0), C = s.C()(0);
  const double R = 2.0 * (s.D() - st.margined_rho);
  const double a = B * B / R;
  const double b = 2.0 * A - 2.0 * B * C / R;
  const double c = C * C / R;
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  const double root_stable = (-b - disc) / (2.0 * a);
  CHECK(st.P(0, 0) == doctest::Approx(root_stable).epsilon(1e-6));
  CHECK(st.P(0, 0) >= 0.0);
  CHECK(st.kyp_residual <= 1e-8);
}

TEST_CASE("zero-state storage matrix is empty") {
  LtiSupply gain(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), Eigen::RowVectorXd(0),
                 3.0);
  auto st = storage_matrix(gain, 3.0);
  CHECK(st.P.rows() == 0);
  CHECK(st.kyp_residual <= 0.0);
}

TEST_CASE("bus-36 storage matrix satisfies the KYP block inequality") {
  auto s = to_state_space(kBus36);
  auto res = strictness_constant(s);
  auto st = storage_matrix(s, res.rho);
  REQUIRE(st.P.rows() == 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pe(st.P);
  CHECK(pe.eigenvalues().minCoeff() >= -1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> be(
      kyp_block(s, st.P, st.margined_rho));
  CHECK(be.eigenvalues().maxCoeff() <= 1e-8);
}

TEST_CASE("certificate soundness: swept Re G never dips below rho") {
  auto s = to_state_space(kBus36);
  auto res = strictness_constant(s);
  double lo = std::log(1e-4), hi = std::log(1e6);
  for (int i = 0; i < 10000; ++i) {
    const double w = std::exp(lo + (hi - lo) * i / 9999.0);
    CHECK(s.real_response(w) >= res.rho - 1e-9);
  }
  CHECK(s.dc_gain() >= res.rho - 1e-9);
  CHECK(s.D() >= res.rho - 1e-9);
}

TEST_CASE("feedthrough shift moves rho one-for-one") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = fixtures::random_stable_lti(gen, 2 + trial % 2);
    const double rho0 = strictness_constant(s).rho;
    const double c = 0.25 + 0.5 * trial;
    LtiSupply shifted(s.A(), s.B(), s.C(), s.D() + c);
    CHECK(strictness_constant(shifted).rho == doctest::Approx(rho0 + c).epsilon(1e-8));
  }
}

TEST_CASE("output scaling scales rho") {
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = fixtures::random_stable_lti(gen, 2 + trial % 2);
    const double rho0 = strictness_constant(s).rho;
    const double alpha = 0.5 + 0.4 * trial;
    LtiSupply scaled(s.A(), s.B(), alpha * s.C(), alpha * s.D());
    CHECK(strictness_constant(scaled).rho ==
          doctest::Approx(alpha * rho0).epsilon(1e-8));
  }
}

TEST_CASE("sweep agrees with the bisection oracle on random systems") {
  std::mt19937_64 gen(97);
  for (int trial = 0; trial < 25; ++trial) {
    auto s = fixtures::random_stable_lti(gen, 2 + trial % 2);
    const double swept = strictness_constant(s).rho;
    const double oracle = bisect_rho(s);
    CHECK(std::abs(swept - oracle) < 1e-6);
  }
}

TEST_CASE("second-order underdamped supply is not strictly passive") {
  // Re G dips to lambda - K/(4 zeta (1+zeta)) below the resonance
  auto s = fixtures::second_order(0.3, 12.0, 0.2, 0.05);
  auto res = strictness_constant(s);
  CHECK_FALSE(res.passive);
  const double expected = 0.05 - 0.3 / (4.0 * 0.2 * 1.2);
  CHECK(res.rho == doctest::Approx(expected).epsilon(1e-6));
}
