#ifndef VIGRID_SUPPLY_HPP
#define VIGRID_SUPPLY_HPP

#include <Eigen/Dense>
#include <complex>

namespace vigrid {

/// Aggregate power-supply dynamics at one bus as a minimal LTI realization
///
///   x' = A x + B u,   s = C x + D u,   u = -omega
///
/// The input is the negated local frequency deviation; every member takes
/// omega and applies the sign internally so callers never handle it.
/// A must be Hurwitz. Zero-state (pure feedthrough) systems are allowed.
class LtiSupply {
 public:
  LtiSupply();  // zero-state, D = 0
  LtiSupply(Eigen::MatrixXd A, Eigen::VectorXd B, Eigen::RowVectorXd C, double D);

  Eigen::Index order() const { return A_.rows(); }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& B() const { return B_; }
  const Eigen::RowVectorXd& C() const { return C_; }
  double D() const { return D_; }

  /// x' = A x + B (-omega)
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, double omega) const;
  /// s = C x + D (-omega)
  double output(const Eigen::VectorXd& x, double omega) const;

  /// Steady state under constant frequency deviation: x = k_x(-omega),
  /// together with the corresponding output s = G(0) (-omega).
  struct StaticPoint {
    Eigen::VectorXd state;
    double output = 0.0;
  };
  StaticPoint static_characteristic(double omega_bar) const;

  /// dc gain G(0) = D - C A^{-1} B.
  double dc_gain() const;
  /// G(j w) = C (j w I - A)^{-1} B + D.
  std::complex<double> frequency_response(double omega_rad) const;
  /// Re G(j w); the quantity swept by the passivity certification.
  double real_response(double omega_rad) const;

  /// max Re eig(A); < 0 for a valid supply.
  double spectral_abscissa() const;

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd B_;
  Eigen::RowVectorXd C_;
  double D_ = 0.0;
};

/// First-order generation dynamics
///   tau x' = -x - K omega,   s = x - lambda omega
/// with time, droop and damping constants all > 0.
struct FirstOrderSupply {
  double time_constant = 1.0;  // tau, s
  double droop = 1.0;          // K, p.u./Hz
  double damping = 0.0;        // lambda, p.u./Hz
};

/// Turbine-governor transfer function
///
///   G(s) = droop * (1 + s*lead_tc)(1 + s*hp_tc)
///          / ((1 + s*servo_tc)(1 + s*lag_tc)(1 + s*reheat_tc)) + damping
///
/// Field order matches the Power System Toolbox tg_con row
/// (gain, servo, lag, lead, HP, reheat, damping). A zero time constant
/// drops its factor.
struct TurbineGovernor {
  double droop = 1.0;      // p.u./Hz
  double servo_tc = 0.1;   // s, lag
  double lag_tc = 0.0;     // s, transient-gain-reduction lag
  double lead_tc = 0.0;    // s, transient-gain-reduction lead
  double hp_tc = 0.0;      // s, high-pressure turbine lead
  double reheat_tc = 1.0;  // s, reheater lag
  double damping = 0.0;    // p.u./Hz
};

LtiSupply to_state_space(const FirstOrderSupply& fo);

/// Controllable canonical realization of the strictly proper part plus
/// the high-frequency feedthrough. Coincident lead/lag pairs (within 1e-9
/// relative) are cancelled before realization so the result is minimal.
/// Throws if the transfer function is improper or the denominator is not
/// Hurwitz.
LtiSupply to_state_space(const TurbineGovernor& gov);

/// Direct rational evaluation of the governor transfer function; used as
/// the independent reference for realization checks.
std::complex<double> governor_response(const TurbineGovernor& gov, double omega_rad);

}  // namespace vigrid

#endif
