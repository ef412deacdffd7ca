#include "vigrid/supply.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vigrid/errors.hpp"

namespace vigrid {

LtiSupply::LtiSupply() : A_(0, 0), B_(0), C_(1, 0), D_(0.0) {}

LtiSupply::LtiSupply(Eigen::MatrixXd A, Eigen::VectorXd B, Eigen::RowVectorXd C,
                     double D)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(D) {
  if (A_.rows() != A_.cols()) throw ValidationError("supply A must be square");
  if (B_.size() != A_.rows() || C_.size() != A_.rows())
    throw ValidationError("supply B/C dimension mismatch");
  if (order() > 0 && spectral_abscissa() >= 0.0)
    throw ValidationError("supply A is not Hurwitz");
}

Eigen::VectorXd LtiSupply::dynamics(const Eigen::VectorXd& x, double omega) const {
  if (x.size() != order()) throw ValidationError("supply state dimension mismatch");
  return A_ * x + B_ * (-omega);
}

double LtiSupply::output(const Eigen::VectorXd& x, double omega) const {
  if (x.size() != order()) throw ValidationError("supply state dimension mismatch");
  return (order() > 0 ? C_.dot(x) : 0.0) + D_ * (-omega);
}

LtiSupply::StaticPoint LtiSupply::static_characteristic(double omega_bar) const {
  StaticPoint p;
  if (order() == 0) {
    p.state = Eigen::VectorXd(0);
    p.output = D_ * (-omega_bar);
    return p;
  }
  p.state = A_.partialPivLu().solve(B_ * omega_bar);  // -A^{-1} B (-omega)
  p.output = C_.dot(p.state) + D_ * (-omega_bar);
  return p;
}

double LtiSupply::dc_gain() const {
  if (order() == 0) return D_;
  return D_ - C_.dot(A_.partialPivLu().solve(B_));
}

std::complex<double> LtiSupply::frequency_response(double omega_rad) const {
  if (order() == 0) return {D_, 0.0};
  const std::complex<double> jw(0.0, omega_rad);
  Eigen::MatrixXcd M = jw * Eigen::MatrixXcd::Identity(order(), order()) -
                       A_.cast<std::complex<double>>();
  Eigen::VectorXcd x = M.partialPivLu().solve(B_.cast<std::complex<double>>());
  return (C_.cast<std::complex<double>>() * x).value() + D_;
}

double LtiSupply::real_response(double omega_rad) const {
  return frequency_response(omega_rad).real();
}

double LtiSupply::spectral_abscissa() const {
  if (order() == 0) return -std::numeric_limits<double>::infinity();
  return A_.eigenvalues().real().maxCoeff();
}

LtiSupply to_state_space(const FirstOrderSupply& fo) {
  if (!(fo.time_constant > 0.0) || !(fo.droop > 0.0) || !(fo.damping > 0.0))
    throw ValidationError("first-order supply constants must be > 0");
  Eigen::MatrixXd A(1, 1);
  A << -1.0 / fo.time_constant;
  Eigen::VectorXd B(1);
  B << fo.droop / fo.time_constant;
  Eigen::RowVectorXd C(1);
  C << 1.0;
  return LtiSupply(A, B, C, fo.damping);
}

namespace {

// ascending-power coefficients; multiply by (1 + T s)
std::vector<double> mul_factor(std::vector<double> poly, double T) {
  std::vector<double> out(poly.size() + 1, 0.0);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    out[i] += poly[i];
    out[i + 1] += poly[i] * T;
  }
  return out;
}

}  // namespace

std::complex<double> governor_response(const TurbineGovernor& gov, double omega_rad) {
  const std::complex<double> s(0.0, omega_rad);
  std::complex<double> num = gov.droop;
  std::complex<double> den = 1.0;
  for (double T : {gov.lead_tc, gov.hp_tc})
    if (T > 0.0) num *= (1.0 + s * T);
  for (double T : {gov.servo_tc, gov.lag_tc, gov.reheat_tc})
    if (T > 0.0) den *= (1.0 + s * T);
  return num / den + gov.damping;
}

LtiSupply to_state_space(const TurbineGovernor& gov) {
  for (double T : {gov.servo_tc, gov.lag_tc, gov.lead_tc, gov.hp_tc, gov.reheat_tc})
    if (T < 0.0) throw ValidationError("governor time constants must be >= 0");
  if (!(gov.droop > 0.0)) throw ValidationError("governor droop must be > 0");
  if (gov.damping < 0.0) throw ValidationError("governor damping must be >= 0");

  std::vector<double> leads, lags;
  for (double T : {gov.lead_tc, gov.hp_tc})
    if (T > 0.0) leads.push_back(T);
  for (double T : {gov.servo_tc, gov.lag_tc, gov.reheat_tc})
    if (T > 0.0) lags.push_back(T);

  // Cancel coincident lead/lag pairs; roots are -1/T so comparing the time
  // constants themselves is equivalent (tolerance 1e-9 on coincidence).
  for (auto it = leads.begin(); it != leads.end();) {
    auto match = std::find_if(lags.begin(), lags.end(), [&](double T) {
      return std::abs(T - *it) <= 1e-9 * std::max(1.0, std::abs(*it));
    });
    if (match != lags.end()) {
      lags.erase(match);
      it = leads.erase(it);
    } else {
      ++it;
    }
  }

  if (leads.size() > lags.size())
    throw ValidationError("governor transfer function is improper");

  std::vector<double> num{gov.droop};
  for (double T : leads) num = mul_factor(num, T);
  std::vector<double> den{1.0};
  for (double T : lags) den = mul_factor(den, T);

  const std::size_t d = den.size() - 1;
  if (d == 0) {
    // pure gain
    return LtiSupply(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0),
                     Eigen::RowVectorXd(1, 0), gov.droop + gov.damping);
  }

  // G = (num + damping*den)/den; feedthrough is the ratio of the degree-d
  // coefficients.
  std::vector<double> full(d + 1, 0.0);
  for (std::size_t i = 0; i < num.size(); ++i) full[i] += num[i];
  for (std::size_t i = 0; i <= d; ++i) full[i] += gov.damping * den[i];
  const double feedthrough = full[d] / den[d];

  // strictly proper remainder b(s) = full - feedthrough*den, degree < d
  std::vector<double> b(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) b[i] = full[i] - feedthrough * den[i];

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                            static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i + 1 < d; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
  for (std::size_t i = 0; i < d; ++i)
    A(static_cast<Eigen::Index>(d - 1), static_cast<Eigen::Index>(i)) = -den[i] / den[d];
  Eigen::VectorXd B = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  B(static_cast<Eigen::Index>(d - 1)) = 1.0;
  Eigen::RowVectorXd C(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) C(static_cast<Eigen::Index>(i)) = b[i] / den[d];

  // the LtiSupply constructor re-checks Hurwitz-ness of A
  return LtiSupply(std::move(A), std::move(B), std::move(C), feedthrough);
}

}  // namespace vigrid
