#include "vigrid/passivity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vigrid/errors.hpp"

namespace vigrid {

namespace {

constexpr double kGridLo = 1e-4;
constexpr double kGridHi = 1e6;
constexpr int kGridPoints = 2000;
constexpr double kAxisTol = 1e-7;  // |Re eig| below this counts as on-axis

std::vector<double> sweep_grid() {
  std::vector<double> w(kGridPoints);
  const double llo = std::log(kGridLo), lhi = std::log(kGridHi);
  for (int i = 0; i < kGridPoints; ++i)
    w[i] = std::exp(llo + (lhi - llo) * i / (kGridPoints - 1));
  return w;
}

// golden-section minimization of Re G over [lo, hi] in log-frequency
std::pair<double, double> refine_min(const LtiSupply& sys, double lo, double hi) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo), b = std::log(hi);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = sys.real_response(std::exp(c));
  double fd = sys.real_response(std::exp(d));
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = sys.real_response(std::exp(c));
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = sys.real_response(std::exp(d));
    }
  }
  const double wmin = std::exp((a + b) / 2.0);
  return {wmin, sys.real_response(wmin)};
}

// Hamiltonian of the positive-real Riccati equation for (A,B,C,D-rho);
// requires R = 2(D-rho) > 0.
Eigen::MatrixXd pr_hamiltonian(const LtiSupply& sys, double rho) {
  const Eigen::Index n = sys.order();
  const double R = 2.0 * (sys.D() - rho);
  const Eigen::MatrixXd& A = sys.A();
  const Eigen::VectorXd& B = sys.B();
  const Eigen::RowVectorXd& C = sys.C();
  Eigen::MatrixXd Ahat = A - B * C / R;
  Eigen::MatrixXd Z(2 * n, 2 * n);
  Z.topLeftCorner(n, n) = Ahat;
  Z.topRightCorner(n, n) = B * B.transpose() / R;
  Z.bottomLeftCorner(n, n) = -C.transpose() * C / R;
  Z.bottomRightCorner(n, n) = -Ahat.transpose();
  return Z;
}

double grid_minimum(const LtiSupply& sys) {
  const auto w = sweep_grid();
  std::vector<double> f(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) f[i] = sys.real_response(w[i]);
  double best = std::min(sys.dc_gain(), sys.D());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool local_min = (i == 0 || f[i] <= f[i - 1]) &&
                           (i + 1 == w.size() || f[i] <= f[i + 1]);
    if (!local_min) {
      best = std::min(best, f[i]);
      continue;
    }
    const double lo = (i == 0) ? w[0] : w[i - 1];
    const double hi = (i + 1 == w.size()) ? w.back() : w[i + 1];
    best = std::min(best, refine_min(sys, lo, hi).second);
  }
  return best;
}

}  // namespace

Eigen::MatrixXd kyp_block(const LtiSupply& sys, const Eigen::MatrixXd& P, double rho) {
  const Eigen::Index n = sys.order();
  Eigen::MatrixXd M(n + 1, n + 1);
  if (n > 0) {
    M.topLeftCorner(n, n) = sys.A().transpose() * P + P * sys.A();
    M.topRightCorner(n, 1) = P * sys.B() - sys.C().transpose();
    M.bottomLeftCorner(1, n) = sys.B().transpose() * P - sys.C();
  }
  M(n, n) = -2.0 * (sys.D() - rho);
  return M;
}

bool verify_rho(const LtiSupply& sys, double rho_candidate) {
  const double shifted_D = sys.D() - rho_candidate;
  if (shifted_D < 0.0) return false;  // violated at the high-frequency limit
  if (sys.order() == 0) return true;  // Re G == D >= rho everywhere
  if (shifted_D > 0.0) {
    Eigen::MatrixXd Z = pr_hamiltonian(sys, rho_candidate);
    Eigen::VectorXcd ev = Z.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (std::abs(ev(i).real()) <= kAxisTol) return false;
    return true;
  }
  // degenerate shift: infimum approached at infinity, check the sampled grid
  if (sys.dc_gain() < rho_candidate - 1e-9) return false;
  return grid_minimum(sys) >= rho_candidate - 1e-9;
}

StorageSolve storage_matrix(const LtiSupply& sys, double rho, double margin) {
  const Eigen::Index n = sys.order();
  std::string last_failure = "no attempt";
  for (double m = margin; m <= 0.1 + 1e-12; m *= 10.0) {
    const double rp = rho * (1.0 - m);
    if (n == 0) {
      // empty P; the KYP block reduces to -2(D - rho') <= 0
      if (sys.D() - rp < 0.0) {
        last_failure = "negative shifted feedthrough";
        continue;
      }
      return {Eigen::MatrixXd(0, 0), rp, -2.0 * (sys.D() - rp)};
    }
    if (!(sys.D() - rp > 0.0)) {
      last_failure = "shifted feedthrough not positive";
      continue;
    }
    Eigen::MatrixXd Z = pr_hamiltonian(sys, rp);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Z.cast<std::complex<double>>());
    if (es.info() != Eigen::Success) {
      last_failure = "Hamiltonian eigensolve failed";
      continue;
    }
    // stable invariant subspace
    std::vector<Eigen::Index> stable;
    for (Eigen::Index i = 0; i < 2 * n; ++i)
      if (es.eigenvalues()(i).real() < -kAxisTol) stable.push_back(i);
    if (static_cast<Eigen::Index>(stable.size()) != n) {
      last_failure = "Hamiltonian has eigenvalues on the imaginary axis";
      continue;
    }
    Eigen::MatrixXcd U(n, n), V(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      U.col(k) = es.eigenvectors().col(stable[k]).head(n);
      V.col(k) = es.eigenvectors().col(stable[k]).tail(n);
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(U);
    if (!lu.isInvertible()) {
      last_failure = "singular invariant-subspace basis";
      continue;
    }
    Eigen::MatrixXd P = (V * lu.inverse()).real();
    P = 0.5 * (P + P.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pe(P);
    const double scale = std::max(1.0, pe.eigenvalues().cwiseAbs().maxCoeff());
    if (pe.eigenvalues().minCoeff() < -1e-8 * scale) {
      last_failure = "storage matrix not positive semidefinite";
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> be(kyp_block(sys, P, rp));
    const double residual = be.eigenvalues().maxCoeff();
    if (residual > 1e-8) {
      last_failure = "KYP block residual " + std::to_string(residual);
      continue;
    }
    return {P, rp, residual};
  }
  throw NumericalError("storage matrix solve failed up to margin 1e-1: " +
                       last_failure);
}

StrictnessResult strictness_constant(const LtiSupply& sys) {
  if (sys.order() > 0 && sys.spectral_abscissa() >= 0.0)
    throw ValidationError("supply is not Hurwitz; no certificate");

  StrictnessResult res;
  if (sys.order() == 0) {
    res.rho = sys.D();
    res.argmin_frequency = 0.0;  // attained at every frequency
    res.passive = res.rho > 0.0;
    if (res.passive) {
      auto st = storage_matrix(sys, res.rho);
      res.certificate = {res.rho, st.margined_rho, st.P, res.argmin_frequency,
                         "frequency-sweep", st.kyp_residual};
    }
    return res;
  }

  const auto w = sweep_grid();
  std::vector<double> f(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) f[i] = sys.real_response(w[i]);

  double best = sys.dc_gain();
  double best_w = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool local_min = (i == 0 || f[i] <= f[i - 1]) &&
                           (i + 1 == w.size() || f[i] <= f[i + 1]);
    double cand = f[i], cand_w = w[i];
    if (local_min) {
      const double lo = (i == 0) ? w[0] : w[i - 1];
      const double hi = (i + 1 == w.size()) ? w.back() : w[i + 1];
      auto [wm, fm] = refine_min(sys, lo, hi);
      cand = fm;
      cand_w = wm;
    }
    if (cand < best) {
      best = cand;
      best_w = cand_w;
    }
  }
  // the infimum may only be approached in the limit w -> inf
  if (sys.D() <= best) {
    best = sys.D();
    best_w = std::numeric_limits<double>::infinity();
  }

  // certification: the sweep value must be positive-real-feasible just below
  // itself; otherwise a notch was missed and bisection recovers the optimum
  const double slack = 1e-6 * std::max(1.0, std::abs(best));
  if (!verify_rho(sys, best - slack)) {
    double hi = best - slack;          // known infeasible
    double lo = hi - std::max(1.0, std::abs(best));
    double step = std::max(1.0, std::abs(best));
    while (!verify_rho(sys, lo)) {
      hi = lo;
      step *= 2.0;
      lo -= step;
      if (lo < -1e9) throw NumericalError("bisection bracket not found");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (verify_rho(sys, mid) ? lo : hi) = mid;
    }
    best = lo;
    best_w = std::numeric_limits<double>::quiet_NaN();  // location unknown
    res.refined_by_bisection = true;
  }

  res.rho = best;
  res.argmin_frequency = best_w;
  res.passive = best > 0.0;
  if (res.passive) {
    auto st = storage_matrix(sys, best);
    const bool degenerate = !(sys.D() - st.margined_rho > 0.0) || sys.order() == 0;
    res.certificate = {best, st.margined_rho, st.P, best_w,
                       degenerate ? "frequency-sweep" : "riccati-verified",
                       st.kyp_residual};
  }
  return res;
}

double max_inertia_rate(const PassivityCertificate& cert) { return 2.0 * cert.rho; }

}  // namespace vigrid
