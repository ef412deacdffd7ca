#ifndef VIGRID_PASSIVITY_HPP
#define VIGRID_PASSIVITY_HPP

#include <Eigen/Dense>
#include <limits>
#include <string>

#include "vigrid/supply.hpp"

namespace vigrid {

/// Input-strict-passivity certificate for an LTI supply. The strictness
/// constant rho is the infimum over frequency of Re G(jw); the storage
/// matrix P satisfies the KYP block inequality at the margined constant
/// rho' = rho (1 - margin) and gives the storage function 1/2 x'Px.
struct PassivityCertificate {
  double rho = 0.0;                 // p.u./Hz
  double margined_rho = 0.0;        // rho' actually certified by P
  Eigen::MatrixXd storage;          // P, n x n, symmetric PSD
  double argmin_frequency = 0.0;    // rad/s; +inf when approached at infinity
  std::string method;               // "riccati-verified" | "frequency-sweep"
  double kyp_residual = 0.0;        // max eigenvalue of the KYP block at rho'
};

/// Outcome of the strictness sweep. A supply with rho <= 0 is not input
/// strictly passive; that is a legal result, not an error.
struct StrictnessResult {
  double rho = 0.0;
  double argmin_frequency = 0.0;
  bool passive = false;             // rho > 0
  bool refined_by_bisection = false;
  PassivityCertificate certificate; // valid only when passive
};

/// Positive-real test for G(s) - rho_candidate. With positive shifted
/// feedthrough the test is spectral: the associated Hamiltonian matrix must
/// have no eigenvalues on the imaginary axis (tolerance 1e-7 on |Re|).
/// With zero shifted feedthrough it falls back to the sampled sweep grid.
bool verify_rho(const LtiSupply& sys, double rho_candidate);

/// Storage matrix from the stabilizing solution of the positive-real
/// Riccati equation for G(s) - rho. On failure the relative margin is
/// escalated tenfold up to 1e-1 before giving up.
/// Returns P together with the achieved KYP block residual.
struct StorageSolve {
  Eigen::MatrixXd P;
  double margined_rho = 0.0;
  double kyp_residual = 0.0;
};
StorageSolve storage_matrix(const LtiSupply& sys, double rho, double margin = 1e-3);

/// Infimum of Re G(jw) over [0, inf], by a 2000-point log sweep over
/// [1e-4, 1e6] rad/s with golden-section refinement of every local minimum,
/// compared against the limits G(0) and G(inf) = D. The result is certified
/// through the Hamiltonian test; if certification exposes a missed notch the
/// value is refined by bisection over verify_rho.
StrictnessResult strictness_constant(const LtiSupply& sys);

/// Assumption-4 bound: Mdot must stay below twice the strictness constant.
double max_inertia_rate(const PassivityCertificate& cert);

/// KYP block matrix of Eq-type [[A'P+PA, PB-C'], [B'P-C, -2(D-rho)]];
/// exposed for tests.
Eigen::MatrixXd kyp_block(const LtiSupply& sys, const Eigen::MatrixXd& P, double rho);

}  // namespace vigrid

#endif
