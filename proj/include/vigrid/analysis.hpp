#ifndef VIGRID_ANALYSIS_HPP
#define VIGRID_ANALYSIS_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "vigrid/grid.hpp"
#include "vigrid/simulate.hpp"
#include "vigrid/supply.hpp"

namespace vigrid {

/// Synchronous equilibrium of the coupled network/supply system. The angle
/// part solves the bus balance through minimum-norm flows; on cyclic graphs
/// the angle vector is one representative of the equilibrium set.
struct Equilibrium {
  double omega_sync = 0.0;          // common frequency deviation, Hz
  Eigen::VectorXd eta;              // per line
  Eigen::VectorXd flows;            // p*, per line
  Eigen::VectorXd xs;               // concatenated supply states
  Eigen::VectorXd supply;           // s*, per bus
  bool assumption1_ok = false;      // |eta*| < pi/2 on every line
  double residual = 0.0;            // sup-norm of the defining equations
  std::size_t cycle_dim = 0;        // dimension of the flow null space
};

/// Quasi-equilibrium with one bus pinned at omega_bar: all frequencies
/// synchronize at omega_bar, supplies sit on their static characteristics
/// and the pinned bus absorbs the aggregate imbalance.
struct GammaPoint {
  double omega_bar = 0.0;
  std::size_t slack_bus = 0;
  Eigen::VectorXd eta;
  Eigen::VectorXd flows;
  Eigen::VectorXd xs;
  Eigen::VectorXd supply;
  double slack_injection = 0.0;  // residual of the pinned bus's balance
  double residual = 0.0;         // sup-norm over the enforced equations
};

Equilibrium find_equilibrium(const NetworkGraph& graph,
                             const std::vector<LtiSupply>& supplies,
                             const Eigen::VectorXd& loads, FlowModel model);

GammaPoint gamma_point(const NetworkGraph& graph,
                       const std::vector<LtiSupply>& supplies,
                       const Eigen::VectorXd& loads, double omega_bar,
                       std::size_t slack_bus);

/// Value of the Lyapunov candidate V = V_F + V_P + sum_j V_j at one state.
struct LyapunovValue {
  double total = 0.0;
  double kinetic = 0.0;     // V_F = 1/2 sum M_j(t) (omega_j - omega*)^2
  double potential = 0.0;   // V_P, closed form (nonlinear) or quadratic (linear)
  double storage = 0.0;     // sum_j 1/2 (x_j - x_j*)' P_j (x_j - x_j*)
  bool partial = false;     // true when some bus had no storage matrix
};

/// Per-bus storage matrices; an empty entry degrades the report to partial.
using StorageSet = std::vector<std::optional<Eigen::MatrixXd>>;

LyapunovValue lyapunov_value(const NetworkGraph& graph,
                             const std::vector<LtiSupply>& supplies,
                             const Equilibrium& eq, const SystemState& state,
                             const StorageSet& storage, FlowModel model);

/// Closed-form potential term for one line; matches the integral of
/// B (sin(phi) - sin(eta*)) from eta* to eta.
double lyapunov_edge_potential(double susceptance, double eta_star, double eta);

struct LyapunovReport {
  std::vector<double> times;
  std::vector<double> V, V_F, V_P, V_storage;
  std::vector<double> bound;        // rhs of the dissipation inequality, per step
  std::vector<std::size_t> jump_steps;  // forward differences above tolerance
  double max_positive_jump = 0.0;
  double tolerance = 0.0;
  bool monotone_ok = false;
  bool partial = false;
};

/// Evaluate V along a trajectory and check the dissipation inequality
/// dV <= sum_j (dM_j/2 - rho_j h)(omega_j - omega*)^2 within a c h^2
/// tolerance; c defaults to ten times a robust (95th percentile) estimate
/// of |dV/dt| so genuine inertia switch jumps stay flagged.
LyapunovReport check_dissipation(const NetworkGraph& graph,
                                 const std::vector<LtiSupply>& supplies,
                                 const Equilibrium& eq, const Trajectory& traj,
                                 const std::vector<double>& rho,
                                 const StorageSet& storage, FlowModel model);

enum class RunClass { Convergent, Oscillatory, Divergent };

struct RunMetrics {
  RunClass classification = RunClass::Oscillatory;
  double max_deviation = 0.0;
  double final_deviation = 0.0;               // max over the last 10%
  std::optional<double> settling_time;        // first entry into the 1e-4 band
  std::vector<double> peak_sequence;          // at the most-deviating bus
  std::optional<double> escape_time;
};

std::string to_string(RunClass c);

/// Fig. 2/3/5-style readout: convergent when the final 10% stays within
/// 1e-4 Hz of the synchronous equilibrium; divergent on escape past
/// `escape_radius` or when per-cycle peaks grow by >= 5% over at least five
/// consecutive cycles; oscillatory otherwise.
RunMetrics classify_run(const Trajectory& traj, const Equilibrium& eq,
                        double escape_radius = 0.5);

}  // namespace vigrid

#endif
