#ifndef VIGRID_SIMULATE_HPP
#define VIGRID_SIMULATE_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vigrid/grid.hpp"
#include "vigrid/inertia.hpp"
#include "vigrid/supply.hpp"

namespace vigrid {

enum class FlowModel { Nonlinear, Linear };

/// Step change of the constant load at one bus, applied at the first step
/// boundary at or after `time`.
struct Disturbance {
  std::size_t bus = 0;
  double delta_load = 0.0;
  double time = 0.0;
};

struct SimConfig {
  double step = 0.01;           // h, s
  double horizon = 10.0;        // T, s
  FlowModel model = FlowModel::Nonlinear;
  std::vector<Disturbance> disturbances;
  /// when set, bus `fixed_bus` keeps frequency fixed_omega and its swing
  /// equation is dropped
  std::optional<std::size_t> fixed_bus;
  double fixed_omega = 0.0;
};

/// Dynamic state beta = (eta, omega, x^s) plus the bus virtual inertias.
struct SystemState {
  double t = 0.0;
  Eigen::VectorXd eta;     // per line, rad
  Eigen::VectorXd omega;   // per bus, Hz
  Eigen::VectorXd xs;      // concatenated supply states
  Eigen::VectorXd mv;      // per bus, s.p.u.
};

struct Trajectory {
  double step = 0.0;
  std::vector<double> times;
  Eigen::MatrixXd eta;    // row per sample
  Eigen::MatrixXd omega;
  Eigen::MatrixXd xs;
  Eigen::MatrixXd mv;     // per bus
  Eigen::MatrixXd policy_u;         // per policy slot (empty without policy)
  std::vector<std::string> phases;  // policy phase label per sample (may be empty)
  bool aborted_nonfinite = false;   // trajectory truncated at the bad step
  std::size_t samples() const { return times.size(); }
};

/// Couples the graph, per-bus supplies and an inertia policy into the swing
/// dynamics and integrates them with classical fixed-step RK4. Feedback
/// policies are sampled at step boundaries and held; open-loop time profiles
/// are evaluated at stage times; rate-limited virtual inertia is integrated
/// as part of the state vector.
class Simulator {
 public:
  Simulator(const NetworkGraph& graph, std::vector<LtiSupply> supplies);

  const NetworkGraph& graph() const { return graph_; }
  const std::vector<LtiSupply>& supplies() const { return supplies_; }
  Eigen::Index state_dim(const InertiaPolicy* policy) const;
  Eigen::Index xs_dim() const { return xs_dim_; }
  Eigen::Index xs_offset(std::size_t bus) const { return xs_offset_[bus]; }

  /// Equilibrium-style zero state: eta = 0, omega = 0, xs = 0.
  SystemState rest_state() const;

  /// Time derivative of (eta, omega, xs) for given per-bus Mv and loads.
  /// s_j = C x_j + D(-omega_j) already carries the damping feedthrough;
  /// M = M0 + Mv multiplies the left-hand side of the swing equation.
  void rhs(const SystemState& state, const Eigen::VectorXd& mv,
           const Eigen::VectorXd& loads, FlowModel model,
           std::optional<std::size_t> fixed_bus, Eigen::Ref<Eigen::VectorXd> deta,
           Eigen::Ref<Eigen::VectorXd> domega, Eigen::Ref<Eigen::VectorXd> dxs) const;

  /// Integrate from `initial`; the policy may be null (no virtual inertia).
  Trajectory integrate(const SystemState& initial, const SimConfig& config,
                       InertiaPolicy* policy) const;

  /// Convenience wrapper for the fixed-frequency-bus system.
  Trajectory integrate_fixed_bus(const SystemState& initial, std::size_t bus,
                                 double omega_bar, SimConfig config,
                                 InertiaPolicy* policy) const;

 private:
  const NetworkGraph& graph_;
  std::vector<LtiSupply> supplies_;
  std::vector<Eigen::Index> xs_offset_;
  Eigen::Index xs_dim_ = 0;
};

}  // namespace vigrid

#endif
