#include "vigrid/simulate.hpp"

#include <cmath>

#include "vigrid/errors.hpp"

namespace vigrid {

Simulator::Simulator(const NetworkGraph& graph, std::vector<LtiSupply> supplies)
    : graph_(graph), supplies_(std::move(supplies)) {
  if (supplies_.size() != graph_.bus_count())
    throw ValidationError("one supply model per bus required");
  xs_offset_.resize(supplies_.size());
  for (std::size_t j = 0; j < supplies_.size(); ++j) {
    xs_offset_[j] = xs_dim_;
    xs_dim_ += supplies_[j].order();
  }
}

Eigen::Index Simulator::state_dim(const InertiaPolicy* policy) const {
  return static_cast<Eigen::Index>(graph_.line_count() + graph_.bus_count()) +
         xs_dim_ + (policy ? static_cast<Eigen::Index>(policy->state_size()) : 0);
}

SystemState Simulator::rest_state() const {
  SystemState s;
  s.eta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph_.line_count()));
  s.omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph_.bus_count()));
  s.xs = Eigen::VectorXd::Zero(xs_dim_);
  s.mv = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph_.bus_count()));
  return s;
}

void Simulator::rhs(const SystemState& state, const Eigen::VectorXd& mv,
                    const Eigen::VectorXd& loads, FlowModel model,
                    std::optional<std::size_t> fixed_bus,
                    Eigen::Ref<Eigen::VectorXd> deta,
                    Eigen::Ref<Eigen::VectorXd> domega,
                    Eigen::Ref<Eigen::VectorXd> dxs) const {
  const auto& H = graph_.incidence();
  const Eigen::VectorXd p = model == FlowModel::Nonlinear
                                ? line_flows_nonlinear(graph_, state.eta)
                                : line_flows_linear(graph_, state.eta);
  deta = H.transpose() * state.omega;
  const Eigen::VectorXd injection = H * p;
  for (std::size_t j = 0; j < graph_.bus_count(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto& sup = supplies_[j];
    const double omega_j = state.omega(jj);
    const double s_j =
        sup.output(state.xs.segment(xs_offset_[j], sup.order()), omega_j);
    const double M_j = graph_.bus_params()[j].inertia + mv(jj);
    if (!(M_j > 0.0))
      throw NumericalError("non-positive total inertia at bus " + graph_.bus_id(j));
    domega(jj) = (-loads(jj) + s_j - injection(jj)) / M_j;
    if (sup.order() > 0)
      dxs.segment(xs_offset_[j], sup.order()) =
          sup.dynamics(state.xs.segment(xs_offset_[j], sup.order()), omega_j);
  }
  if (fixed_bus) domega(static_cast<Eigen::Index>(*fixed_bus)) = 0.0;
}

Trajectory Simulator::integrate(const SystemState& initial, const SimConfig& config,
                                InertiaPolicy* policy) const {
  if (!(config.step > 0.0) || !(config.horizon > 0.0))
    throw ValidationError("simulation step and horizon must be > 0");
  const auto ne = static_cast<Eigen::Index>(graph_.line_count());
  const auto nb = static_cast<Eigen::Index>(graph_.bus_count());
  if (initial.eta.size() != ne || initial.omega.size() != nb ||
      initial.xs.size() != xs_dim_)
    throw ValidationError("initial state dimensions do not match the model");
  if (config.fixed_bus && *config.fixed_bus >= graph_.bus_count())
    throw ValidationError("fixed bus index out of range");

  const double h = config.step;
  const auto steps = static_cast<std::size_t>(std::llround(config.horizon / h));
  const std::size_t n_policy = policy ? policy->state_size() : 0;
  const bool policy_is_ode = n_policy > 0;

  std::vector<std::size_t> slot_bus;
  if (policy) slot_bus = policy->buses();

  Trajectory traj;
  traj.step = h;
  traj.times.reserve(steps + 1);
  traj.eta.resize(steps + 1, ne);
  traj.omega.resize(steps + 1, nb);
  traj.xs.resize(steps + 1, xs_dim_);
  traj.mv.resize(steps + 1, nb);
  traj.policy_u.resize(steps + 1, static_cast<Eigen::Index>(slot_bus.size()));

  SystemState s = initial;
  s.mv = Eigen::VectorXd::Zero(nb);
  Eigen::VectorXd loads = graph_.loads();
  std::vector<bool> applied(config.disturbances.size(), false);

  Eigen::VectorXd pol_state =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_policy));
  if (policy_is_ode) policy->initial_state(pol_state);

  // scratch
  SystemState tmp = s;
  Eigen::VectorXd k_eta[4], k_omega[4], k_xs[4], k_pol[4];
  for (auto& v : k_eta) v.resize(ne);
  for (auto& v : k_omega) v.resize(nb);
  for (auto& v : k_xs) v.resize(xs_dim_);
  for (auto& v : k_pol) v.resize(static_cast<Eigen::Index>(n_policy));

  auto mv_vector = [&](double stage_t, const Eigen::VectorXd& pol) {
    Eigen::VectorXd mv = Eigen::VectorXd::Zero(nb);
    if (!policy) return mv;
    for (std::size_t slot = 0; slot < slot_bus.size(); ++slot) {
      const auto b = static_cast<Eigen::Index>(slot_bus[slot]);
      mv(b) = policy_is_ode ? std::max(0.0, pol(static_cast<Eigen::Index>(slot)))
                            : policy->virtual_inertia(slot, stage_t);
    }
    return mv;
  };

  auto record = [&](std::size_t row, double t) {
    traj.times.push_back(t);
    traj.eta.row(static_cast<Eigen::Index>(row)) = s.eta.transpose();
    traj.omega.row(static_cast<Eigen::Index>(row)) = s.omega.transpose();
    traj.xs.row(static_cast<Eigen::Index>(row)) = s.xs.transpose();
    traj.mv.row(static_cast<Eigen::Index>(row)) = s.mv.transpose();
    if (policy) {
      traj.phases.push_back(policy->phase_label());
      for (std::size_t slot = 0; slot < slot_bus.size(); ++slot)
        traj.policy_u(static_cast<Eigen::Index>(row),
                      static_cast<Eigen::Index>(slot)) = policy->set_point(slot);
    }
  };

  std::size_t row = 0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * h;
    for (std::size_t d = 0; d < config.disturbances.size(); ++d) {
      if (!applied[d] && t >= config.disturbances[d].time - 0.25 * h) {
        loads(static_cast<Eigen::Index>(config.disturbances[d].bus)) +=
            config.disturbances[d].delta_load;
        applied[d] = true;
      }
    }
    if (policy) policy->begin_step(t, h, s.omega);
    s.mv = mv_vector(t, pol_state);
    s.t = t;
    record(row++, t);
    if (policy && policy->terminal()) break;
    if (i == steps) break;

    // RK4 on (eta, omega, xs [, Mv])
    const double stage_t[4] = {t, t + 0.5 * h, t + 0.5 * h, t + h};
    const double stage_off[4] = {0.0, 0.5, 0.5, 1.0};
    bool finite = true;
    for (int k = 0; k < 4; ++k) {
      tmp.eta = s.eta;
      tmp.omega = s.omega;
      tmp.xs = s.xs;
      Eigen::VectorXd pol_stage = pol_state;
      if (k > 0) {
        tmp.eta += h * stage_off[k] * k_eta[k - 1];
        tmp.omega += h * stage_off[k] * k_omega[k - 1];
        tmp.xs += h * stage_off[k] * k_xs[k - 1];
        if (policy_is_ode) pol_stage += h * stage_off[k] * k_pol[k - 1];
      }
      rhs(tmp, mv_vector(stage_t[k], pol_stage), loads, config.model,
          config.fixed_bus, k_eta[k], k_omega[k], k_xs[k]);
      if (policy_is_ode) policy->state_rhs(pol_stage, k_pol[k]);
    }
    s.eta += h / 6.0 * (k_eta[0] + 2.0 * k_eta[1] + 2.0 * k_eta[2] + k_eta[3]);
    s.omega +=
        h / 6.0 * (k_omega[0] + 2.0 * k_omega[1] + 2.0 * k_omega[2] + k_omega[3]);
    s.xs += h / 6.0 * (k_xs[0] + 2.0 * k_xs[1] + 2.0 * k_xs[2] + k_xs[3]);
    if (policy_is_ode) {
      pol_state += h / 6.0 * (k_pol[0] + 2.0 * k_pol[1] + 2.0 * k_pol[2] + k_pol[3]);
      pol_state = pol_state.cwiseMax(0.0);
    }
    if (config.fixed_bus)
      s.omega(static_cast<Eigen::Index>(*config.fixed_bus)) = config.fixed_omega;

    finite = s.eta.allFinite() && s.omega.allFinite() && s.xs.allFinite() &&
             (!policy_is_ode || pol_state.allFinite());
    if (!finite) {
      traj.aborted_nonfinite = true;
      break;
    }
  }

  traj.eta.conservativeResize(static_cast<Eigen::Index>(row), ne);
  traj.omega.conservativeResize(static_cast<Eigen::Index>(row), nb);
  traj.xs.conservativeResize(static_cast<Eigen::Index>(row), xs_dim_);
  traj.mv.conservativeResize(static_cast<Eigen::Index>(row), nb);
  traj.policy_u.conservativeResize(static_cast<Eigen::Index>(row),
                                   static_cast<Eigen::Index>(slot_bus.size()));
  return traj;
}

Trajectory Simulator::integrate_fixed_bus(const SystemState& initial, std::size_t bus,
                                          double omega_bar, SimConfig config,
                                          InertiaPolicy* policy) const {
  if (bus >= graph_.bus_count())
    throw ValidationError("fixed bus index out of range");
  if (std::abs(initial.omega(static_cast<Eigen::Index>(bus)) - omega_bar) > 1e-12)
    throw ValidationError("fixed-bus run requires omega_k(0) = omega_bar");
  config.fixed_bus = bus;
  config.fixed_omega = omega_bar;
  return integrate(initial, config, policy);
}

}  // namespace vigrid
