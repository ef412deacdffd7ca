#include "vigrid/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vigrid/errors.hpp"

namespace vigrid {

namespace {

double aggregate_dc_gain(const std::vector<LtiSupply>& supplies) {
  double g = 0.0;
  for (const auto& s : supplies) g += s.dc_gain();
  return g;
}

// scalar balance 0 = sum_j (-pL_j + s_j(omega)) solved by bisection; the
// supplies here are affine in omega but the bracket search stays general.
double solve_sync_frequency(const std::vector<LtiSupply>& supplies,
                            const Eigen::VectorXd& loads) {
  auto imbalance = [&](double w) {
    double v = -loads.sum();
    for (const auto& s : supplies) v += s.dc_gain() * (-w);
    return v;
  };
  double lo = -10.0, hi = 10.0;
  double flo = imbalance(lo), fhi = imbalance(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    throw NumericalError("no synchronous frequency in [-10, 10] Hz");
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = imbalance(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  // secant polish; exact in one step for the affine LTI balance
  double w = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double f0 = imbalance(w);
    if (f0 == 0.0) break;
    const double dw = 1e-6 * std::max(1.0, std::abs(w));
    const double slope = (imbalance(w + dw) - f0) / dw;
    if (slope == 0.0) break;
    w -= f0 / slope;
  }
  return w;
}

// minimum-norm flows solving H p = q (rows of H optionally restricted)
Eigen::VectorXd min_norm_flows(const Eigen::MatrixXd& H, const Eigen::VectorXd& q) {
  return H.completeOrthogonalDecomposition().solve(q);
}

Eigen::VectorXd stack_static_states(const std::vector<LtiSupply>& supplies,
                                    double omega) {
  Eigen::Index dim = 0;
  for (const auto& s : supplies) dim += s.order();
  Eigen::VectorXd xs(dim);
  Eigen::Index off = 0;
  for (const auto& s : supplies) {
    xs.segment(off, s.order()) = s.static_characteristic(omega).state;
    off += s.order();
  }
  return xs;
}

}  // namespace

Equilibrium find_equilibrium(const NetworkGraph& graph,
                             const std::vector<LtiSupply>& supplies,
                             const Eigen::VectorXd& loads, FlowModel model) {
  if (supplies.size() != graph.bus_count())
    throw ValidationError("one supply per bus required");
  if (loads.size() != static_cast<Eigen::Index>(graph.bus_count()))
    throw ValidationError("load vector dimension mismatch");
  if (!(aggregate_dc_gain(supplies) > 0.0))
    throw ValidationError("aggregate supply dc gain must be positive");

  Equilibrium eq;
  eq.omega_sync = solve_sync_frequency(supplies, loads);

  const auto nb = static_cast<Eigen::Index>(graph.bus_count());
  eq.supply.resize(nb);
  for (Eigen::Index j = 0; j < nb; ++j)
    eq.supply(j) = supplies[static_cast<std::size_t>(j)].dc_gain() * (-eq.omega_sync);
  const Eigen::VectorXd q = eq.supply - loads;  // net injections H p* = q

  eq.flows = min_norm_flows(graph.incidence(), q);
  const Eigen::VectorXd& b = graph.susceptances();
  eq.eta.resize(eq.flows.size());
  eq.assumption1_ok = true;
  for (Eigen::Index e = 0; e < eq.flows.size(); ++e) {
    const double ratio = eq.flows(e) / b(e);
    if (model == FlowModel::Nonlinear) {
      if (std::abs(ratio) > 1.0)
        throw NumericalError("no equilibrium under Assumption 1: line " +
                             std::to_string(e) + " requires |p| > B");
      eq.eta(e) = std::asin(ratio);
      if (std::abs(ratio) >= 1.0) eq.assumption1_ok = false;
    } else {
      eq.eta(e) = ratio;
    }
    if (!(std::abs(eq.eta(e)) < M_PI / 2.0)) eq.assumption1_ok = false;
  }
  eq.xs = stack_static_states(supplies, eq.omega_sync);

  // residual of the defining equations at the returned point
  const Eigen::VectorXd p = model == FlowModel::Nonlinear
                                ? line_flows_nonlinear(graph, eq.eta)
                                : line_flows_linear(graph, eq.eta);
  double r = (graph.incidence() * p - q).cwiseAbs().maxCoeff();
  r = std::max(r, (p - eq.flows).cwiseAbs().maxCoeff());
  eq.residual = r;
  if (eq.residual > 1e-8)
    throw NumericalError("equilibrium residual " + std::to_string(eq.residual) +
                         " exceeds 1e-8");

  const Eigen::Index cycles =
      static_cast<Eigen::Index>(graph.line_count()) - (nb - 1);
  eq.cycle_dim = cycles > 0 ? static_cast<std::size_t>(cycles) : 0;
  return eq;
}

GammaPoint gamma_point(const NetworkGraph& graph,
                       const std::vector<LtiSupply>& supplies,
                       const Eigen::VectorXd& loads, double omega_bar,
                       std::size_t slack_bus) {
  if (slack_bus >= graph.bus_count())
    throw ValidationError("slack bus index out of range");
  if (supplies.size() != graph.bus_count())
    throw ValidationError("one supply per bus required");

  GammaPoint gp;
  gp.omega_bar = omega_bar;
  gp.slack_bus = slack_bus;

  const auto nb = static_cast<Eigen::Index>(graph.bus_count());
  gp.supply.resize(nb);
  for (Eigen::Index j = 0; j < nb; ++j)
    gp.supply(j) = supplies[static_cast<std::size_t>(j)].dc_gain() * (-omega_bar);
  const Eigen::VectorXd q = gp.supply - loads;

  // delete the slack row; the reduced incidence has full row rank on a
  // connected graph
  Eigen::MatrixXd Hred(nb - 1, static_cast<Eigen::Index>(graph.line_count()));
  Eigen::VectorXd qred(nb - 1);
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < nb; ++j) {
    if (static_cast<std::size_t>(j) == slack_bus) continue;
    Hred.row(r) = graph.incidence().row(j);
    qred(r) = q(j);
    ++r;
  }
  gp.flows = min_norm_flows(Hred, qred);
  gp.eta = gp.flows.cwiseQuotient(graph.susceptances());
  gp.xs = stack_static_states(supplies, omega_bar);

  gp.residual = (Hred * gp.flows - qred).cwiseAbs().maxCoeff();
  gp.slack_injection =
      q(static_cast<Eigen::Index>(slack_bus)) -
      graph.incidence().row(static_cast<Eigen::Index>(slack_bus)).dot(gp.flows);
  if (gp.residual > 1e-8)
    throw NumericalError("gamma-point residual exceeds 1e-8");
  return gp;
}

double lyapunov_edge_potential(double susceptance, double eta_star, double eta) {
  return susceptance * ((std::cos(eta_star) - std::cos(eta)) -
                        std::sin(eta_star) * (eta - eta_star));
}

LyapunovValue lyapunov_value(const NetworkGraph& graph,
                             const std::vector<LtiSupply>& supplies,
                             const Equilibrium& eq, const SystemState& state,
                             const StorageSet& storage, FlowModel model) {
  LyapunovValue v;
  const Eigen::VectorXd m0 = graph.physical_inertia();
  for (Eigen::Index j = 0; j < state.omega.size(); ++j) {
    const double w = state.omega(j) - eq.omega_sync;
    v.kinetic += 0.5 * (m0(j) + state.mv(j)) * w * w;
  }
  const Eigen::VectorXd& b = graph.susceptances();
  for (Eigen::Index e = 0; e < state.eta.size(); ++e) {
    if (model == FlowModel::Nonlinear) {
      v.potential += lyapunov_edge_potential(b(e), eq.eta(e), state.eta(e));
    } else {
      const double d = state.eta(e) - eq.eta(e);
      v.potential += 0.5 * b(e) * d * d;
    }
  }
  Eigen::Index off = 0;
  for (std::size_t j = 0; j < supplies.size(); ++j) {
    const Eigen::Index n = supplies[j].order();
    if (n > 0) {
      if (j < storage.size() && storage[j].has_value()) {
        const Eigen::VectorXd dx =
            state.xs.segment(off, n) - eq.xs.segment(off, n);
        v.storage += 0.5 * dx.dot((*storage[j]) * dx);
      } else {
        v.partial = true;
      }
    }
    off += n;
  }
  v.total = v.kinetic + v.potential + v.storage;
  return v;
}

LyapunovReport check_dissipation(const NetworkGraph& graph,
                                 const std::vector<LtiSupply>& supplies,
                                 const Equilibrium& eq, const Trajectory& traj,
                                 const std::vector<double>& rho,
                                 const StorageSet& storage, FlowModel model) {
  if (rho.size() != graph.bus_count())
    throw ValidationError("one rho per bus required");
  const std::size_t n = traj.samples();
  if (n < 2) throw ValidationError("trajectory too short for dissipation check");
  const double h = traj.step;

  LyapunovReport rep;
  rep.times = traj.times;
  rep.V.resize(n);
  rep.V_F.resize(n);
  rep.V_P.resize(n);
  rep.V_storage.resize(n);
  SystemState s;
  for (std::size_t i = 0; i < n; ++i) {
    s.eta = traj.eta.row(static_cast<Eigen::Index>(i)).transpose();
    s.omega = traj.omega.row(static_cast<Eigen::Index>(i)).transpose();
    s.xs = traj.xs.row(static_cast<Eigen::Index>(i)).transpose();
    s.mv = traj.mv.row(static_cast<Eigen::Index>(i)).transpose();
    const auto v = lyapunov_value(graph, supplies, eq, s, storage, model);
    rep.V[i] = v.total;
    rep.V_F[i] = v.kinetic;
    rep.V_P[i] = v.potential;
    rep.V_storage[i] = v.storage;
    rep.partial = rep.partial || v.partial;
  }

  // robust |dV/dt| estimate: 95th percentile, so sparse switch jumps do not
  // swallow the tolerance
  std::vector<double> rates(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    rates[i] = std::abs(rep.V[i + 1] - rep.V[i]) / h;
  std::vector<double> sorted = rates;
  std::sort(sorted.begin(), sorted.end());
  const double vdot95 = sorted[static_cast<std::size_t>(0.95 * (sorted.size() - 1))];
  const double vmax =
      std::max(1.0, *std::max_element(rep.V.begin(), rep.V.end()));
  rep.tolerance = 10.0 * vdot95 * h * h + 1e-12 * vmax;

  rep.bound.resize(n - 1);
  rep.monotone_ok = true;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dV = rep.V[i + 1] - rep.V[i];
    if (dV > rep.tolerance) {
      rep.monotone_ok = false;
      rep.jump_steps.push_back(i);
      rep.max_positive_jump = std::max(rep.max_positive_jump, dV);
    }
    // pointwise rate bound sum_j (dM_j/(2h) - rho_j)(omega_j - omega*)^2
    double rhs = 0.0;
    for (Eigen::Index j = 0; j < traj.omega.cols(); ++j) {
      const double dmj = traj.mv(static_cast<Eigen::Index>(i + 1), j) -
                         traj.mv(static_cast<Eigen::Index>(i), j);
      const double w = traj.omega(static_cast<Eigen::Index>(i), j) - eq.omega_sync;
      rhs += (dmj / (2.0 * h) - rho[static_cast<std::size_t>(j)]) * w * w;
    }
    rep.bound[i] = rhs;
  }
  return rep;
}

std::string to_string(RunClass c) {
  switch (c) {
    case RunClass::Convergent:
      return "convergent";
    case RunClass::Oscillatory:
      return "oscillatory";
    case RunClass::Divergent:
      return "divergent";
  }
  return "?";
}

RunMetrics classify_run(const Trajectory& traj, const Equilibrium& eq,
                        double escape_radius) {
  const std::size_t n = traj.samples();
  if (n < 20) throw ValidationError("trajectory too short to classify");

  RunMetrics m;
  // per-sample deviation, and the bus reaching the largest one
  Eigen::VectorXd dev(static_cast<Eigen::Index>(n));
  Eigen::Index worst_bus = 0;
  double worst = -1.0;
  for (Eigen::Index j = 0; j < traj.omega.cols(); ++j) {
    const double mj =
        (traj.omega.col(j).array() - eq.omega_sync).abs().maxCoeff();
    if (mj > worst) {
      worst = mj;
      worst_bus = j;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    dev(static_cast<Eigen::Index>(i)) =
        (traj.omega.row(static_cast<Eigen::Index>(i)).array() - eq.omega_sync)
            .abs()
            .maxCoeff();
  m.max_deviation = dev.maxCoeff();

  const std::size_t tail_start = n - std::max<std::size_t>(1, n / 10);
  m.final_deviation = dev.tail(static_cast<Eigen::Index>(n - tail_start)).maxCoeff();

  constexpr double kBand = 1e-4;
  std::size_t first_settled = n;  // first index after the last band exit
  for (std::size_t i = n; i-- > 0;) {
    if (dev(static_cast<Eigen::Index>(i)) >= kBand) {
      first_settled = i + 1;
      break;
    }
    first_settled = i;
  }
  if (first_settled < n) m.settling_time = traj.times[first_settled];

  // peaks of the worst bus's deviation
  Eigen::VectorXd db = (traj.omega.col(worst_bus).array() - eq.omega_sync).abs();
  std::vector<double> peak_times;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (db(ii) > db(ii - 1) && db(ii) >= db(ii + 1) && db(ii) > 1e-9) {
      m.peak_sequence.push_back(db(ii));
      peak_times.push_back(traj.times[i]);
    }
  }
  // |deviation| peaks twice per oscillation period
  if (peak_times.size() >= 3) {
    const double period = 2.0 * (peak_times.back() - peak_times.front()) /
                          static_cast<double>(peak_times.size() - 1);
    if (traj.times.back() - traj.times.front() < 2.0 * period)
      throw ValidationError("trajectory shorter than twice the dominant period");
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (dev(static_cast<Eigen::Index>(i)) > escape_radius) {
      m.escape_time = traj.times[i];
      break;
    }
  }

  // sustained growth: five consecutive >= 5% peak increases, each setting a
  // new running maximum (transient rebounds below the main swing don't count)
  bool growing = false;
  if (m.peak_sequence.size() >= 6) {
    std::size_t run = 0;
    double running_max = m.peak_sequence.front();
    for (std::size_t i = 0; i + 1 < m.peak_sequence.size(); ++i) {
      const double next = m.peak_sequence[i + 1];
      if (next >= 1.05 * m.peak_sequence[i] && next > running_max) {
        if (++run >= 5) {
          growing = true;
          break;
        }
      } else {
        run = 0;
      }
      running_max = std::max(running_max, next);
    }
  }

  if (traj.aborted_nonfinite || m.escape_time.has_value() || growing)
    m.classification = RunClass::Divergent;
  else if (m.final_deviation < kBand)
    m.classification = RunClass::Convergent;
  else
    m.classification = RunClass::Oscillatory;
  return m;
}

}  // namespace vigrid
