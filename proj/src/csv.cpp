#include "vigrid/csv.hpp"

#include <cstdio>
#include <fstream>

#include "vigrid/errors.hpp"

namespace vigrid {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const NetworkGraph& graph,
                          const Trajectory& traj,
                          const std::vector<double>* lyapunov) {
  auto out = open_out(path);
  out << "t";
  for (std::size_t j = 0; j < graph.bus_count(); ++j)
    out << ",omega_" << graph.bus_id(j);
  for (std::size_t e = 0; e < graph.line_count(); ++e)
    out << ",eta_" << graph.bus_id(graph.lines()[e].from) << "_"
        << graph.bus_id(graph.lines()[e].to);
  for (std::size_t j = 0; j < graph.bus_count(); ++j)
    out << ",Mv_" << graph.bus_id(j);
  if (lyapunov) out << ",V";
  out << "\n";
  for (std::size_t i = 0; i < traj.samples(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out << fmt(traj.times[i]);
    for (Eigen::Index j = 0; j < traj.omega.cols(); ++j)
      out << "," << fmt(traj.omega(ii, j));
    for (Eigen::Index e = 0; e < traj.eta.cols(); ++e)
      out << "," << fmt(traj.eta(ii, e));
    for (Eigen::Index j = 0; j < traj.mv.cols(); ++j)
      out << "," << fmt(traj.mv(ii, j));
    if (lyapunov) out << "," << fmt((*lyapunov)[i]);
    out << "\n";
  }
}

void write_lyapunov_csv(const std::string& path, const LyapunovReport& rep) {
  auto out = open_out(path);
  out << "# dissipation check: positive forward differences of V are\n"
         "# tolerated up to c*h^2 (c = 10x a 95th-percentile |dV/dt| "
         "estimate);\n"
         "# bound is the sampled rhs sum_j (dM_j/(2h) - rho_j)(omega_j - "
         "omega*)^2\n";
  out << "t,V,V_F,V_P,sumVj,bound\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    out << fmt(rep.times[i]) << "," << fmt(rep.V[i]) << "," << fmt(rep.V_F[i])
        << "," << fmt(rep.V_P[i]) << "," << fmt(rep.V_storage[i]) << ","
        << fmt(i < rep.bound.size() ? rep.bound[i] : 0.0) << "\n";
  }
}

void write_envelope_csv(const std::string& path, const BatchReport& rep) {
  auto out = open_out(path);
  out << "t,omega_max,omega_min\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    out << fmt(rep.times[i]) << "," << fmt(rep.omega_max[i]) << ","
        << fmt(rep.omega_min[i]) << "\n";
}

void write_policy_trace_csv(const std::string& path, const NetworkGraph& graph,
                            const Trajectory& traj,
                            const std::vector<std::size_t>& policy_buses) {
  auto out = open_out(path);
  out << "t,bus,Mv,u,phase\n";
  for (std::size_t i = 0; i < traj.samples(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t slot = 0; slot < policy_buses.size(); ++slot) {
      const auto b = static_cast<Eigen::Index>(policy_buses[slot]);
      out << fmt(traj.times[i]) << "," << graph.bus_id(policy_buses[slot]) << ","
          << fmt(traj.mv(ii, b)) << ","
          << fmt(traj.policy_u.cols() > 0
                     ? traj.policy_u(ii, static_cast<Eigen::Index>(slot))
                     : 0.0)
          << "," << (i < traj.phases.size() ? traj.phases[i] : "") << "\n";
    }
  }
}

}  // namespace vigrid
