#ifndef VIGRID_CSV_HPP
#define VIGRID_CSV_HPP

#include <optional>
#include <string>

#include "vigrid/analysis.hpp"
#include "vigrid/batch.hpp"
#include "vigrid/grid.hpp"
#include "vigrid/simulate.hpp"

namespace vigrid {

/// Trajectory CSV: t, omega_<bus>..., eta_<edge>..., Mv_<bus>...[, V].
/// Doubles are printed with %.17g so identical runs produce identical bytes.
void write_trajectory_csv(const std::string& path, const NetworkGraph& graph,
                          const Trajectory& traj,
                          const std::vector<double>* lyapunov = nullptr);

/// Lyapunov report CSV: t, V, V_F, V_P, sumVj, bound.
void write_lyapunov_csv(const std::string& path, const LyapunovReport& rep);

/// Batch envelope CSV: t, omega_max, omega_min.
void write_envelope_csv(const std::string& path, const BatchReport& rep);

/// Inertia trace CSV: t, bus, Mv, u, phase.
void write_policy_trace_csv(const std::string& path, const NetworkGraph& graph,
                            const Trajectory& traj,
                            const std::vector<std::size_t>& policy_buses);

}  // namespace vigrid

#endif
