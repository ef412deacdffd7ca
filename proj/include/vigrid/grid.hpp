#ifndef VIGRID_GRID_HPP
#define VIGRID_GRID_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace vigrid {

/// Per-bus physical parameters. Inertia in s·p.u. on the system MVA base,
/// damping in p.u./Hz, load in p.u. The damping coefficient is normally
/// folded into the supply feedthrough; it is kept here so scenarios can
/// declare it separately.
struct BusParams {
  double inertia = 1.0;   // M0, > 0
  double damping = 0.0;   // Dv, >= 0
  double load = 0.0;      // pL, constant frequency-independent load
};

struct Line {
  std::size_t from = 0;   // positive end (bus index)
  std::size_t to = 0;     // negative end
  double susceptance = 0; // |B_kl|, > 0
};

/// Directed connected graph of buses and lossless lines. Orientation is
/// arbitrary but fixed as insertion order; every result downstream is
/// independent of that choice up to the sign of per-edge quantities.
/// Immutable after construction, safe to share across workers.
class NetworkGraph {
 public:
  NetworkGraph(std::vector<std::string> bus_ids, std::vector<BusParams> params,
               std::vector<Line> lines);

  std::size_t bus_count() const { return ids_.size(); }
  std::size_t line_count() const { return lines_.size(); }
  const std::vector<std::string>& bus_ids() const { return ids_; }
  const std::vector<BusParams>& bus_params() const { return params_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::string& bus_id(std::size_t j) const { return ids_[j]; }
  std::size_t index_of(const std::string& id) const;

  /// Incidence matrix H, one +1 and one -1 per column.
  const Eigen::MatrixXd& incidence() const { return incidence_; }
  /// Line susceptances as a vector (diagonal of B).
  const Eigen::VectorXd& susceptances() const { return b_; }
  Eigen::VectorXd physical_inertia() const;
  Eigen::VectorXd loads() const;

 private:
  std::vector<std::string> ids_;
  std::vector<BusParams> params_;
  std::vector<Line> lines_;
  Eigen::MatrixXd incidence_;
  Eigen::VectorXd b_;
};

/// p_kl = B_kl sin(eta_kl), elementwise over lines.
Eigen::VectorXd line_flows_nonlinear(const NetworkGraph& graph,
                                     const Eigen::VectorXd& eta);

/// Linearized flows p = B eta.
Eigen::VectorXd line_flows_linear(const NetworkGraph& graph,
                                  const Eigen::VectorXd& eta);

}  // namespace vigrid

#endif
