#include "vigrid/grid.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

#include "vigrid/errors.hpp"

namespace vigrid {

namespace {

// BFS component containing bus 0; used to report disconnected graphs.
std::vector<char> reachable_from_zero(std::size_t n, const std::vector<Line>& lines) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& l : lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop();
    for (std::size_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
    }
  }
  return seen;
}

}  // namespace

NetworkGraph::NetworkGraph(std::vector<std::string> bus_ids,
                           std::vector<BusParams> params, std::vector<Line> lines)
    : ids_(std::move(bus_ids)), params_(std::move(params)), lines_(std::move(lines)) {
  const std::size_t n = ids_.size();
  if (n == 0) throw ValidationError("graph has no buses");
  if (params_.size() != n)
    throw ValidationError("bus parameter count does not match bus count");
  {
    std::set<std::string> uniq(ids_.begin(), ids_.end());
    if (uniq.size() != n) throw ValidationError("duplicate bus id");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(params_[j].inertia > 0.0))
      throw ValidationError("bus " + ids_[j] + ": physical inertia must be > 0");
    if (params_[j].damping < 0.0)
      throw ValidationError("bus " + ids_[j] + ": damping must be >= 0");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen_pairs;
  for (const auto& l : lines_) {
    if (l.from >= n || l.to >= n) throw ValidationError("line endpoint out of range");
    if (l.from == l.to)
      throw ValidationError("self-loop at bus " + ids_[l.from]);
    if (!(l.susceptance > 0.0))
      throw ValidationError("line " + ids_[l.from] + "-" + ids_[l.to] +
                            ": susceptance must be > 0");
    auto key = std::minmax(l.from, l.to);
    if (!seen_pairs.insert(key).second)
      throw ValidationError("parallel or reversed duplicate line " + ids_[l.from] +
                            "-" + ids_[l.to]);
  }
  if (n > 1) {
    auto seen = reachable_from_zero(n, lines_);
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      std::ostringstream os;
      os << "graph is not connected; component disconnected from bus " << ids_[0]
         << ": {";
      bool first = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (!seen[j]) {
          os << (first ? "" : ", ") << ids_[j];
          first = false;
        }
      }
      os << "}";
      throw ValidationError(os.str());
    }
  }

  incidence_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                     static_cast<Eigen::Index>(lines_.size()));
  b_ = Eigen::VectorXd(static_cast<Eigen::Index>(lines_.size()));
  for (std::size_t q = 0; q < lines_.size(); ++q) {
    incidence_(static_cast<Eigen::Index>(lines_[q].from), static_cast<Eigen::Index>(q)) = 1.0;
    incidence_(static_cast<Eigen::Index>(lines_[q].to), static_cast<Eigen::Index>(q)) = -1.0;
    b_(static_cast<Eigen::Index>(q)) = lines_[q].susceptance;
  }
}

std::size_t NetworkGraph::index_of(const std::string& id) const {
  for (std::size_t j = 0; j < ids_.size(); ++j)
    if (ids_[j] == id) return j;
  throw ValidationError("unknown bus id \"" + id + "\"");
}

Eigen::VectorXd NetworkGraph::physical_inertia() const {
  Eigen::VectorXd m(static_cast<Eigen::Index>(params_.size()));
  for (std::size_t j = 0; j < params_.size(); ++j) m(static_cast<Eigen::Index>(j)) = params_[j].inertia;
  return m;
}

Eigen::VectorXd NetworkGraph::loads() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(params_.size()));
  for (std::size_t j = 0; j < params_.size(); ++j) p(static_cast<Eigen::Index>(j)) = params_[j].load;
  return p;
}

Eigen::VectorXd line_flows_nonlinear(const NetworkGraph& graph,
                                     const Eigen::VectorXd& eta) {
  if (eta.size() != static_cast<Eigen::Index>(graph.line_count()))
    throw ValidationError("eta has wrong dimension");
  return graph.susceptances().cwiseProduct(eta.array().sin().matrix());
}

Eigen::VectorXd line_flows_linear(const NetworkGraph& graph,
                                  const Eigen::VectorXd& eta) {
  if (eta.size() != static_cast<Eigen::Index>(graph.line_count()))
    throw ValidationError("eta has wrong dimension");
  return graph.susceptances().cwiseProduct(eta);
}

}  // namespace vigrid
