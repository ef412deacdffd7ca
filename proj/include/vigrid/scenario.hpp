#ifndef VIGRID_SCENARIO_HPP
#define VIGRID_SCENARIO_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vigrid/analysis.hpp"
#include "vigrid/grid.hpp"
#include "vigrid/inertia.hpp"
#include "vigrid/simulate.hpp"
#include "vigrid/supply.hpp"

namespace vigrid {

/// Inertia policy block as declared in the scenario file. Parameters are
/// kept symbolic here; make_policy() resolves strictness constants and the
/// equilibrium frequency where the scheme needs them.
struct PolicySpec {
  std::string kind = "constant";  // constant | bang_bang | rate_limited |
                                  // randomized | open_loop | destabilizer
  std::vector<std::string> bus_ids;
  std::vector<double> constant_mv;
  BangBangParams bang_bang;
  double magnitude = 0.0;      // Ma for the threshold/randomized families
  double filter_rate = 100.0;  // tau
  double epsilon = 1e-4;
  double threshold = 0.02;
  std::vector<double> rho;     // empty => compute from certificates
  RandomizedParams randomized;
  std::vector<std::vector<OpenLoopPolicy::Knot>> profiles;
  DestabilizerParams destabilizer;  // target resolved to an index on load
};

/// A fully validated scenario: units are seconds, Hz deviation and per-unit
/// on `mva_base`. Cross references (policy and supply bus ids) are resolved
/// against the graph on load.
class Scenario {
 public:
  static Scenario load(const std::string& path);
  static Scenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;  // canonical form: sorted keys, fixed layout
  void save(const std::string& path) const;

  const NetworkGraph& graph() const { return *graph_; }
  const std::vector<LtiSupply>& supplies() const { return supplies_; }
  const std::vector<nlohmann::json>& supply_decls() const { return supply_decls_; }
  const PolicySpec& policy_spec() const { return policy_; }
  const SimConfig& sim_config() const { return sim_; }
  std::uint64_t seed() const { return seed_; }
  double mva_base() const { return mva_base_; }

  /// Loads after every configured disturbance has been applied; the
  /// post-disturbance equilibrium is the convergence target.
  Eigen::VectorXd final_loads() const;
  Equilibrium target_equilibrium() const;

  /// Instantiate the inertia policy; `seed_override` feeds the randomized
  /// scheme (batch runs derive per-run seeds).
  std::unique_ptr<InertiaPolicy> make_policy(
      std::optional<std::uint64_t> seed_override = std::nullopt) const;

  /// Per-bus strictness constants (from certificates for buses without an
  /// explicit override in the policy block).
  std::vector<double> bus_strictness() const;
  /// Margined per-bus storage matrices for the Lyapunov evaluation.
  StorageSet storage_set() const;
  std::vector<double> margined_strictness() const;

 private:
  Scenario() = default;
  std::shared_ptr<NetworkGraph> graph_;
  std::vector<LtiSupply> supplies_;
  std::vector<nlohmann::json> supply_decls_;
  PolicySpec policy_;
  SimConfig sim_;
  std::uint64_t seed_ = 0;
  double mva_base_ = 100.0;
};

/// Derived quantities shared by the CLI subcommands.
struct PreparedRun {
  Simulator simulator;
  std::unique_ptr<InertiaPolicy> policy;
  Equilibrium equilibrium;
};

}  // namespace vigrid

#endif
