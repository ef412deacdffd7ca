#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "vigrid/batch.hpp"
#include "vigrid/csv.hpp"
#include "vigrid/errors.hpp"
#include "vigrid/passivity.hpp"
#include "vigrid/scenario.hpp"

namespace {

using namespace vigrid;

FlowModel parse_model(const std::string& m) {
  if (m == "nonlinear") return FlowModel::Nonlinear;
  if (m == "linear") return FlowModel::Linear;
  throw ValidationError("--model must be nonlinear or linear");
}

int cmd_certify(const Scenario& sc, const std::string& out) {
  std::ofstream csv;
  if (!out.empty()) {
    csv.open(out);
    if (!csv) throw IoError("cannot write " + out);
    csv << "bus,rho,rate_bound,argmin_frequency,method\n";
  }
  std::cout << "bus       rho          2*rho        argmin w     method\n";
  for (std::size_t j = 0; j < sc.graph().bus_count(); ++j) {
    auto res = strictness_constant(sc.supplies()[j]);
    const std::string method =
        res.passive ? res.certificate.method : "not-strictly-passive";
    std::printf("%-9s %-12.6g %-12.6g %-12.6g %s\n", sc.graph().bus_id(j).c_str(),
                res.rho, 2.0 * res.rho, res.argmin_frequency, method.c_str());
    if (csv.is_open())
      csv << sc.graph().bus_id(j) << "," << res.rho << "," << 2.0 * res.rho << ","
          << res.argmin_frequency << "," << method << "\n";
  }
  return 0;
}

int cmd_equilibrium(const Scenario& sc) {
  const Equilibrium eq = sc.target_equilibrium();
  nlohmann::json j;
  j["omega_sync"] = eq.omega_sync;
  j["assumption1_ok"] = eq.assumption1_ok;
  j["residual"] = eq.residual;
  j["cycle_dim"] = eq.cycle_dim;
  for (std::size_t e = 0; e < sc.graph().line_count(); ++e)
    j["eta"].push_back(eq.eta(static_cast<Eigen::Index>(e)));
  for (std::size_t b = 0; b < sc.graph().bus_count(); ++b)
    j["supply"].push_back(eq.supply(static_cast<Eigen::Index>(b)));
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_gamma(const Scenario& sc, double omega_bar, const std::string& slack) {
  const std::size_t k = sc.graph().index_of(slack);
  const GammaPoint gp = gamma_point(sc.graph(), sc.supplies(), sc.final_loads(),
                                    omega_bar, k);
  nlohmann::json j;
  j["omega_bar"] = gp.omega_bar;
  j["slack_bus"] = sc.graph().bus_id(gp.slack_bus);
  j["slack_injection"] = gp.slack_injection;
  j["residual"] = gp.residual;
  for (Eigen::Index e = 0; e < gp.eta.size(); ++e) j["eta"].push_back(gp.eta(e));
  for (Eigen::Index b = 0; b < gp.supply.size(); ++b)
    j["supply"].push_back(gp.supply(b));
  std::cout << j.dump(2) << "\n";
  return 0;
}

Trajectory run_scenario(const Scenario& sc,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<FlowModel> model_override,
                        std::unique_ptr<InertiaPolicy>* policy_out = nullptr) {
  Simulator sim(sc.graph(), sc.supplies());
  auto policy = sc.make_policy(seed_override);
  SimConfig cfg = sc.sim_config();
  if (model_override) cfg.model = *model_override;
  Trajectory traj = sim.integrate(sim.rest_state(), cfg, policy.get());
  if (policy_out) *policy_out = std::move(policy);
  return traj;
}

int cmd_simulate(const Scenario& sc, const std::string& out,
                 std::optional<std::uint64_t> seed,
                 std::optional<FlowModel> model) {
  Trajectory traj = run_scenario(sc, seed, model);
  if (traj.aborted_nonfinite)
    std::cerr << "warning: non-finite state, trajectory truncated at t = "
              << traj.times.back() << "\n";
  const Equilibrium eq = sc.target_equilibrium();
  const RunMetrics m = classify_run(traj, eq);
  if (!out.empty()) write_trajectory_csv(out, sc.graph(), traj);
  std::cout << "classification: " << to_string(m.classification)
            << "\nmax deviation: " << m.max_deviation
            << " Hz\nfinal deviation: " << m.final_deviation << " Hz\n";
  if (m.settling_time) std::cout << "settling time: " << *m.settling_time << " s\n";
  return traj.aborted_nonfinite ? 2 : 0;
}

int cmd_verify(const Scenario& sc, const std::string& out,
               std::optional<std::uint64_t> seed, std::optional<FlowModel> model) {
  Trajectory traj = run_scenario(sc, seed, model);
  const Equilibrium eq = sc.target_equilibrium();
  FlowModel fm = model.value_or(sc.sim_config().model);
  LyapunovReport rep = check_dissipation(sc.graph(), sc.supplies(), eq, traj,
                                         sc.margined_strictness(),
                                         sc.storage_set(), fm);
  if (!out.empty()) write_lyapunov_csv(out, rep);
  nlohmann::json j;
  j["monotone_ok"] = rep.monotone_ok;
  j["positive_jumps"] = rep.jump_steps.size();
  j["max_positive_jump"] = rep.max_positive_jump;
  j["tolerance"] = rep.tolerance;
  j["partial"] = rep.partial;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_destabilize(const Scenario& sc, const std::string& out) {
  if (sc.policy_spec().kind != "destabilizer")
    throw ValidationError("destabilize requires a destabilizer policy block");
  std::unique_ptr<InertiaPolicy> policy;
  Trajectory traj = run_scenario(sc, std::nullopt, std::nullopt, &policy);
  auto* dp = dynamic_cast<DestabilizerPolicy*>(policy.get());
  nlohmann::json j;
  j["cycles"] = dp->cycles();
  for (double p : dp->peaks()) j["peaks"].push_back(p);
  if (dp->escape_time()) {
    j["result"] = "escaped";
    j["escape_time"] = *dp->escape_time();
  } else {
    j["result"] = "no divergence observed";
  }
  if (!out.empty()) {
    write_trajectory_csv(out, sc.graph(), traj);
    write_policy_trace_csv(out + ".trace.csv", sc.graph(), traj, policy->buses());
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_batch(const Scenario& sc, const std::string& out, std::size_t runs,
              unsigned workers, std::optional<std::uint64_t> seed) {
  BatchSpec spec;
  spec.runs = runs;
  spec.workers = workers;
  spec.base_seed = seed.value_or(sc.seed());
  BatchReport rep = run_batch(sc, spec);
  if (!out.empty()) write_envelope_csv(out, rep);
  nlohmann::json j;
  j["runs"] = runs;
  j["convergent"] = rep.convergent;
  j["oscillatory"] = rep.oscillatory;
  j["divergent"] = rep.divergent;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"power-network simulation with time-varying inertia"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, model_str, slack_bus;
  std::uint64_t seed_val = 0;
  bool seed_set = false;
  double omega_bar = 0.0;
  std::size_t runs = 1;
  unsigned workers = 1;

  app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
  app.add_option("--out", out_path, "output CSV path");
  auto* seed_opt = app.add_option("--seed", seed_val, "seed override");
  app.add_option("--model", model_str, "flow model override {nonlinear, linear}");

  auto* certify = app.add_subcommand("certify", "per-bus passivity certificates");
  auto* equilibrium = app.add_subcommand("equilibrium", "synchronous equilibrium");
  auto* gamma = app.add_subcommand("gamma", "gamma-point for a pinned frequency");
  gamma->add_option("--omega-bar", omega_bar, "pinned frequency deviation (Hz)")
      ->required();
  gamma->add_option("--slack-bus", slack_bus, "bus absorbing the imbalance")
      ->required();
  auto* simulate = app.add_subcommand("simulate", "integrate the scenario");
  auto* verify = app.add_subcommand("verify", "simulate and check dissipation");
  auto* destabilize =
      app.add_subcommand("destabilize", "run the hold/release policy");
  auto* batch = app.add_subcommand("batch", "randomized batch with envelope");
  batch->add_option("--runs", runs, "number of runs")->required();
  batch->add_option("--workers", workers, "worker threads");

  CLI11_PARSE(app, argc, argv);
  seed_set = seed_opt->count() > 0;

  try {
    Scenario sc = Scenario::load(scenario_path);
    std::optional<std::uint64_t> seed =
        seed_set ? std::optional<std::uint64_t>(seed_val) : std::nullopt;
    std::optional<FlowModel> model;
    if (!model_str.empty()) model = parse_model(model_str);

    if (certify->parsed()) return cmd_certify(sc, out_path);
    if (equilibrium->parsed()) return cmd_equilibrium(sc);
    if (gamma->parsed()) return cmd_gamma(sc, omega_bar, slack_bus);
    if (simulate->parsed()) return cmd_simulate(sc, out_path, seed, model);
    if (verify->parsed()) return cmd_verify(sc, out_path, seed, model);
    if (destabilize->parsed()) return cmd_destabilize(sc, out_path);
    if (batch->parsed()) return cmd_batch(sc, out_path, runs, workers, seed);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
