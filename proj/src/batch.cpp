#include "vigrid/batch.hpp"

#include <atomic>
#include <thread>

#include "vigrid/errors.hpp"

namespace vigrid {

BatchReport run_batch(const Scenario& scenario, const BatchSpec& spec) {
  if (spec.runs < 1) throw ValidationError("batch needs at least one run");
  const Equilibrium eq = scenario.target_equilibrium();

  struct RunResult {
    std::vector<double> omega_max, omega_min;
    RunClass cls = RunClass::Divergent;
    std::size_t samples = 0;
  };
  std::vector<RunResult> results(spec.runs);

  auto one_run = [&](std::size_t i) {
    Simulator sim(scenario.graph(), scenario.supplies());
    auto policy = scenario.make_policy(spec.base_seed + i);
    Trajectory traj =
        sim.integrate(sim.rest_state(), scenario.sim_config(), policy.get());
    RunResult r;
    r.samples = traj.samples();
    r.omega_max.resize(traj.samples());
    r.omega_min.resize(traj.samples());
    for (std::size_t s = 0; s < traj.samples(); ++s) {
      r.omega_max[s] = traj.omega.row(static_cast<Eigen::Index>(s)).maxCoeff();
      r.omega_min[s] = traj.omega.row(static_cast<Eigen::Index>(s)).minCoeff();
    }
    // a run aborting non-finite is recorded divergent, the batch continues
    r.cls = traj.aborted_nonfinite ? RunClass::Divergent
                                   : classify_run(traj, eq).classification;
    results[i] = std::move(r);
  };

  const unsigned workers = std::max(1u, spec.workers);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= spec.runs) return;
        one_run(i);
      }
    });
  }
  for (auto& th : pool) th.join();

  BatchReport rep;
  std::size_t max_samples = 0;
  for (const auto& r : results) max_samples = std::max(max_samples, r.samples);
  rep.times.resize(max_samples);
  const double h = scenario.sim_config().step;
  for (std::size_t s = 0; s < max_samples; ++s)
    rep.times[s] = static_cast<double>(s) * h;
  rep.omega_max.assign(max_samples, -std::numeric_limits<double>::infinity());
  rep.omega_min.assign(max_samples, std::numeric_limits<double>::infinity());
  for (const auto& r : results) {
    for (std::size_t s = 0; s < r.samples; ++s) {
      rep.omega_max[s] = std::max(rep.omega_max[s], r.omega_max[s]);
      rep.omega_min[s] = std::min(rep.omega_min[s], r.omega_min[s]);
    }
    rep.classes.push_back(r.cls);
    switch (r.cls) {
      case RunClass::Convergent:
        ++rep.convergent;
        break;
      case RunClass::Oscillatory:
        ++rep.oscillatory;
        break;
      case RunClass::Divergent:
        ++rep.divergent;
        break;
    }
  }
  return rep;
}

}  // namespace vigrid
