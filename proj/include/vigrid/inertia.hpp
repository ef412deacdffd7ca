#ifndef VIGRID_INERTIA_HPP
#define VIGRID_INERTIA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vigrid {

/// Deterministic uniform draws on [0,1) from the standard mt19937_64
/// sequence; the bit-to-double mapping is fixed here so traces are
/// reproducible across standard libraries.
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : gen_(seed) {}
  double next() { return (gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

/// Virtual-inertia trajectory generator. Policies are sampled once per
/// integration step (begin_step) where they may read the bus frequencies;
/// between boundaries the per-bus value is a function of time only, so each
/// step integrates a smooth ODE. Rate-limited policies expose their Mv as
/// additional ODE states instead.
class InertiaPolicy {
 public:
  virtual ~InertiaPolicy() = default;

  virtual std::string kind() const = 0;
  /// buses the scheme acts on (indices into the graph)
  virtual const std::vector<std::size_t>& buses() const = 0;

  /// feedback sampling at a step boundary
  virtual void begin_step(double t, double h, const Eigen::VectorXd& omega) {}

  /// number of Mv components integrated with the system state
  virtual std::size_t state_size() const { return 0; }
  virtual void initial_state(Eigen::Ref<Eigen::VectorXd> mv) const {}
  /// dMv/dt for the integrated components (rate-limited family)
  virtual void state_rhs(const Eigen::VectorXd& mv,
                         Eigen::Ref<Eigen::VectorXd> dmv) const {}

  /// Mv for exogenous policies, evaluated at a stage time within the
  /// current step. Unused for policies with state_size() > 0.
  virtual double virtual_inertia(std::size_t bus_slot, double t) const { return 0.0; }

  /// declared bound on dMv/dt, +inf when unbounded (bang-bang)
  virtual double declared_rate_bound(std::size_t bus_slot) const = 0;

  /// current set point, for traces
  virtual double set_point(std::size_t bus_slot) const { return 0.0; }
  virtual std::string phase_label() const { return ""; }
  /// a policy may request early termination (destabilizer escape)
  virtual bool terminal() const { return false; }
};

/// Constant Mv (possibly zero) at every scheme bus.
class ConstantPolicy final : public InertiaPolicy {
 public:
  ConstantPolicy(std::vector<std::size_t> buses, std::vector<double> mv);
  std::string kind() const override { return "constant"; }
  const std::vector<std::size_t>& buses() const override { return buses_; }
  double virtual_inertia(std::size_t slot, double) const override { return mv_[slot]; }
  double declared_rate_bound(std::size_t) const override { return 0.0; }

 private:
  std::vector<std::size_t> buses_;
  std::vector<double> mv_;
};

/// Piecewise-linear open-loop profile per scheme bus: (t, Mv) knots,
/// evaluated exactly at integrator stage times.
class OpenLoopPolicy final : public InertiaPolicy {
 public:
  struct Knot {
    double t;
    double mv;
  };
  OpenLoopPolicy(std::vector<std::size_t> buses, std::vector<std::vector<Knot>> profiles);
  std::string kind() const override { return "open-loop-piecewise"; }
  const std::vector<std::size_t>& buses() const override { return buses_; }
  double virtual_inertia(std::size_t slot, double t) const override;
  double declared_rate_bound(std::size_t slot) const override { return rate_bound_[slot]; }

 private:
  std::vector<std::size_t> buses_;
  std::vector<std::vector<Knot>> profiles_;
  std::vector<double> rate_bound_;
};

struct BangBangParams {
  double magnitude = 0.0;   // Ma
  double threshold = 0.02;  // Hz
};

/// Mv = Ma when max_j |omega_j| exceeds the threshold, else 0. Discontinuous
/// by construction; the simulator sees it sampled-and-held per step. This is
/// the oscillation-inducing scheme and deliberately has no rate bound.
class BangBangPolicy final : public InertiaPolicy {
 public:
  BangBangPolicy(std::vector<std::size_t> buses, BangBangParams params);
  std::string kind() const override { return "bang-bang"; }
  const std::vector<std::size_t>& buses() const override { return buses_; }
  void begin_step(double t, double h, const Eigen::VectorXd& omega) override;
  double virtual_inertia(std::size_t, double) const override { return held_; }
  double declared_rate_bound(std::size_t) const override {
    return std::numeric_limits<double>::infinity();
  }
  double set_point(std::size_t) const override { return held_; }

 private:
  std::vector<std::size_t> buses_;
  BangBangParams params_;
  double held_ = 0.0;
};

struct RateLimitedParams {
  double magnitude = 0.0;          // Ma
  double filter_rate = 100.0;      // tau, 1/s
  double epsilon = 1e-4;           // growth-cap margin
  double threshold = 0.02;         // Hz, threshold set-point rule
  std::vector<double> rho;         // per scheme bus strictness constants
};

/// dMv/dt = min(tau (u - Mv), 2 rho - eps), Mv clamped at zero; the set
/// point u follows the threshold rule, or randomized updates when an update
/// period is configured. Mv is integrated as part of the system state.
class RateLimitedPolicy : public InertiaPolicy {
 public:
  RateLimitedPolicy(std::vector<std::size_t> buses, RateLimitedParams params);
  std::string kind() const override { return "rate-limited"; }
  const std::vector<std::size_t>& buses() const override { return buses_; }
  void begin_step(double t, double h, const Eigen::VectorXd& omega) override;
  std::size_t state_size() const override { return buses_.size(); }
  void initial_state(Eigen::Ref<Eigen::VectorXd> mv) const override {
    mv.setZero();
  }
  void state_rhs(const Eigen::VectorXd& mv,
                 Eigen::Ref<Eigen::VectorXd> dmv) const override;
  double declared_rate_bound(std::size_t slot) const override {
    return 2.0 * params_.rho[slot] - params_.epsilon;
  }
  double set_point(std::size_t slot) const override { return u_[slot]; }

 protected:
  std::vector<std::size_t> buses_;
  RateLimitedParams params_;
  std::vector<double> u_;
};

struct RandomizedParams {
  double update_period = 0.5;  // s
  double step_fraction = 0.5;  // of Ma
  std::uint64_t seed = 0;
};

/// Rate-limited dynamics with set points updated every update_period by
/// equiprobably adding or subtracting step_fraction*Ma (clamped at zero).
class RandomizedPolicy final : public RateLimitedPolicy {
 public:
  RandomizedPolicy(std::vector<std::size_t> buses, RateLimitedParams base,
                   RandomizedParams rnd);
  std::string kind() const override { return "randomized"; }
  void begin_step(double t, double h, const Eigen::VectorXd& omega) override;

  /// One Eq-(23)-style update; exposed for tests.
  static double update_set_point(double u, double r, double step);

 private:
  RandomizedParams rnd_;
  UniformRng rng_;
  double next_update_ = 0.0;
};

struct DestabilizerParams {
  std::size_t target_bus = 0;       // k, index into the graph
  double hold_inertia = 0.0;        // Mv plateau during HOLD
  double settle_tolerance = 1e-4;   // Hz, sync band entering release
  double dwell = 1.0;               // s the band must hold
  double growth_threshold = 1.05;   // multiplier on the previous peak
  double ramp_duration = 0.02;      // s, Lipschitz ramp
  double escape_radius = 0.5;       // Hz, termination
  double omega_sync_star = 0.0;     // equilibrium frequency from analysis
  std::size_t max_cycles = 10000;
};

/// Two-phase hold/release policy at a single bus: hold a large inertia until
/// the network settles near a gamma-point of the held frequency, release it,
/// wait for the deviation to overshoot past growth_threshold times the last
/// recorded peak, then ramp back up and repeat. Ramps are linear over
/// ramp_duration so the trajectory stays Lipschitz.
class DestabilizerPolicy final : public InertiaPolicy {
 public:
  enum class Phase { Hold, RampDown, Low, RampUp };

  DestabilizerPolicy(DestabilizerParams params);
  std::string kind() const override { return "destabilizer"; }
  const std::vector<std::size_t>& buses() const override { return buses_; }
  void begin_step(double t, double h, const Eigen::VectorXd& omega) override;
  double virtual_inertia(std::size_t slot, double t) const override;
  double declared_rate_bound(std::size_t) const override {
    return params_.hold_inertia / params_.ramp_duration;
  }
  std::string phase_label() const override;
  bool terminal() const override { return escaped_; }

  const std::vector<double>& peaks() const { return peaks_; }
  std::size_t cycles() const { return cycles_; }
  std::optional<double> escape_time() const { return escape_time_; }

 private:
  DestabilizerParams params_;
  std::vector<std::size_t> buses_;
  Phase phase_ = Phase::Hold;
  double phase_start_ = 0.0;
  double settle_clock_ = 0.0;
  double last_peak_ = 0.0;
  bool first_hold_ = true;
  std::vector<double> peaks_;
  std::size_t cycles_ = 0;
  bool escaped_ = false;
  std::optional<double> escape_time_;
};

/// Assumption 3/4 compliance report for a sampled inertia trace.
struct Assumption4Report {
  struct Violation {
    std::size_t bus;
    double time;
    double rate;
    double bound;
  };
  std::vector<Violation> violations;
  double empirical_lipschitz = 0.0;  // max |dM/dt| over the trace
  bool compliant() const { return violations.empty(); }
};

/// Finite-difference check of dM/dt < 2 rho_j on a uniformly sampled trace.
/// rows of `trace`: samples; columns: buses. `h` is the sample spacing.
Assumption4Report check_assumption4(const Eigen::MatrixXd& trace,
                                    const std::vector<double>& rho, double h);

}  // namespace vigrid

#endif
