#include "vigrid/inertia.hpp"

#include <algorithm>
#include <cmath>

#include "vigrid/errors.hpp"

namespace vigrid {

namespace {

double max_abs_omega(const Eigen::VectorXd& omega) {
  return omega.size() ? omega.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

ConstantPolicy::ConstantPolicy(std::vector<std::size_t> buses, std::vector<double> mv)
    : buses_(std::move(buses)), mv_(std::move(mv)) {
  if (buses_.size() != mv_.size())
    throw ValidationError("constant policy: one Mv per bus required");
  for (double v : mv_)
    if (v < 0.0) throw ValidationError("constant policy: Mv must be >= 0");
}

OpenLoopPolicy::OpenLoopPolicy(std::vector<std::size_t> buses,
                               std::vector<std::vector<Knot>> profiles)
    : buses_(std::move(buses)), profiles_(std::move(profiles)) {
  if (buses_.size() != profiles_.size())
    throw ValidationError("open-loop policy: one profile per bus required");
  for (const auto& prof : profiles_) {
    if (prof.empty()) throw ValidationError("open-loop profile is empty");
    double rb = 0.0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
      if (prof[i].mv < 0.0) throw ValidationError("open-loop profile: Mv must be >= 0");
      if (i > 0) {
        if (prof[i].t <= prof[i - 1].t)
          throw ValidationError("open-loop profile: knot times must increase");
        rb = std::max(rb, std::abs(prof[i].mv - prof[i - 1].mv) /
                              (prof[i].t - prof[i - 1].t));
      }
    }
    rate_bound_.push_back(rb);
  }
}

double OpenLoopPolicy::virtual_inertia(std::size_t slot, double t) const {
  const auto& prof = profiles_[slot];
  if (t <= prof.front().t) return prof.front().mv;
  if (t >= prof.back().t) return prof.back().mv;
  auto it = std::upper_bound(prof.begin(), prof.end(), t,
                             [](double tt, const Knot& k) { return tt < k.t; });
  const Knot& b = *it;
  const Knot& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  return a.mv + s * (b.mv - a.mv);
}

BangBangPolicy::BangBangPolicy(std::vector<std::size_t> buses, BangBangParams params)
    : buses_(std::move(buses)), params_(params) {
  if (params_.magnitude < 0.0) throw ValidationError("bang-bang: Ma must be >= 0");
}

void BangBangPolicy::begin_step(double, double, const Eigen::VectorXd& omega) {
  held_ = max_abs_omega(omega) > params_.threshold ? params_.magnitude : 0.0;
}

RateLimitedPolicy::RateLimitedPolicy(std::vector<std::size_t> buses,
                                     RateLimitedParams params)
    : buses_(std::move(buses)), params_(std::move(params)), u_(buses_.size(), 0.0) {
  if (params_.rho.size() != buses_.size())
    throw ValidationError("rate-limited policy: one rho per bus required");
  for (double r : params_.rho)
    if (2.0 * r - params_.epsilon <= 0.0)
      throw ValidationError(
          "rate-limited policy rejected: 2 rho - epsilon must be positive");
  if (params_.filter_rate <= 0.0)
    throw ValidationError("rate-limited policy: filter rate must be > 0");
}

void RateLimitedPolicy::begin_step(double, double, const Eigen::VectorXd& omega) {
  const double u = max_abs_omega(omega) > params_.threshold ? params_.magnitude : 0.0;
  std::fill(u_.begin(), u_.end(), u);
}

void RateLimitedPolicy::state_rhs(const Eigen::VectorXd& mv,
                                  Eigen::Ref<Eigen::VectorXd> dmv) const {
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    double d = std::min(params_.filter_rate * (u_[i] - mv(static_cast<Eigen::Index>(i))),
                        2.0 * params_.rho[i] - params_.epsilon);
    // projected dynamics: Mv stays non-negative
    if (mv(static_cast<Eigen::Index>(i)) <= 0.0 && d < 0.0) d = 0.0;
    dmv(static_cast<Eigen::Index>(i)) = d;
  }
}

RandomizedPolicy::RandomizedPolicy(std::vector<std::size_t> buses,
                                   RateLimitedParams base, RandomizedParams rnd)
    : RateLimitedPolicy(std::move(buses), std::move(base)), rnd_(rnd), rng_(rnd.seed) {
  if (rnd_.update_period <= 0.0)
    throw ValidationError("randomized policy: update period must be > 0");
}

double RandomizedPolicy::update_set_point(double u, double r, double step) {
  return r >= 0.5 ? u + step : std::max(u - step, 0.0);
}

void RandomizedPolicy::begin_step(double t, double h, const Eigen::VectorXd&) {
  // fire on the first boundary at or past each multiple of the period
  while (t >= next_update_ - 0.25 * h) {
    const double step = rnd_.step_fraction * params_.magnitude;
    for (std::size_t i = 0; i < buses_.size(); ++i)
      u_[i] = update_set_point(u_[i], rng_.next(), step);
    next_update_ += rnd_.update_period;
  }
}

DestabilizerPolicy::DestabilizerPolicy(DestabilizerParams params)
    : params_(params), buses_{params.target_bus} {
  if (params_.hold_inertia <= 0.0)
    throw ValidationError("destabilizer: hold inertia must be > 0");
  if (params_.ramp_duration <= 0.0)
    throw ValidationError("destabilizer: ramp duration must be > 0");
  if (params_.growth_threshold <= 1.0)
    throw ValidationError("destabilizer: growth threshold must exceed 1");
}

void DestabilizerPolicy::begin_step(double t, double h, const Eigen::VectorXd& omega) {
  const double wk = omega(static_cast<Eigen::Index>(params_.target_bus));
  const double dev = std::abs(wk - params_.omega_sync_star);
  if (first_hold_) {
    last_peak_ = dev;
    peaks_.push_back(dev);
    first_hold_ = false;
  }
  if (!escaped_ && dev > params_.escape_radius) {
    escaped_ = true;
    escape_time_ = t;
    return;
  }
  switch (phase_) {
    case Phase::Hold: {
      double sync = 0.0;
      for (Eigen::Index j = 0; j < omega.size(); ++j)
        sync = std::max(sync, std::abs(omega(j) - wk));
      settle_clock_ = sync < params_.settle_tolerance ? settle_clock_ + h : 0.0;
      if (settle_clock_ >= params_.dwell && cycles_ < params_.max_cycles) {
        phase_ = Phase::RampDown;
        phase_start_ = t;
      }
      break;
    }
    case Phase::RampDown:
      if (t >= phase_start_ + params_.ramp_duration) phase_ = Phase::Low;
      break;
    case Phase::Low:
      if (dev > params_.growth_threshold * last_peak_) {
        phase_ = Phase::RampUp;
        phase_start_ = t;
      }
      break;
    case Phase::RampUp:
      if (t >= phase_start_ + params_.ramp_duration) {
        phase_ = Phase::Hold;
        last_peak_ = dev;
        peaks_.push_back(dev);
        ++cycles_;
        settle_clock_ = 0.0;
      }
      break;
  }
}

double DestabilizerPolicy::virtual_inertia(std::size_t, double t) const {
  const double M = params_.hold_inertia;
  switch (phase_) {
    case Phase::Hold:
      return M;
    case Phase::RampDown:
      return M * std::max(0.0, 1.0 - (t - phase_start_) / params_.ramp_duration);
    case Phase::Low:
      return 0.0;
    case Phase::RampUp:
      return M * std::min(1.0, (t - phase_start_) / params_.ramp_duration);
  }
  return M;
}

std::string DestabilizerPolicy::phase_label() const {
  switch (phase_) {
    case Phase::Hold:
      return "hold";
    case Phase::RampDown:
      return "ramp-down";
    case Phase::Low:
      return "release";
    case Phase::RampUp:
      return "ramp-up";
  }
  return "";
}

Assumption4Report check_assumption4(const Eigen::MatrixXd& trace,
                                    const std::vector<double>& rho, double h) {
  if (static_cast<std::size_t>(trace.cols()) != rho.size())
    throw ValidationError("assumption-4 check: one rho per traced bus required");
  if (h <= 0.0) throw ValidationError("assumption-4 check: sample spacing must be > 0");
  Assumption4Report rep;
  for (Eigen::Index i = 0; i + 1 < trace.rows(); ++i) {
    for (Eigen::Index j = 0; j < trace.cols(); ++j) {
      const double rate = (trace(i + 1, j) - trace(i, j)) / h;
      rep.empirical_lipschitz = std::max(rep.empirical_lipschitz, std::abs(rate));
      const double bound = 2.0 * rho[static_cast<std::size_t>(j)];
      if (rate >= bound)
        rep.violations.push_back({static_cast<std::size_t>(j),
                                  static_cast<double>(i) * h, rate, bound});
    }
  }
  return rep;
}

}  // namespace vigrid
