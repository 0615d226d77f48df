#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace arc {

/// PI controller with tracking anti-windup (Astrom scheme).
///
/// Each scan is a two-phase protocol: propose() computes the candidate
/// output from the current measurement, then — after selectors have picked
/// the value actually sent to the actuator — commit() advances the integral
/// state using both the control error and the tracking correction
/// (u_selected - candidate)/tau_t. A controller that loses the selection
/// therefore pulls its candidate toward the committed value instead of
/// winding up.
class PiController {
  public:
    PiController(std::string name, double kc, double tau_i, double setpoint,
                 double tau_t = -1.0, double u_min = 0.0, double u_max = 100.0)
        : name_(std::move(name)), kc_(kc), tau_i_(tau_i),
          tau_t_(tau_t > 0.0 ? tau_t : tau_i), setpoint_(setpoint),
          u_min_(u_min), u_max_(u_max) {
        if (!(tau_i_ > 0.0))
            throw std::invalid_argument(name_ + ": tau_i must be > 0");
        if (!(tau_t_ > 0.0))
            throw std::invalid_argument(name_ + ": tau_t must be > 0");
        if (!(u_min_ < u_max_))
            throw std::invalid_argument(name_ + ": u_min must be < u_max");
    }

    /// Candidate output for measurement y, clamped to [u_min, u_max].
    /// Stores the unclamped value for the commit phase; does not touch the
    /// integral state.
    double propose(double y) {
        if (!std::isfinite(y))
            throw std::invalid_argument(name_ + ": non-finite measurement");
        last_error_ = setpoint_ - y;
        last_candidate_ = kc_ * last_error_ + integral_;
        has_proposal_ = true;
        return clamp(last_candidate_);
    }

    /// Advance the integral state one step of dt seconds, given the value
    /// u_selected that was actually applied to the MV this controller feeds.
    void commit(double u_selected, double dt) {
        if (!has_proposal_)
            throw std::logic_error(name_ + ": commit without propose");
        if (!(dt > 0.0))
            throw std::invalid_argument(name_ + ": dt must be > 0");
        integral_ += (kc_ / tau_i_) * last_error_ * dt;
        if (tracking_)
            integral_ += (u_selected - last_candidate_) * dt / tau_t_;
        has_proposal_ = false;
    }

    /// Set the integral so that a controller sitting at measurement y with
    /// committed output u is already at its tracking equilibrium
    /// (candidate = u + (tau_t/tau_i)*kc*e). Used for bumpless starts.
    void warm_start(double y, double u) {
        double e = setpoint_ - y;
        integral_ = u + kc_ * e * (tau_t_ / tau_i_ - 1.0);
        has_proposal_ = false;
    }

    double clamp(double u) const {
        return u < u_min_ ? u_min_ : (u > u_max_ ? u_max_ : u);
    }

    const std::string& name() const { return name_; }
    double kc() const { return kc_; }
    double tau_i() const { return tau_i_; }
    double tau_t() const { return tau_t_; }
    double setpoint() const { return setpoint_; }
    double u_min() const { return u_min_; }
    double u_max() const { return u_max_; }
    double integral() const { return integral_; }
    double last_candidate() const { return last_candidate_; }
    bool tracking_enabled() const { return tracking_; }

    void set_setpoint(double sp) { setpoint_ = sp; }
    void set_integral(double v) { integral_ = v; }
    /// Disabling tracking removes the anti-windup correction; kept for
    /// windup demonstrations.
    void set_tracking_enabled(bool on) { tracking_ = on; }

  private:
    std::string name_;
    double kc_;
    double tau_i_;
    double tau_t_;
    double setpoint_;
    double u_min_;
    double u_max_;
    double integral_ = 0.0;
    double last_candidate_ = 0.0;
    double last_error_ = 0.0;
    bool has_proposal_ = false;
    bool tracking_ = true;
};

} // namespace arc
