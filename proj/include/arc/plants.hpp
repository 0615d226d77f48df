#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "barn.hpp"
#include "separator.hpp"

namespace arc {

/// Plant adapters give the simulation engine a uniform face: named output
/// channels, named MVs, named disturbance channels, and a derivative
/// evaluation usable by the explicit integrators.

class BarnPlant {
  public:
    explicit BarnPlant(BarnParams params, BarnState initial = {})
        : params_(params), state_(initial) {
        params_.validate();
    }

    std::map<std::string, double> outputs() const {
        return {{"T", state_.t}, {"c", state_.c_ppm()}};
    }
    static const std::vector<std::string>& mv_names() {
        static const std::vector<std::string> n{"u1", "u2"};
        return n;
    }

    BarnState state() const { return state_; }
    void set_state(BarnState s) { state_ = s; }
    const BarnParams& params() const { return params_; }

    /// dstate/dt with the given actuator and disturbance values.
    BarnDerivatives derivatives(const BarnState& s,
                                const std::map<std::string, double>& mv,
                                const std::map<std::string, double>& dist) const {
        BarnInputs in;
        in.u1 = mv.at("u1");
        in.u2 = mv.at("u2");
        in.t_out = value_or(dist, "T_out", 0.0);
        if (auto it = dist.find("n_cows"); it != dist.end())
            in.n_cows_override = it->second;
        return barn_derivatives(s, in, params_);
    }

    void advance(const std::map<std::string, double>& mv,
                 const std::map<std::string, double>& dist, double dt, bool rk4) {
        auto f = [&](const BarnState& s) { return derivatives(s, mv, dist); };
        if (!rk4) {
            auto d = f(state_);
            state_.c += d.dc_dt * dt;
            state_.t += d.dt_dt * dt;
            return;
        }
        auto k1 = f(state_);
        auto at = [&](double h, const BarnDerivatives& k) {
            return BarnState{state_.c + h * k.dc_dt, state_.t + h * k.dt_dt};
        };
        auto k2 = f(at(dt / 2, k1));
        auto k3 = f(at(dt / 2, k2));
        auto k4 = f(at(dt, k3));
        state_.c += dt / 6.0 * (k1.dc_dt + 2 * k2.dc_dt + 2 * k3.dc_dt + k4.dc_dt);
        state_.t += dt / 6.0 * (k1.dt_dt + 2 * k2.dt_dt + 2 * k3.dt_dt + k4.dt_dt);
    }

  private:
    static double value_or(const std::map<std::string, double>& m,
                           const std::string& k, double fallback) {
        auto it = m.find(k);
        return it == m.end() ? fallback : it->second;
    }
    BarnParams params_;
    BarnState state_;
};

class SeparatorPlant {
  public:
    explicit SeparatorPlant(SeparatorParams params,
                            SeparatorState initial = nominal_separator_state())
        : params_(params), state_(initial) {
        params_.validate();
    }

    std::map<std::string, double> outputs() const {
        SeparatorInputs in{last_mv_.at("choke"), last_mv_.at("comp"),
                           last_mv_.at("lv")};
        auto d = separator_derivatives(state_, in, effective_params());
        return {{"p_sep", state_.p_sep},
                {"level", state_.level},
                {"p_well", d.p_well},
                {"feed", d.feed}};
    }
    static const std::vector<std::string>& mv_names() {
        static const std::vector<std::string> n{"choke", "comp", "lv"};
        return n;
    }

    SeparatorState state() const { return state_; }
    void set_state(SeparatorState s) { state_ = s; }
    void set_initial_mvs(const SeparatorInputs& in) {
        last_mv_ = {{"choke", in.z_choke}, {"comp", in.comp_speed}, {"lv", in.z_liq}};
    }
    const SeparatorParams& params() const { return params_; }

    void advance(const std::map<std::string, double>& mv,
                 const std::map<std::string, double>& dist, double dt, bool rk4) {
        last_mv_ = mv;
        last_dist_ = dist;
        SeparatorInputs in{mv.at("choke"), mv.at("comp"), mv.at("lv")};
        const SeparatorParams p = effective_params();
        auto f = [&](const SeparatorState& s) {
            return separator_derivatives(s, in, p);
        };
        auto clampst = [](SeparatorState s) {
            s.level = std::min(100.0, std::max(0.0, s.level));
            return s;
        };
        if (!rk4) {
            auto d = f(state_);
            state_.p_sep += d.dp_sep_dt * dt;
            state_.level += d.dlevel_dt * dt;
            state_ = clampst(state_);
            return;
        }
        auto k1 = f(state_);
        auto at = [&](double h, const SeparatorDerivatives& k) {
            return SeparatorState{state_.p_sep + h * k.dp_sep_dt,
                                  state_.level + h * k.dlevel_dt};
        };
        auto k2 = f(at(dt / 2, k1));
        auto k3 = f(at(dt / 2, k2));
        auto k4 = f(at(dt, k3));
        state_.p_sep +=
            dt / 6.0 * (k1.dp_sep_dt + 2 * k2.dp_sep_dt + 2 * k3.dp_sep_dt + k4.dp_sep_dt);
        state_.level +=
            dt / 6.0 * (k1.dlevel_dt + 2 * k2.dlevel_dt + 2 * k3.dlevel_dt + k4.dlevel_dt);
        state_ = clampst(state_);
    }

  private:
    /// Disturbances may override selected parameters (gas_fraction, p_res).
    SeparatorParams effective_params() const {
        SeparatorParams p = params_;
        if (auto it = last_dist_.find("gas_fraction"); it != last_dist_.end())
            p.gas_fraction = it->second;
        if (auto it = last_dist_.find("p_res"); it != last_dist_.end())
            p.p_res = it->second;
        return p;
    }

    SeparatorParams params_;
    SeparatorState state_;
    std::map<std::string, double> last_mv_ = {
        {"choke", nominal_separator_inputs().z_choke},
        {"comp", nominal_separator_inputs().comp_speed},
        {"lv", nominal_separator_inputs().z_liq}};
    std::map<std::string, double> last_dist_;
};

} // namespace arc
