#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pid.hpp"
#include "selector.hpp"

namespace arc {

/// Wiring container for one control structure: named PI controllers,
/// constants (desired inputs), external channels (operator values), and a
/// set of selector nodes evaluated in declaration order. Selector inputs
/// may only reference nodes that already exist when the selector is added,
/// so the network is acyclic by construction.
class ControlGraph {
  public:
    struct Selector {
        std::string label;
        SelectorKind kind;
        std::vector<std::string> inputs;
        bool has_desired_input = false;
    };

    struct ScanResult {
        std::map<std::string, double> mv_values;
        std::map<std::string, std::string> winners;    // mv -> leaf source name
        std::map<std::string, double> candidates;      // controller -> clamped candidate
    };

    void add_controller(PiController ctrl) {
        const std::string name = ctrl.name();
        require_fresh(name);
        controllers_.emplace(name, std::move(ctrl));
    }

    /// Fixed desired-input value (e.g. the nominal 50% fan speed).
    void add_constant(const std::string& name, double value) {
        require_fresh(name);
        constants_[name] = value;
    }

    /// Time-varying operator input read from the measurement/channel map.
    void add_external(const std::string& name) {
        require_fresh(name);
        externals_.insert({name, true});
    }

    void add_selector(const std::string& label, SelectorKind kind,
                      std::vector<std::string> inputs) {
        require_fresh(label);
        if (kind == SelectorKind::Mid ? inputs.size() != 3 : inputs.size() < 2)
            throw std::invalid_argument("selector " + label + ": bad arity");
        Selector s{label, kind, std::move(inputs), false};
        for (const auto& in : s.inputs) {
            if (!known(in))
                throw std::invalid_argument("selector " + label +
                                            ": unknown or forward input '" + in + "'");
            if (constants_.count(in) || externals_.count(in))
                s.has_desired_input = true;
        }
        selector_index_[label] = selectors_.size();
        selectors_.push_back(std::move(s));
    }

    /// Bind the plant MV to the node whose output drives it.
    void bind_mv(const std::string& mv, const std::string& node) {
        if (!known(node))
            throw std::invalid_argument("mv " + mv + ": unknown node '" + node + "'");
        if (mv_bindings_.count(mv))
            throw std::invalid_argument("mv " + mv + " bound twice");
        mv_bindings_[mv] = node;
    }

    /// Bind a controller's measurement to a named channel.
    void bind_measurement(const std::string& ctrl, const std::string& channel) {
        controller(ctrl); // existence check
        measurement_bindings_[ctrl] = channel;
    }

    /// Validate the wiring and cache, per controller, the MV it ultimately
    /// feeds. Call once after construction; evaluate() requires it.
    void finalize() {
        // Map each node to the MV at the end of its selector chain.
        node_mv_.clear();
        for (const auto& [mv, node] : mv_bindings_) {
            if (node_mv_.count(node))
                throw std::invalid_argument("node " + node + " drives two MVs");
            node_mv_[node] = mv;
        }
        for (auto it = selectors_.rbegin(); it != selectors_.rend(); ++it) {
            auto found = node_mv_.find(it->label);
            if (found == node_mv_.end())
                throw std::invalid_argument("selector " + it->label +
                                            " does not reach any MV");
            for (const auto& in : it->inputs) {
                if (node_mv_.count(in))
                    throw std::invalid_argument("node " + in +
                                                " feeds more than one chain");
                node_mv_[in] = found->second;
            }
        }
        controller_mv_.clear();
        for (const auto& [name, ctrl] : controllers_) {
            auto found = node_mv_.find(name);
            if (found == node_mv_.end())
                throw std::invalid_argument("controller " + name +
                                            " feeds no selector chain or MV");
            controller_mv_[name] = found->second;
            if (!measurement_bindings_.count(name))
                throw std::invalid_argument("controller " + name +
                                            " has no measurement binding");
        }
        finalized_ = true;
    }

    /// One synchronous scan: propose all controllers, evaluate selectors in
    /// order, then commit every controller against the final value of the
    /// MV it feeds. Pure function of (state, channels, dt).
    ScanResult evaluate(const std::map<std::string, double>& channels, double dt) {
        if (!finalized_)
            throw std::logic_error("evaluate() before finalize()");

        std::map<std::string, double> value;   // node -> output this scan
        std::map<std::string, std::string> leaf; // node -> originating source
        ScanResult out;

        for (const auto& [name, v] : constants_) {
            value[name] = v;
            leaf[name] = name;
        }
        for (const auto& [name, _] : externals_) {
            value[name] = channel_value(channels, name);
            leaf[name] = name;
        }
        for (auto& [name, ctrl] : controllers_) {
            double y = channel_value(channels, measurement_bindings_.at(name));
            double cand = ctrl.propose(y);
            value[name] = cand;
            leaf[name] = name;
            out.candidates[name] = cand;
        }
        for (const auto& sel : selectors_) {
            std::vector<double> cands;
            cands.reserve(sel.inputs.size());
            for (const auto& in : sel.inputs)
                cands.push_back(value.at(in));
            SelectorResult r = select(sel.kind, cands);
            value[sel.label] = r.value;
            leaf[sel.label] = leaf.at(sel.inputs[r.winner]);
        }
        for (const auto& [mv, node] : mv_bindings_) {
            out.mv_values[mv] = value.at(node);
            out.winners[mv] = leaf.at(node);
        }
        for (auto& [name, ctrl] : controllers_)
            ctrl.commit(out.mv_values.at(controller_mv_.at(name)), dt);
        return out;
    }

    PiController& controller(const std::string& name) {
        auto it = controllers_.find(name);
        if (it == controllers_.end())
            throw std::invalid_argument("unknown controller '" + name + "'");
        return it->second;
    }
    const PiController& controller(const std::string& name) const {
        return const_cast<ControlGraph*>(this)->controller(name);
    }
    bool has_controller(const std::string& name) const {
        return controllers_.count(name) != 0;
    }
    const std::map<std::string, PiController>& controllers() const {
        return controllers_;
    }
    const std::vector<Selector>& selectors() const { return selectors_; }
    const std::map<std::string, std::string>& mv_bindings() const {
        return mv_bindings_;
    }
    const std::map<std::string, std::string>& measurement_bindings() const {
        return measurement_bindings_;
    }
    /// The MV fed (through selectors) by the given controller.
    const std::string& mv_of(const std::string& ctrl) const {
        return controller_mv_.at(ctrl);
    }
    /// The MV a selector's chain ends at (valid after finalize()).
    const std::string& mv_of_selector_chain(const std::string& label) const {
        return node_mv_.at(label);
    }
    std::optional<double> constant_value(const std::string& name) const {
        auto it = constants_.find(name);
        if (it == constants_.end())
            return {};
        return it->second;
    }

  private:
    bool known(const std::string& name) const {
        return controllers_.count(name) || constants_.count(name) ||
               externals_.count(name) || selector_index_.count(name);
    }
    void require_fresh(const std::string& name) const {
        if (known(name))
            throw std::invalid_argument("duplicate node name '" + name + "'");
    }
    static double channel_value(const std::map<std::string, double>& channels,
                                const std::string& name) {
        auto it = channels.find(name);
        if (it == channels.end())
            throw std::invalid_argument("unresolved channel '" + name + "'");
        return it->second;
    }

    std::map<std::string, PiController> controllers_;
    std::map<std::string, double> constants_;
    std::map<std::string, bool> externals_;
    std::vector<Selector> selectors_;
    std::map<std::string, std::size_t> selector_index_;
    std::map<std::string, std::string> mv_bindings_;
    std::map<std::string, std::string> measurement_bindings_;
    std::map<std::string, std::string> controller_mv_;
    std::map<std::string, std::string> node_mv_;
    bool finalized_ = false;
};

/// Warm-start every controller at an operating point: measurement channels
/// and MV values as they stand when the run begins.
inline void warm_start_all(ControlGraph& g,
                           const std::map<std::string, double>& channels,
                           const std::map<std::string, double>& mvs) {
    for (const auto& [name, _] : g.controllers()) {
        const auto& channel = g.measurement_bindings().at(name);
        g.controller(name).warm_start(channels.at(channel),
                                      mvs.at(g.mv_of(name)));
    }
}

/// Two controllers on the same CV with setpoints SPL and SPH = SPL + delta,
/// each driving a different MV. Switching between the MVs then emerges from
/// saturation and feedback rather than from fixed split values.
struct SplitParallelPair {
    std::string controller_low;
    std::string controller_high;
    double delta;

    /// Check the pair against a built graph: setpoint separation is exact
    /// and the two controllers reach different MVs.
    void validate(const ControlGraph& g) const {
        const auto& lo = g.controller(controller_low);
        const auto& hi = g.controller(controller_high);
        if (hi.setpoint() - lo.setpoint() != delta)
            throw std::invalid_argument("split-parallel pair " + controller_low +
                                        "/" + controller_high +
                                        ": setpoint separation != delta");
        if (g.mv_of(controller_low) == g.mv_of(controller_high))
            throw std::invalid_argument("split-parallel pair " + controller_low +
                                        "/" + controller_high +
                                        ": both controllers drive the same MV");
    }
};

} // namespace arc
