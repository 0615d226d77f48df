#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowsheet.hpp"

namespace arc {

enum class RuleId { C1, C2, C3, C4, S1, S2, S3 };
enum class Severity { Pass, Warning, Violation };

inline const char* to_string(RuleId r) {
    switch (r) {
    case RuleId::C1: return "C1";
    case RuleId::C2: return "C2";
    case RuleId::C3: return "C3";
    case RuleId::C4: return "C4";
    case RuleId::S1: return "S1";
    case RuleId::S2: return "S2";
    case RuleId::S3: return "S3";
    }
    return "?";
}
inline const char* to_string(Severity s) {
    switch (s) {
    case Severity::Pass: return "pass";
    case Severity::Warning: return "warning";
    case Severity::Violation: return "violation";
    }
    return "?";
}

struct RuleReport {
    RuleId rule;
    Severity severity = Severity::Pass;
    std::vector<std::string> locus; // named elements involved
    std::string message;

    explicit RuleReport(RuleId r) : rule(r) {}

    void flag(Severity s, const std::vector<std::string>& names,
              const std::string& msg) {
        severity = std::max(severity, s);
        for (const auto& n : names)
            if (std::find(locus.begin(), locus.end(), n) == locus.end())
                locus.push_back(n);
        if (!message.empty())
            message += "; ";
        message += msg;
    }
};

namespace detail {

/// Flow-setting agents on an element: loops outside selectors, a selector
/// chain (which arbitrates all its inputs), and a static TPM declaration.
inline std::vector<std::string> flow_setters(const FlowsheetSpec& fs,
                                             const std::string& element) {
    std::vector<std::string> setters;
    auto chain = fs.chain_for(element);
    std::set<std::string> in_chain;
    for (const auto* sel : chain)
        for (const auto& in : sel->inputs)
            in_chain.insert(in);
    for (const auto& l : fs.loops)
        if (l.mv == element && !in_chain.count(l.name))
            setters.push_back("loop " + l.name);
    if (!chain.empty())
        setters.push_back("selector chain");
    if (fs.tpm == element && chain.empty())
        setters.push_back("TPM");
    return setters;
}

/// Streams carrying the same flow at steady state: connected through
/// junction units (one stream in, one out).
inline std::vector<std::set<std::string>> flow_classes(const FlowsheetSpec& fs) {
    std::map<std::string, std::set<std::string>> cls; // stream -> class members
    std::vector<std::set<std::string>> out;
    std::map<std::string, int> idx;
    int next = 0;
    for (const auto& s : fs.streams) {
        idx[s.name] = next++;
        out.push_back({s.name});
    }
    auto merge = [&](const std::string& a, const std::string& b) {
        int ia = idx[a], ib = idx[b];
        if (ia == ib)
            return;
        for (const auto& n : out[ib]) {
            out[ia].insert(n);
            idx[n] = ia;
        }
        out[ib].clear();
    };
    for (const auto& u : fs.units) {
        if (u.kind != FlowsheetSpec::UnitKind::Junction)
            continue;
        std::vector<std::string> in, outgoing;
        for (const auto& s : fs.streams) {
            if (s.to == u.name) in.push_back(s.name);
            if (s.from == u.name) outgoing.push_back(s.name);
        }
        if (in.size() == 1 && outgoing.size() == 1)
            merge(in[0], outgoing[0]);
    }
    std::vector<std::set<std::string>> compact;
    for (auto& c : out)
        if (!c.empty())
            compact.push_back(std::move(c));
    return compact;
}

inline std::vector<std::string> loops_on_inventory(const FlowsheetSpec& fs,
                                                   const FlowsheetSpec::Inventory& inv) {
    const std::string tag =
        inv.kind == FlowsheetSpec::InventoryKind::Level ? "level" : "pressure";
    std::vector<std::string> out;
    for (const auto& l : fs.loops)
        if (l.cv_unit == inv.unit && l.cv_tag == tag)
            out.push_back(l.name);
    return out;
}

/// TPM candidates of a bidirectional scheme: MVs whose selector chain has
/// an operator-set desired input.
inline std::vector<std::string> tpm_candidates(const FlowsheetSpec& fs) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& sel : fs.selectors)
        if (sel.has_desired_input && seen.insert(sel.mv).second &&
            fs.element_stream(sel.mv))
            out.push_back(sel.mv);
    return out;
}

enum class Side { Inflow, Outflow, Neither };

/// Where an element's stream sits relative to a unit: on the inflow side
/// (it feeds the unit, directly or upstream of it) or the outflow side.
inline Side element_side(const FlowsheetSpec& fs, const std::string& unit,
                         const FlowsheetSpec::Stream& s) {
    if (s.from == unit || fs.reaches(unit, s.from))
        return Side::Outflow;
    if (s.to == unit || fs.reaches(s.to, unit))
        return Side::Inflow;
    return Side::Neither;
}

enum class Position { Upstream, Downstream, Neither };

/// Unit position relative to a TPM stream.
inline Position unit_position(const FlowsheetSpec& fs, const std::string& unit,
                              const FlowsheetSpec::Stream& tpm) {
    if (tpm.to == unit || fs.reaches(tpm.to, unit))
        return Position::Downstream;
    if (tpm.from == unit || fs.reaches(unit, tpm.from))
        return Position::Upstream;
    return Position::Neither;
}

/// True when the loop's pairing radiates correctly around the given TPM.
/// Unrelated branches pass vacuously.
inline bool loop_radiates(const FlowsheetSpec& fs, const FlowsheetSpec::Loop& l,
                          const FlowsheetSpec::Stream& tpm, bool* applicable) {
    const auto* mv_stream = fs.element_stream(l.mv);
    if (!mv_stream || mv_stream->name == tpm.name) {
        *applicable = false; // non-flow MV, or the TPM element itself
        return true;
    }
    Position pos = unit_position(fs, l.cv_unit, tpm);
    Side side = element_side(fs, l.cv_unit, *mv_stream);
    if (pos == Position::Neither || side == Side::Neither) {
        *applicable = false;
        return true;
    }
    *applicable = true;
    return pos == Position::Downstream ? side == Side::Outflow
                                       : side == Side::Inflow;
}

} // namespace detail

/// Rule C1: no flow may be set twice. Two independent flow-setters on one
/// stream (or on streams joined through junctions) conflict; a selector
/// chain on an element arbitrates and counts once.
inline RuleReport check_c1(const FlowsheetSpec& fs) {
    RuleReport rep(RuleId::C1);
    for (const auto& cls : detail::flow_classes(fs)) {
        std::vector<std::string> setters;
        std::vector<std::string> elements;
        for (const auto& sname : cls) {
            for (const auto& s : fs.streams)
                if (s.name == sname && !s.element.empty()) {
                    elements.push_back(s.element);
                    for (auto& x : detail::flow_setters(fs, s.element))
                        setters.push_back(x + " (via " + s.element + ")");
                }
        }
        if (setters.size() > 1) {
            std::string msg = "flow set " + std::to_string(setters.size()) +
                              " times:";
            for (const auto& s : setters)
                msg += " " + s;
            rep.flag(Severity::Violation, elements, msg);
        }
    }
    if (rep.severity == Severity::Pass)
        rep.message = "no flow is set twice";
    return rep;
}

/// Rule C2: a boundary-pressure loop implicitly sets the in- or outflow,
/// making its MV a TPM. Consistent when that MV is the declared TPM (or
/// the TPM is auto); a different declared TPM on the same path conflicts.
inline RuleReport check_c2(const FlowsheetSpec& fs) {
    RuleReport rep(RuleId::C2);
    for (const auto& l : fs.loops) {
        if (l.cv_tag != "pressure")
            continue;
        const auto* u = fs.find_unit(l.cv_unit);
        if (!u || (u->kind != FlowsheetSpec::UnitKind::Source &&
                   u->kind != FlowsheetSpec::UnitKind::Sink))
            continue;
        const auto* mv_stream = fs.element_stream(l.mv);
        if (!mv_stream)
            continue;
        if (fs.tpm.empty() || fs.tpm == "auto") {
            rep.flag(Severity::Pass, {l.name, l.mv},
                     "loop " + l.name + " makes " + l.mv + " a TPM candidate");
            continue;
        }
        if (fs.tpm == l.mv) {
            rep.flag(Severity::Pass, {l.name, l.mv},
                     "TPM remains at " + l.mv + " (boundary pressure loop " +
                         l.name + ")");
            continue;
        }
        const auto* tpm_stream = fs.element_stream(fs.tpm);
        bool same_path =
            tpm_stream &&
            (fs.reaches(mv_stream->to, tpm_stream->from) ||
             fs.reaches(tpm_stream->to, mv_stream->from) ||
             tpm_stream->name == mv_stream->name);
        if (same_path)
            rep.flag(Severity::Violation, {l.name, l.mv, fs.tpm},
                     "boundary pressure loop " + l.name + " makes " + l.mv +
                         " an implicit TPM, conflicting with declared TPM " +
                         fs.tpm);
    }
    if (rep.severity == Severity::Pass && rep.message.empty())
        rep.message = "no boundary pressure loops";
    return rep;
}

/// Rule C3 (radiation rule): inventory loops pair in the flow direction
/// downstream of the TPM and against it upstream. With a static TPM every
/// inventory loop must radiate; with tpm=auto each inventory needs, for
/// every TPM candidate, at least one correctly radiating loop.
inline RuleReport check_radiation(const FlowsheetSpec& fs) {
    RuleReport rep(RuleId::C3);
    auto check_static = [&](const FlowsheetSpec::Stream& tpm_stream) {
        for (const auto& inv : fs.inventories) {
            for (const auto& lname : detail::loops_on_inventory(fs, inv)) {
                const auto* l = fs.find_loop(lname);
                bool applicable = false;
                if (!detail::loop_radiates(fs, *l, tpm_stream, &applicable) &&
                    applicable)
                    rep.flag(Severity::Violation, {lname},
                             "loop " + lname + " on " + inv.unit +
                                 " does not radiate around TPM " +
                                 tpm_stream.element);
            }
        }
    };
    if (fs.tpm == "auto") {
        auto candidates = detail::tpm_candidates(fs);
        for (const auto& cand : candidates) {
            const auto* tpm_stream = fs.element_stream(cand);
            for (const auto& inv : fs.inventories) {
                auto loops = detail::loops_on_inventory(fs, inv);
                if (loops.empty())
                    continue;
                bool any_ok = false, any_applicable = false;
                for (const auto& lname : loops) {
                    bool applicable = false;
                    bool ok = detail::loop_radiates(fs, *fs.find_loop(lname),
                                                    *tpm_stream, &applicable);
                    if (!applicable)
                        continue;
                    any_applicable = true;
                    if (ok)
                        any_ok = true;
                }
                // A unit feeding several branches is not strictly upstream
                // for a candidate on one of them; skip that case.
                bool multi_out = false;
                if (tpm_stream->from == inv.unit) {
                    int outs = 0;
                    for (const auto& s : fs.streams)
                        if (s.from == inv.unit)
                            ++outs;
                    multi_out = outs > 1;
                }
                if (any_applicable && !any_ok && !multi_out)
                    rep.flag(Severity::Violation, {inv.unit, cand},
                             "no loop on " + inv.unit +
                                 " radiates when the TPM is at " + cand);
            }
        }
        if (rep.severity == Severity::Pass)
            rep.message = "radiating for all " +
                          std::to_string(candidates.size()) + " TPM candidates";
        return rep;
    }
    const auto* tpm_stream = fs.tpm.empty() ? nullptr : fs.element_stream(fs.tpm);
    if (!tpm_stream) {
        rep.message = "no TPM declared, rule not applicable";
        return rep;
    }
    check_static(*tpm_stream);
    if (rep.severity == Severity::Pass)
        rep.message = "all inventory loops radiate around " + fs.tpm;
    return rep;
}

/// Rule C4: no inventory loop may cross the TPM. The CV unit must stay
/// connected to its MV when the TPM stream is removed from the flowsheet.
inline RuleReport check_c4(const FlowsheetSpec& fs) {
    RuleReport rep(RuleId::C4);
    std::vector<std::string> tpms;
    if (fs.tpm == "auto")
        tpms = detail::tpm_candidates(fs);
    else if (!fs.tpm.empty())
        tpms.push_back(fs.tpm);
    for (const auto& tpm : tpms) {
        const auto* tpm_stream = fs.element_stream(tpm);
        if (!tpm_stream)
            continue;
        for (const auto& inv : fs.inventories) {
            for (const auto& lname : detail::loops_on_inventory(fs, inv)) {
                const auto* l = fs.find_loop(lname);
                const auto* mv_stream = fs.element_stream(l->mv);
                if (!mv_stream || mv_stream->name == tpm_stream->name)
                    continue; // driving the TPM element itself is not a crossing
                bool reaches_mv =
                    fs.connected_without(inv.unit, mv_stream->from, tpm_stream->name) ||
                    fs.connected_without(inv.unit, mv_stream->to, tpm_stream->name);
                if (!reaches_mv)
                    rep.flag(Severity::Violation, {lname, tpm},
                             "loop " + lname + " crosses the TPM " + tpm);
            }
        }
    }
    if (rep.severity == Severity::Pass)
        rep.message = "no inventory loop crosses a TPM";
    return rep;
}

/// Rule S1 decision: a constraint satisfied by a large input needs a
/// MAX-selector, one satisfied by a small input a MIN-selector.
inline SelectorKind infer_selector_kind(FlowsheetSpec::Bound bound, int gain_sign) {
    const bool satisfied_by_large =
        (bound == FlowsheetSpec::Bound::Max && gain_sign < 0) ||
        (bound == FlowsheetSpec::Bound::Min && gain_sign > 0);
    return satisfied_by_large ? SelectorKind::Max : SelectorKind::Min;
}

/// Rule S1 check over all selector inputs bound to constraint loops.
inline RuleReport check_s1(const FlowsheetSpec& fs) {
    RuleReport rep(RuleId::S1);
    for (const auto& sel : fs.selectors) {
        for (const auto& in : sel.inputs) {
            const auto* l = fs.find_loop(in);
            if (!l || l->bound == FlowsheetSpec::Bound::Setpoint)
                continue;
            SelectorKind want = infer_selector_kind(l->bound, l->sign);
            if (want != sel.kind && sel.kind != SelectorKind::Mid)
                rep.flag(Severity::Violation, {l->name, sel.mv},
                         "constraint " + l->name + " needs a " +
                             std::string(to_string(want)) + "-selector, found " +
                             to_string(sel.kind));
        }
    }
    if (rep.severity == Severity::Pass)
        rep.message = "selector kinds match their constraints";
    return rep;
}

/// Rules S2 and S3 on each MV's selector chain. S2: with both MIN and MAX
/// present and a potential conflict, the highest-priority constraint's
/// selector must be last. S3: the first selector should carry a desired
/// input; omitting it is a warning when the chain is all-MIN or all-MAX
/// (the MV's built-in limit supplies the fallback), a violation otherwise.
inline RuleReport check_s2_s3(const FlowsheetSpec& fs, RuleReport* s3_out) {
    RuleReport s2(RuleId::S2);
    RuleReport s3(RuleId::S3);
    std::set<std::string> mvs;
    for (const auto& sel : fs.selectors)
        mvs.insert(sel.mv);

    for (const auto& mv : mvs) {
        auto chain = fs.chain_for(mv);
        bool has_min = false, has_max = false;
        for (const auto* sel : chain) {
            has_min |= sel->kind == SelectorKind::Min;
            has_max |= sel->kind == SelectorKind::Max;
        }

        // S2: find the highest declared priority among constraint loops.
        if (has_min && has_max) {
            int best = 0;
            bool any = false;
            for (const auto* sel : chain)
                for (const auto& in : sel->inputs)
                    if (const auto* l = fs.find_loop(in);
                        l && l->bound != FlowsheetSpec::Bound::Setpoint) {
                        best = any ? std::max(best, l->priority) : l->priority;
                        any = true;
                    }
            if (any) {
                const auto* last = chain.back();
                bool last_has_best = false;
                for (const auto& in : last->inputs)
                    if (const auto* l = fs.find_loop(in);
                        l && l->bound != FlowsheetSpec::Bound::Setpoint &&
                        l->priority == best)
                        last_has_best = true;
                if (!last_has_best)
                    s2.flag(Severity::Violation, {mv},
                            "on " + mv +
                                " the highest-priority constraint is not at the"
                                " end of the selector sequence");
            }
        }

        // S3: desired input into the first selector.
        if (!chain.empty() && !chain.front()->has_desired_input) {
            bool uniform = !(has_min && has_max);
            if (uniform)
                s3.flag(Severity::Warning, {mv},
                        "chain on " + mv + " has no desired input; the built-in " +
                            (has_min ? std::string("u_max=100%")
                                     : std::string("u_min=0%")) +
                            " limit supplies the fallback");
            else
                s3.flag(Severity::Violation, {mv},
                        "mixed MIN/MAX chain on " + mv +
                            " has no desired input in its first selector");
        }
    }
    if (s2.severity == Severity::Pass)
        s2.message = "selector priorities are ordered";
    if (s3.severity == Severity::Pass)
        s3.message = "desired inputs present";
    if (s3_out)
        *s3_out = std::move(s3);
    return s2;
}

/// Run every rule once, in order.
inline std::vector<RuleReport> check_all(const FlowsheetSpec& fs) {
    std::vector<RuleReport> out;
    out.push_back(check_c1(fs));
    out.push_back(check_c2(fs));
    out.push_back(check_radiation(fs));
    out.push_back(check_c4(fs));
    out.push_back(check_s1(fs));
    RuleReport s3(RuleId::S3);
    out.push_back(check_s2_s3(fs, &s3));
    out.push_back(std::move(s3));
    return out;
}

inline bool any_violation(const std::vector<RuleReport>& reports) {
    return std::any_of(reports.begin(), reports.end(), [](const RuleReport& r) {
        return r.severity == Severity::Violation;
    });
}

/// Downgrade C3 violations to warnings. The radiation rule applies
/// "whenever possible"; this override acknowledges a deliberate exception.
inline void allow_nonradiating(std::vector<RuleReport>& reports) {
    for (auto& r : reports)
        if (r.rule == RuleId::C3 && r.severity == Severity::Violation) {
            r.severity = Severity::Warning;
            r.message += " (accepted by override)";
        }
}

} // namespace arc
