#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selector.hpp"

namespace arc {

/// Declarative description of a process flowsheet and its control
/// structure, for consistency and selector-rule checking.
///
/// Text schema (one directive per line, '#' comments):
///   flowsheet NAME
///   unit NAME source|sink|vessel|splitter|junction
///   stream NAME FROM -> TO [element NAME [compressor|valve|external]]
///   actuator NAME                      # non-flow MV (e.g. a heater)
///   inventory UNIT level|pressure
///   loop NAME cv UNIT.TAG (sp V | min V | max V) mv ELEMENT sign +|-
///        [priority N]
///   chain MV min|max|mid [u0 VALUE] INPUT...   # one selector per line,
///        later lines take the previous stage as their first input
///   tpm ELEMENT | tpm auto
struct FlowsheetSpec {
    enum class UnitKind { Source, Sink, Vessel, Splitter, Junction };
    enum class ElementKind { Valve, Compressor, External };
    enum class InventoryKind { Level, Pressure };
    enum class Bound { Setpoint, Min, Max };

    struct Unit {
        std::string name;
        UnitKind kind;
        bool operator==(const Unit&) const = default;
    };
    struct Stream {
        std::string name;
        std::string from;
        std::string to;
        std::string element; // empty if the stream has no flow-setting element
        ElementKind element_kind = ElementKind::Valve;
        bool operator==(const Stream&) const = default;
    };
    struct Inventory {
        std::string unit;
        InventoryKind kind;
        bool operator==(const Inventory&) const = default;
    };
    struct Loop {
        std::string name;
        std::string cv_unit;
        std::string cv_tag; // "pressure", "level", "temp", ...
        Bound bound = Bound::Setpoint;
        double value = 0.0;
        std::string mv; // element or actuator name
        int sign = -1;  // gain direction MV -> CV
        int priority = 0;
        bool operator==(const Loop&) const = default;
    };
    struct Selector {
        std::string mv;
        SelectorKind kind;
        std::vector<std::string> inputs; // loop names; "u0=<v>" for constants
        bool has_desired_input = false;
        bool chained = false; // takes the previous stage's output as well
        bool operator==(const Selector&) const = default;
    };

    std::string name;
    std::vector<Unit> units;
    std::vector<Stream> streams;
    std::vector<std::string> actuators;
    std::vector<Inventory> inventories;
    std::vector<Loop> loops;
    std::vector<Selector> selectors;
    std::string tpm; // element name, or "auto"

    bool operator==(const FlowsheetSpec&) const = default;

    const Unit* find_unit(const std::string& n) const {
        for (const auto& u : units)
            if (u.name == n)
                return &u;
        return nullptr;
    }
    const Stream* element_stream(const std::string& element) const {
        for (const auto& s : streams)
            if (s.element == element && !element.empty())
                return &s;
        return nullptr;
    }
    const Loop* find_loop(const std::string& n) const {
        for (const auto& l : loops)
            if (l.name == n)
                return &l;
        return nullptr;
    }
    bool is_actuator(const std::string& n) const {
        return std::find(actuators.begin(), actuators.end(), n) != actuators.end();
    }
    std::vector<const Selector*> chain_for(const std::string& mv) const {
        std::vector<const Selector*> out;
        for (const auto& s : selectors)
            if (s.mv == mv)
                out.push_back(&s);
        return out;
    }

    /// Directed reachability between units.
    bool reaches(const std::string& from, const std::string& to) const {
        if (from == to)
            return true;
        std::set<std::string> seen{from};
        std::vector<std::string> queue{from};
        while (!queue.empty()) {
            std::string u = queue.back();
            queue.pop_back();
            for (const auto& s : streams)
                if (s.from == u && seen.insert(s.to).second) {
                    if (s.to == to)
                        return true;
                    queue.push_back(s.to);
                }
        }
        return false;
    }

    /// Undirected connectivity ignoring one stream, used for "does this
    /// loop cross the TPM" checks.
    bool connected_without(const std::string& a, const std::string& b,
                           const std::string& skip_stream) const {
        if (a == b)
            return true;
        std::set<std::string> seen{a};
        std::vector<std::string> queue{a};
        while (!queue.empty()) {
            std::string u = queue.back();
            queue.pop_back();
            for (const auto& s : streams) {
                if (s.name == skip_stream)
                    continue;
                for (const auto& next : {s.from == u ? s.to : std::string(),
                                         s.to == u ? s.from : std::string()}) {
                    if (next.empty() || !seen.insert(next).second)
                        continue;
                    if (next == b)
                        return true;
                    queue.push_back(next);
                }
            }
        }
        return false;
    }
};

struct ParseDiagnostic {
    int line;
    int column;
    std::string message;
};

struct ParseResult {
    std::optional<FlowsheetSpec> spec;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return spec.has_value(); }
};

namespace detail {

struct FsToken {
    std::string text;
    int column;
};

inline std::vector<FsToken> fs_tokenize(const std::string& line) {
    std::vector<FsToken> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i >= line.size() || line[i] == '#')
            break;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

} // namespace detail

/// Parse the flowsheet description language. All diagnostics carry
/// line/column positions; the spec is returned only when it is fully
/// consistent (names resolve, arities hold).
inline ParseResult parse_flowsheet(std::istream& in) {
    using detail::FsToken;
    ParseResult res;
    FlowsheetSpec fs;
    std::vector<ParseDiagnostic>& diag = res.diagnostics;
    std::set<std::string> names; // units, elements, actuators, loops
    std::map<std::string, int> chain_count;

    int line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = detail::fs_tokenize(line);
        if (tok.empty())
            continue;
        auto fail = [&](int col, const std::string& msg) {
            diag.push_back({line_no, col, msg});
        };
        auto expect = [&](std::size_t n, const std::string& usage) {
            if (tok.size() < n) {
                fail(static_cast<int>(line.size()) + 1, "usage: " + usage);
                return false;
            }
            return true;
        };
        auto fresh = [&](const FsToken& t) {
            if (!names.insert(t.text).second) {
                fail(t.column, "duplicate name '" + t.text + "'");
                return false;
            }
            return true;
        };
        auto number = [&](const FsToken& t, double& out) {
            std::size_t pos = 0;
            try {
                out = std::stod(t.text, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != t.text.size()) {
                fail(t.column, "expected a number, got '" + t.text + "'");
                return false;
            }
            return true;
        };
        const std::string& kw = tok[0].text;

        if (kw == "flowsheet") {
            if (expect(2, "flowsheet NAME"))
                fs.name = tok[1].text;
        } else if (kw == "unit") {
            if (!expect(3, "unit NAME KIND"))
                continue;
            FlowsheetSpec::UnitKind k;
            const std::string& ks = tok[2].text;
            if (ks == "source") k = FlowsheetSpec::UnitKind::Source;
            else if (ks == "sink") k = FlowsheetSpec::UnitKind::Sink;
            else if (ks == "vessel") k = FlowsheetSpec::UnitKind::Vessel;
            else if (ks == "splitter") k = FlowsheetSpec::UnitKind::Splitter;
            else if (ks == "junction") k = FlowsheetSpec::UnitKind::Junction;
            else {
                fail(tok[2].column, "unknown unit kind '" + ks + "'");
                continue;
            }
            if (fresh(tok[1]))
                fs.units.push_back({tok[1].text, k});
        } else if (kw == "stream") {
            if (!expect(5, "stream NAME FROM -> TO [element NAME [KIND]]"))
                continue;
            if (tok[3].text != "->") {
                fail(tok[3].column, "expected '->'");
                continue;
            }
            FlowsheetSpec::Stream s;
            s.name = tok[1].text;
            s.from = tok[2].text;
            s.to = tok[4].text;
            if (!fs.find_unit(s.from))
                fail(tok[2].column, "dangling stream endpoint '" + s.from + "'");
            if (!fs.find_unit(s.to))
                fail(tok[4].column, "dangling stream endpoint '" + s.to + "'");
            if (tok.size() > 5) {
                if (tok[5].text != "element" || tok.size() < 7) {
                    fail(tok[5].column, "expected 'element NAME [KIND]'");
                    continue;
                }
                s.element = tok[6].text;
                if (tok.size() > 7) {
                    const std::string& ek = tok[7].text;
                    if (ek == "compressor")
                        s.element_kind = FlowsheetSpec::ElementKind::Compressor;
                    else if (ek == "external")
                        s.element_kind = FlowsheetSpec::ElementKind::External;
                    else if (ek != "valve") {
                        fail(tok[7].column, "unknown element kind '" + ek + "'");
                        continue;
                    }
                }
                if (!fresh(tok[6]))
                    continue;
            }
            if (fresh(tok[1]))
                fs.streams.push_back(std::move(s));
        } else if (kw == "actuator") {
            if (expect(2, "actuator NAME") && fresh(tok[1]))
                fs.actuators.push_back(tok[1].text);
        } else if (kw == "inventory") {
            if (!expect(3, "inventory UNIT level|pressure"))
                continue;
            if (!fs.find_unit(tok[1].text)) {
                fail(tok[1].column, "unknown unit '" + tok[1].text + "'");
                continue;
            }
            FlowsheetSpec::InventoryKind k;
            if (tok[2].text == "level") k = FlowsheetSpec::InventoryKind::Level;
            else if (tok[2].text == "pressure")
                k = FlowsheetSpec::InventoryKind::Pressure;
            else {
                fail(tok[2].column, "inventory kind must be level or pressure");
                continue;
            }
            fs.inventories.push_back({tok[1].text, k});
        } else if (kw == "loop") {
            if (!expect(2, "loop NAME cv U.TAG sp|min|max V mv MV sign +|-"))
                continue;
            FlowsheetSpec::Loop l;
            l.name = tok[1].text;
            bool ok = fresh(tok[1]);
            if ((tok.size() - 2) % 2 != 0) {
                fail(tok.back().column, "dangling loop key '" + tok.back().text + "'");
                ok = false;
            }
            bool have_cv = false, have_mv = false, have_sign = false;
            for (std::size_t i = 2; i + 1 < tok.size() && ok; i += 2) {
                const std::string& key = tok[i].text;
                const FsToken& val = tok[i + 1];
                if (key == "cv") {
                    auto dot = val.text.find('.');
                    if (dot == std::string::npos) {
                        fail(val.column, "cv must be UNIT.TAG");
                        ok = false;
                        break;
                    }
                    l.cv_unit = val.text.substr(0, dot);
                    l.cv_tag = val.text.substr(dot + 1);
                    if (!fs.find_unit(l.cv_unit)) {
                        fail(val.column, "unknown unit '" + l.cv_unit + "'");
                        ok = false;
                    }
                    have_cv = true;
                } else if (key == "sp" || key == "min" || key == "max") {
                    l.bound = key == "sp"    ? FlowsheetSpec::Bound::Setpoint
                              : key == "min" ? FlowsheetSpec::Bound::Min
                                             : FlowsheetSpec::Bound::Max;
                    if (!number(val, l.value)) ok = false;
                } else if (key == "mv") {
                    l.mv = val.text;
                    have_mv = true;
                } else if (key == "sign") {
                    if (val.text == "+") l.sign = 1;
                    else if (val.text == "-") l.sign = -1;
                    else {
                        fail(val.column, "sign must be + or -");
                        ok = false;
                    }
                    have_sign = true;
                } else if (key == "priority") {
                    double v;
                    if (!number(val, v)) ok = false;
                    l.priority = static_cast<int>(v);
                } else {
                    fail(tok[i].column, "unknown loop key '" + key + "'");
                    ok = false;
                }
            }
            if (!ok)
                continue;
            if (!have_cv || !have_mv || !have_sign) {
                fail(tok[0].column, "loop needs cv, mv and sign");
                continue;
            }
            if (!fs.element_stream(l.mv) && !fs.is_actuator(l.mv)) {
                fail(tok[0].column,
                     "loop " + l.name + ": unknown mv '" + l.mv + "'");
                continue;
            }
            fs.loops.push_back(std::move(l));
        } else if (kw == "chain") {
            if (!expect(4, "chain MV min|max|mid [u0 V] INPUT..."))
                continue;
            FlowsheetSpec::Selector sel;
            sel.mv = tok[1].text;
            if (!fs.element_stream(sel.mv) && !fs.is_actuator(sel.mv)) {
                fail(tok[1].column, "unknown mv '" + sel.mv + "'");
                continue;
            }
            const std::string& ks = tok[2].text;
            if (ks == "min") sel.kind = SelectorKind::Min;
            else if (ks == "max") sel.kind = SelectorKind::Max;
            else if (ks == "mid") sel.kind = SelectorKind::Mid;
            else {
                fail(tok[2].column, "selector kind must be min, max or mid");
                continue;
            }
            sel.chained = chain_count[sel.mv]++ > 0;
            bool ok = true;
            for (std::size_t i = 3; i < tok.size() && ok; ++i) {
                if (tok[i].text == "u0") {
                    if (i + 1 >= tok.size()) {
                        fail(tok[i].column, "u0 needs a value");
                        ok = false;
                        break;
                    }
                    double v;
                    if (!number(tok[i + 1], v)) {
                        ok = false;
                        break;
                    }
                    sel.inputs.push_back("u0=" + tok[i + 1].text);
                    sel.has_desired_input = true;
                    ++i;
                } else {
                    if (!fs.find_loop(tok[i].text)) {
                        fail(tok[i].column,
                             "unknown loop '" + tok[i].text + "' in chain");
                        ok = false;
                        break;
                    }
                    sel.inputs.push_back(tok[i].text);
                }
            }
            if (ok)
                fs.selectors.push_back(std::move(sel));
        } else if (kw == "tpm") {
            if (!expect(2, "tpm ELEMENT|auto"))
                continue;
            fs.tpm = tok[1].text;
            if (fs.tpm != "auto" && !fs.element_stream(fs.tpm))
                fail(tok[1].column, "tpm element '" + fs.tpm + "' not found");
        } else {
            fail(tok[0].column, "unknown directive '" + kw + "'");
        }
    }

    if (fs.units.empty())
        diag.push_back({line_no, 1, "no units declared"});
    if (diag.empty())
        res.spec = std::move(fs);
    return res;
}

inline ParseResult parse_flowsheet(const std::string& text) {
    std::istringstream in(text);
    return parse_flowsheet(in);
}

inline ParseResult load_flowsheet(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        ParseResult r;
        r.diagnostics.push_back({0, 0, "cannot open file " + path});
        return r;
    }
    return parse_flowsheet(f);
}

/// Canonical text form; parse(serialize(spec)) == spec.
inline std::string serialize_flowsheet(const FlowsheetSpec& fs) {
    std::ostringstream os;
    auto num = [](double v) {
        std::ostringstream s;
        s << v;
        return s.str();
    };
    os << "flowsheet " << fs.name << "\n\n";
    for (const auto& u : fs.units) {
        const char* k = u.kind == FlowsheetSpec::UnitKind::Source     ? "source"
                        : u.kind == FlowsheetSpec::UnitKind::Sink     ? "sink"
                        : u.kind == FlowsheetSpec::UnitKind::Vessel   ? "vessel"
                        : u.kind == FlowsheetSpec::UnitKind::Splitter ? "splitter"
                                                                      : "junction";
        os << "unit " << u.name << " " << k << "\n";
    }
    for (const auto& s : fs.streams) {
        os << "stream " << s.name << " " << s.from << " -> " << s.to;
        if (!s.element.empty()) {
            os << " element " << s.element;
            if (s.element_kind == FlowsheetSpec::ElementKind::Compressor)
                os << " compressor";
            else if (s.element_kind == FlowsheetSpec::ElementKind::External)
                os << " external";
        }
        os << "\n";
    }
    for (const auto& a : fs.actuators)
        os << "actuator " << a << "\n";
    for (const auto& i : fs.inventories)
        os << "inventory " << i.unit << " "
           << (i.kind == FlowsheetSpec::InventoryKind::Level ? "level" : "pressure")
           << "\n";
    for (const auto& l : fs.loops) {
        os << "loop " << l.name << " cv " << l.cv_unit << "." << l.cv_tag;
        os << (l.bound == FlowsheetSpec::Bound::Setpoint ? " sp "
               : l.bound == FlowsheetSpec::Bound::Min    ? " min "
                                                         : " max ")
           << num(l.value);
        os << " mv " << l.mv << " sign " << (l.sign > 0 ? "+" : "-");
        if (l.priority != 0)
            os << " priority " << l.priority;
        os << "\n";
    }
    for (const auto& s : fs.selectors) {
        os << "chain " << s.mv << " " << to_string(s.kind);
        for (const auto& in : s.inputs) {
            if (in.rfind("u0=", 0) == 0)
                os << " u0 " << in.substr(3);
            else
                os << " " << in;
        }
        os << "\n";
    }
    if (!fs.tpm.empty())
        os << "tpm " << fs.tpm << "\n";
    return os.str();
}

} // namespace arc
