#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sim.hpp"

namespace arc {

/// Trajectory CSV: header "t,<channels...>", one row per logged step.
inline void write_trajectory_csv(std::ostream& os, const RunResult& r) {
    os << "t";
    for (const auto& ch : r.channel_names)
        os << "," << ch;
    os << "\n";
    os << std::setprecision(10);
    for (std::size_t i = 0; i < r.time.size(); ++i) {
        os << r.time[i];
        for (const auto& col : r.columns)
            os << "," << col[i];
        os << "\n";
    }
}

/// Event CSV: header "t,mv,winner", one row per winner transition (the
/// first row per MV records the initial winner).
inline void write_events_csv(std::ostream& os, const RunResult& r) {
    os << "t,mv,winner\n";
    os << std::setprecision(10);
    for (const auto& ev : r.events)
        os << ev.t << "," << ev.mv << "," << ev.to << "\n";
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << content;
}

} // namespace arc
