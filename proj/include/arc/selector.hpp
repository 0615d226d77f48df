#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace arc {

enum class SelectorKind { Min, Max, Mid };

inline const char* to_string(SelectorKind k) {
    switch (k) {
    case SelectorKind::Min: return "min";
    case SelectorKind::Max: return "max";
    case SelectorKind::Mid: return "mid";
    }
    return "?";
}

struct SelectorResult {
    double value;
    std::size_t winner; // index into the candidate list, ties -> lowest
};

/// Pick one candidate according to the selector kind. The output is always
/// exactly one of the inputs; MID takes the median of exactly three.
inline SelectorResult select(SelectorKind kind, std::span<const double> candidates) {
    if (kind == SelectorKind::Mid) {
        if (candidates.size() != 3)
            throw std::invalid_argument("mid selector requires exactly 3 inputs");
    } else if (candidates.size() < 2) {
        throw std::invalid_argument("min/max selector requires >= 2 inputs");
    }
    for (double c : candidates)
        if (!std::isfinite(c))
            throw std::invalid_argument("non-finite selector input");

    if (kind == SelectorKind::Mid) {
        double a = candidates[0], b = candidates[1], c = candidates[2];
        double median = std::max(std::min(a, b), std::min(std::max(a, b), c));
        for (std::size_t i = 0; i < 3; ++i)
            if (candidates[i] == median)
                return {median, i}; // ties resolve to the lowest index
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        bool better = kind == SelectorKind::Min ? candidates[i] < candidates[best]
                                                : candidates[i] > candidates[best];
        if (better) best = i;
    }
    return {candidates[best], best};
}

} // namespace arc
