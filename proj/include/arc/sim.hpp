#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"

namespace arc {

/// Transport delay as a ring buffer of past samples. Before the buffer has
/// filled, the initial fill value is returned, so a warm-started loop sees
/// a constant history.
class DelayLine {
  public:
    DelayLine(double delay_s, double dt, double initial_fill) {
        if (delay_s < 0.0)
            throw std::invalid_argument("delay must be >= 0");
        const double steps = delay_s / dt;
        n_ = static_cast<std::size_t>(std::llround(steps));
        if (std::fabs(steps - static_cast<double>(n_)) > 1e-9)
            throw std::invalid_argument("delay must be an integer multiple of dt");
        buffer_.assign(n_, initial_fill);
    }

    /// Push the current sample, return the one from delay seconds ago.
    double step(double input) {
        if (n_ == 0)
            return input;
        double out = buffer_[head_];
        buffer_[head_] = input;
        head_ = (head_ + 1) % n_;
        return out;
    }

    std::size_t steps() const { return n_; }

  private:
    std::vector<double> buffer_;
    std::size_t n_ = 0;
    std::size_t head_ = 0;
};

/// Piecewise-constant signal: value i holds on [breakpoints[i],
/// breakpoints[i+1]). The first breakpoint must be 0.
struct PiecewiseProfile {
    std::vector<double> breakpoints;
    std::vector<double> values;

    void validate() const {
        if (values.empty() || breakpoints.size() != values.size())
            throw std::invalid_argument("profile: breakpoints/values mismatch");
        if (breakpoints.front() != 0.0)
            throw std::invalid_argument("profile must start at t=0");
        for (std::size_t i = 1; i < breakpoints.size(); ++i)
            if (!(breakpoints[i] > breakpoints[i - 1]))
                throw std::invalid_argument(
                    "profile breakpoints must be strictly increasing");
    }

    double at(double t) const {
        std::size_t i = breakpoints.size();
        while (i > 0 && breakpoints[i - 1] > t)
            --i;
        return values[i == 0 ? 0 : i - 1];
    }

    static PiecewiseProfile constant(double v) { return {{0.0}, {v}}; }
};

/// One level per fixed-length segment.
inline PiecewiseProfile staircase_profile(const std::vector<double>& levels,
                                          double segment_s = 4000.0) {
    if (levels.empty())
        throw std::invalid_argument("staircase needs at least one level");
    if (!(segment_s > 0.0))
        throw std::invalid_argument("segment length must be > 0");
    PiecewiseProfile p;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        p.breakpoints.push_back(segment_s * static_cast<double>(i));
        p.values.push_back(levels[i]);
    }
    return p;
}

/// The outdoor-temperature staircase used by the barn study: down to -40,
/// back up to 15, and home to 0, one level per 4000 s.
inline std::vector<double> default_cow_staircase() {
    return {0,   -2.5, -5, -10, -20, -30, -40, -30, -20,
            -10, -5,   0,  5,   10,  15,  10,  5,   0};
}

struct RunConfig {
    double dt = 1.0;
    double t_end = 0.0;
    double log_interval = 10.0;
    double stats_window = 1000.0; // terminal window per segment
    bool rk4 = false;
    bool record_candidates = false; // add cand:<controller> channels
    std::map<std::string, double> delays; // measurement channel -> seconds
    std::map<std::string, PiecewiseProfile> disturbances;
};

struct Event {
    double t;
    std::string mv;
    std::string from; // empty on the initial record
    std::string to;
};

struct SegmentStats {
    double t_begin;
    double t_end;
    std::map<std::string, double> disturbance; // values during the segment
    std::map<std::string, double> mean;        // over the terminal window
    std::map<std::string, double> p2p;         // peak-to-peak, same window
    std::map<std::string, double> final_value;
    std::map<std::string, std::string> winner; // per MV at segment end
};

struct RunResult {
    std::vector<std::string> channel_names; // t excluded
    std::vector<double> time;
    std::vector<std::vector<double>> columns; // one per channel
    std::vector<Event> events;
    std::vector<SegmentStats> segments;

    const std::vector<double>& channel(const std::string& name) const {
        for (std::size_t i = 0; i < channel_names.size(); ++i)
            if (channel_names[i] == name)
                return columns[i];
        throw std::invalid_argument("no channel named " + name);
    }

    /// Winner of the given MV at each logged time, reconstructed from the
    /// event log.
    std::vector<std::string> winner_series(const std::string& mv) const {
        std::vector<std::string> out(time.size());
        std::string current;
        std::size_t ev = 0;
        for (std::size_t i = 0; i < time.size(); ++i) {
            while (ev < events.size() && events[ev].t <= time[i]) {
                if (events[ev].mv == mv)
                    current = events[ev].to;
                ++ev;
            }
            out[i] = current;
        }
        return out;
    }
};

/// Fixed-step closed-loop simulation. Scan order per step: sample delayed
/// measurements, evaluate the control graph (propose/select/commit), apply
/// the MVs over the step, integrate the plant. Disturbance channels are
/// visible to the graph (external inputs) and to the plant.
template <typename Plant>
RunResult run(Plant& plant, ControlGraph& graph, const RunConfig& cfg) {
    if (!(cfg.dt > 0.0))
        throw std::invalid_argument("dt must be > 0");
    for (const auto& [name, prof] : cfg.disturbances)
        prof.validate();

    const std::size_t n_steps =
        static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
    const std::size_t log_every = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.log_interval / cfg.dt)));

    auto initial_outputs = plant.outputs();
    for (const auto& mv : Plant::mv_names())
        if (!graph.mv_bindings().count(mv))
            throw std::invalid_argument("plant MV '" + mv +
                                        "' is not driven by the control graph");
    std::map<std::string, DelayLine> delay_lines;
    for (const auto& [ch, d] : cfg.delays) {
        if (!initial_outputs.count(ch))
            throw std::invalid_argument("delay on unknown channel " + ch);
        delay_lines.emplace(ch, DelayLine(d, cfg.dt, initial_outputs.at(ch)));
    }

    RunResult res;
    for (const auto& [ch, _] : initial_outputs)
        res.channel_names.push_back(ch);
    for (const auto& mv : Plant::mv_names())
        res.channel_names.push_back(mv);
    if (cfg.record_candidates)
        for (const auto& [name, _] : graph.controllers())
            res.channel_names.push_back("cand:" + name);
    res.columns.assign(res.channel_names.size(), {});

    std::map<std::string, std::string> last_winner;
    std::map<std::string, double> mvs;
    std::map<std::string, std::string> winners;
    std::map<std::string, double> candidates;

    auto log_row = [&](double t, const std::map<std::string, double>& outputs) {
        res.time.push_back(t);
        std::size_t k = 0;
        for (const auto& [ch, v] : outputs)
            res.columns[k++].push_back(v);
        for (const auto& mv : Plant::mv_names())
            res.columns[k++].push_back(mvs.count(mv) ? mvs.at(mv) : 0.0);
        if (cfg.record_candidates)
            for (const auto& [name, v] : candidates)
                res.columns[k++].push_back(v);
    };

    for (std::size_t step = 0; step <= n_steps; ++step) {
        const double t = static_cast<double>(step) * cfg.dt;
        auto outputs = plant.outputs();
        for (const auto& [ch, v] : outputs)
            if (!std::isfinite(v))
                throw std::runtime_error("non-finite plant output '" + ch +
                                         "' at t=" + std::to_string(t));

        std::map<std::string, double> channels;
        for (const auto& [ch, v] : outputs) {
            auto it = delay_lines.find(ch);
            channels[ch] = it == delay_lines.end() ? v : it->second.step(v);
        }
        std::map<std::string, double> dist;
        for (const auto& [name, prof] : cfg.disturbances) {
            dist[name] = prof.at(t);
            channels[name] = dist[name];
        }

        auto scan = graph.evaluate(channels, cfg.dt);
        mvs = scan.mv_values;
        winners = scan.winners;
        if (cfg.record_candidates)
            candidates = scan.candidates;

        for (const auto& [mv, w] : winners) {
            auto it = last_winner.find(mv);
            if (it == last_winner.end())
                res.events.push_back({t, mv, "", w});
            else if (it->second != w)
                res.events.push_back({t, mv, it->second, w});
            last_winner[mv] = w;
        }
        if (step % log_every == 0 || step == n_steps)
            log_row(t, outputs);
        if (step == n_steps)
            break;
        plant.advance(mvs, dist, cfg.dt, cfg.rk4);
    }

    // Per-segment terminal statistics, segment edges from the disturbance
    // breakpoints.
    std::vector<double> edges{0.0};
    for (const auto& [name, prof] : cfg.disturbances)
        for (double b : prof.breakpoints)
            if (b > 0.0 && b < cfg.t_end)
                edges.push_back(b);
    edges.push_back(cfg.t_end);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        SegmentStats st;
        st.t_begin = edges[s];
        st.t_end = edges[s + 1];
        for (const auto& [name, prof] : cfg.disturbances)
            st.disturbance[name] = prof.at(st.t_begin);
        const double w_begin = std::max(st.t_begin, st.t_end - cfg.stats_window);
        for (std::size_t c = 0; c < res.channel_names.size(); ++c) {
            double lo = 1e300, hi = -1e300, sum = 0.0, fin = 0.0;
            std::size_t n = 0;
            for (std::size_t i = 0; i < res.time.size(); ++i) {
                if (res.time[i] < w_begin || res.time[i] > st.t_end)
                    continue;
                double v = res.columns[c][i];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
                fin = v;
                ++n;
            }
            if (n == 0)
                continue;
            st.mean[res.channel_names[c]] = sum / static_cast<double>(n);
            st.p2p[res.channel_names[c]] = hi - lo;
            st.final_value[res.channel_names[c]] = fin;
        }
        // winner in force at the end of the segment
        for (const auto& ev : res.events)
            if (ev.t <= st.t_end)
                st.winner[ev.mv] = ev.to;
            else
                break;
        res.segments.push_back(std::move(st));
    }
    return res;
}

} // namespace arc
