#include "echoprop/flows.hpp"

#include <algorithm>

#include "echoprop/rng.hpp"

namespace echoprop {

StatePoint forward_flow(const SystemSpec& sys, const StatePoint& x, const InputWindow& w, int n) {
    if (n < 1) {
        throw HorizonError("forward_flow requires n >= 1");
    }
    if (w.future_horizon() < n) {
        throw HorizonError("forward_flow: window future horizon " +
                           std::to_string(w.future_horizon()) + " < n=" + std::to_string(n));
    }
    StatePoint s = x;
    for (int t = 1; t <= n; ++t) {
        s = sys.step(s, w.entry(t));
    }
    return s;
}

StatePoint pullback_flow(const SystemSpec& sys, const StatePoint& x, const InputWindow& w, int n) {
    if (n < 1) {
        throw HorizonError("pullback_flow requires n >= 1");
    }
    if (w.past_horizon() < n) {
        throw HorizonError("pullback_flow: window past horizon " +
                           std::to_string(w.past_horizon()) + " < n=" + std::to_string(n));
    }
    StatePoint s = x;
    for (int t = -n + 1; t <= 0; ++t) {
        s = sys.step(s, w.entry(t));
    }
    return s;
}

ExtendedPoint extended_step(const SystemSpec& sys, const ExtendedPoint& p) {
    if (p.trajectory.empty()) {
        throw HorizonError("extended_step requires a nonempty state trajectory");
    }
    if (p.window.future_horizon() < 1) {
        throw HorizonError("extended_step: window has no future entry to consume");
    }
    ExtendedPoint next;
    next.trajectory = p.trajectory;
    next.trajectory.push_back(sys.step(p.trajectory.back(), p.window.entry(1)));
    next.window = shift_window(p.window, 1);
    return next;
}

EchoStateEstimate estimate_echo_state(const SystemSpec& sys, const InputWindow& w, int depth,
                                      int sample_count, double tol, std::uint64_t seed,
                                      bool include_hard_states) {
    if (w.past_horizon() < depth) {
        throw HorizonError("estimate_echo_state: window past horizon " +
                           std::to_string(w.past_horizon()) + " < depth " + std::to_string(depth));
    }
    std::vector<StatePoint> images;
    images.reserve(static_cast<std::size_t>(sample_count) +
                   (include_hard_states ? sys.hard_states.size() : 0));
    for (int i = 0; i < sample_count; ++i) {
        images.push_back(pullback_flow(sys, sys.sample_state(seed, static_cast<std::uint64_t>(i)),
                                       w, depth));
    }
    if (include_hard_states) {
        for (const auto& h : sys.hard_states) {
            images.push_back(pullback_flow(sys, h, w, depth));
        }
    }
    EchoStateEstimate est;
    est.state = images.front();
    est.residual = set_diameter(sys, images, DiameterPolicy{512, 4096, seed});
    est.n_used = depth;
    est.converged = est.residual < tol;
    return est;
}

std::vector<ReachableSample> sample_reachable(const SystemSpec& sys, const InputProcess& proc,
                                              int burn_in, int count) {
    if (burn_in < 1) {
        throw HorizonError("sample_reachable requires burn_in >= 1");
    }
    std::vector<ReachableSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        ReachableSample r;
        r.state_index = static_cast<std::uint64_t>(i);
        r.window_seed = mix64(proc.seed, stream::reachable, r.state_index);
        const InputWindow w = generate_window(with_seed(proc, r.window_seed), burn_in, 0);
        r.state = pullback_flow(sys, sys.sample_state(proc.seed, r.state_index), w, burn_in);
        out.push_back(std::move(r));
    }
    return out;
}

double set_diameter(const SystemSpec& sys, const std::vector<StatePoint>& points,
                    const DiameterPolicy& policy) {
    const std::size_t m = points.size();
    if (m < 2) return 0.0;
    double diam = 0.0;
    if (m <= policy.exact_limit) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                diam = std::max(diam, sys.distance(points[i], points[j]));
            }
        }
        return diam;
    }
    // seeded random-pair lower estimate; anchor every point against the first
    // one so no point is silently ignored
    for (std::size_t i = 1; i < m; ++i) {
        diam = std::max(diam, sys.distance(points[0], points[i]));
    }
    for (std::size_t k = 0; k < policy.estimate_pairs; ++k) {
        const std::size_t i = mix64(policy.seed, stream::diameter, 2 * k) % m;
        const std::size_t j = mix64(policy.seed, stream::diameter, 2 * k + 1) % m;
        if (i != j) {
            diam = std::max(diam, sys.distance(points[i], points[j]));
        }
    }
    return diam;
}

double pullback_image_diameter(const SystemSpec& sys, const InputWindow& w, int n,
                               const std::vector<StatePoint>& samples,
                               const DiameterPolicy& policy) {
    if (n == 0) {
        return set_diameter(sys, samples, policy);
    }
    std::vector<StatePoint> images;
    images.reserve(samples.size());
    for (const auto& x : samples) {
        images.push_back(pullback_flow(sys, x, w, n));
    }
    return set_diameter(sys, images, policy);
}

TrajectoryPair divergence_curve(const SystemSpec& sys, const StatePoint& x, const StatePoint& y,
                                const InputWindow& w, int n_max, FlowDirection direction) {
    TrajectoryPair tp;
    tp.d.reserve(static_cast<std::size_t>(n_max) + 1);
    tp.d.push_back(sys.distance(x, y));
    if (direction == FlowDirection::Forward) {
        StatePoint a = x;
        StatePoint b = y;
        for (int n = 1; n <= n_max; ++n) {
            a = sys.step(a, w.entry(n));
            b = sys.step(b, w.entry(n));
            tp.d.push_back(sys.distance(a, b));
        }
    } else {
        for (int n = 1; n <= n_max; ++n) {
            tp.d.push_back(sys.distance(pullback_flow(sys, x, w, n), pullback_flow(sys, y, w, n)));
        }
    }
    tp.meta.system_id = sys.id;
    tp.meta.initial_states = nlohmann::json::array({state_to_json(sys, x), state_to_json(sys, y)});
    return tp;
}

} // namespace echoprop
