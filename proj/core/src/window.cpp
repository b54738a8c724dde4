#include "echoprop/window.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace echoprop {

const InputPoint& InputWindow::entry(int t) const {
    if (!has_entry(t)) {
        throw HorizonError("window entry at t=" + std::to_string(t) +
                           " outside [-" + std::to_string(past_horizon() - 1) + "+1.." +
                           std::to_string(future_horizon()) + "]");
    }
    if (t <= 0) {
        return past_[static_cast<std::size_t>(t + past_horizon() - 1)];
    }
    return future_[static_cast<std::size_t>(t - 1)];
}

InputWindow shift_window(const InputWindow& w, int k) {
    const int b = w.past_horizon();
    const int h = w.future_horizon();
    if (k < -b || k > h) {
        throw HorizonError("shift by k=" + std::to_string(k) +
                           " demands entries outside the window (B=" + std::to_string(b) +
                           ", H=" + std::to_string(h) + ")");
    }
    const int b_new = b + k;
    const int h_new = h - k;
    std::vector<InputPoint> past;
    past.reserve(static_cast<std::size_t>(b_new));
    for (int t = -b_new + 1; t <= 0; ++t) {
        past.push_back(w.entry(t + k));
    }
    std::vector<InputPoint> future;
    future.reserve(static_cast<std::size_t>(h_new));
    for (int t = 1; t <= h_new; ++t) {
        future.push_back(w.entry(t + k));
    }
    return InputWindow(std::move(past), std::move(future));
}

InputWindow truncate_past(const InputWindow& w) {
    return InputWindow(w.past(), {});
}

InputWindow concat_gamma(int n, const InputWindow& older, const InputWindow& recent) {
    if (n <= 0) {
        throw HorizonError("concat_gamma requires n >= 1, got n=" + std::to_string(n));
    }
    if (older.future_horizon() != 0 || recent.future_horizon() != 0) {
        throw HorizonError("concat_gamma requires past-only windows");
    }
    if (recent.past_horizon() < n) {
        throw HorizonError("concat_gamma: recent window holds " +
                           std::to_string(recent.past_horizon()) +
                           " entries, needs at least n=" + std::to_string(n));
    }
    std::vector<InputPoint> past;
    past.reserve(static_cast<std::size_t>(n + older.past_horizon()));
    // times -n-B_old+1 .. -n come from `older`, re-anchored so its time 0
    // lands at time -n
    for (int t = -older.past_horizon() + 1; t <= 0; ++t) {
        past.push_back(older.entry(t));
    }
    // times -n+1 .. 0 come from `recent` unchanged
    for (int t = -n + 1; t <= 0; ++t) {
        past.push_back(recent.entry(t));
    }
    return InputWindow(std::move(past), {});
}

double euclidean_distance(const InputPoint& a, const InputPoint& b) {
    if (a.value.size() != b.value.size()) {
        throw ConfigError("input points of mismatched dimension");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.value.size(); ++i) {
        const double d = a.value[i] - b.value[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double product_distance(const InputWindow& w1, const InputWindow& w2,
                        const InputMetric& input_metric) {
    if (w1.future_horizon() != 0 || w2.future_horizon() != 0) {
        throw HorizonError("product_distance requires past-only windows");
    }
    if (w1.past_horizon() != w2.past_horizon()) {
        throw HorizonError("product_distance: past horizons differ (" +
                           std::to_string(w1.past_horizon()) + " vs " +
                           std::to_string(w2.past_horizon()) + ")");
    }
    double sup = 0.0;
    for (int t = -w1.past_horizon() + 1; t <= 0; ++t) {
        const double d = std::min(1.0, input_metric(w1.entry(t), w2.entry(t)));
        sup = std::max(sup, std::exp2(static_cast<double>(t)) * d);
    }
    return sup;
}

double product_distance(const InputWindow& w1, const InputWindow& w2) {
    return product_distance(w1, w2, euclidean_distance);
}

double product_distance_tail_bound(int past_horizon) {
    return std::exp2(static_cast<double>(1 - past_horizon));
}

} // namespace echoprop
