#pragma once

#include <functional>
#include <vector>

#include "echoprop/errors.hpp"

namespace echoprop {

using Vec = std::vector<double>;

struct InputPoint {
    Vec value;
};

// Finite two-sided window of an input sequence.
//
// Entries live at logical times t = -B+1..0 (past, B entries) and t = 1..H
// (future, H entries). Every interface speaks logical time, never raw array
// offsets; the time-index bookkeeping of shifting and truncation is the main
// source of bugs in this domain, so it is kept in exactly one place.
class InputWindow {
public:
    InputWindow() = default;
    InputWindow(std::vector<InputPoint> past, std::vector<InputPoint> future)
        : past_(std::move(past)), future_(std::move(future)) {}

    int past_horizon() const { return static_cast<int>(past_.size()); }
    int future_horizon() const { return static_cast<int>(future_.size()); }

    bool has_entry(int t) const {
        return t > -past_horizon() && t <= future_horizon();
    }

    // Entry at logical time t; throws HorizonError outside [-B+1, H].
    const InputPoint& entry(int t) const;

    const std::vector<InputPoint>& past() const { return past_; }
    const std::vector<InputPoint>& future() const { return future_; }

private:
    std::vector<InputPoint> past_;   // times -B+1..0
    std::vector<InputPoint> future_; // times 1..H
};

// Re-indexing shift: entry(shift_window(w, k), t) == entry(w, t + k) for all
// surviving t. Positive k absorbs future entries into the past (left shift),
// negative k pushes past entries into the future (right shift). No entry is
// ever fabricated or dropped; the horizons rebalance to B+k and H-k, which
// pins the valid range to -B <= k <= H.
InputWindow shift_window(const InputWindow& w, int k);

// Drops the future half; idempotent.
InputWindow truncate_past(const InputWindow& w);

// Splices the most recent n entries of `recent` onto the whole past of
// `older`, whose time-0 entry lands at time -n. Both windows must be
// past-only and `recent` must hold at least n entries.
InputWindow concat_gamma(int n, const InputWindow& older, const InputWindow& recent);

using InputMetric = std::function<double(const InputPoint&, const InputPoint&)>;

double euclidean_distance(const InputPoint& a, const InputPoint& b);

// Product-topology metric on past-only windows of equal horizon:
//   sup over t = -B+1..0 of 2^t * min(1, d_U(w1_t, w2_t)).
// The neglected tail at t <= -B is bounded by product_distance_tail_bound(B).
double product_distance(const InputWindow& w1, const InputWindow& w2,
                        const InputMetric& input_metric);
double product_distance(const InputWindow& w1, const InputWindow& w2);

double product_distance_tail_bound(int past_horizon);

} // namespace echoprop
