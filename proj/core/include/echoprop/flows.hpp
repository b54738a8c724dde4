#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echoprop/process.hpp"
#include "echoprop/system.hpp"
#include "echoprop/window.hpp"

namespace echoprop {

// n-fold iteration of the state map along the window's future entries:
// reads inputs at times 1..n starting from x. Throws HorizonError if the
// window holds fewer than n future entries.
StatePoint forward_flow(const SystemSpec& sys, const StatePoint& x, const InputWindow& w, int n);

// Same iteration started n steps in the past: reads inputs at times
// -n+1..0 and lands at time 0. Equals forward_flow on shift_window(w, -n).
StatePoint pullback_flow(const SystemSpec& sys, const StatePoint& x, const InputWindow& w, int n);

// One step of the extended autonomous map on (state trajectory, input
// window): appends f(x_0, u_1) to the trajectory and left-shifts the window.
struct ExtendedPoint {
    std::vector<StatePoint> trajectory; // times -m..0, most recent last
    InputWindow window;
};
ExtendedPoint extended_step(const SystemSpec& sys, const ExtendedPoint& p);

// Pullback estimate of the induced functional at one input window: pull a
// state sample (sampler plus hard states) back `depth` steps; the image of
// the first sample is the representative, the image set's diameter is the
// residual. The representative is a set member rather than a mean because
// circle-valued state sets are not convex.
struct EchoStateEstimate {
    StatePoint state;
    double residual = 0.0;
    int n_used = 0;
    bool converged = false;
};
EchoStateEstimate estimate_echo_state(const SystemSpec& sys, const InputWindow& w, int depth,
                                      int sample_count, double tol, std::uint64_t seed,
                                      bool include_hard_states = true);

// Approximate reachable states: pull seeded samples back through burn_in
// past inputs. Each output records its replay keys.
struct ReachableSample {
    StatePoint state;
    std::uint64_t state_index = 0;
    std::uint64_t window_seed = 0;
};
std::vector<ReachableSample> sample_reachable(const SystemSpec& sys, const InputProcess& proc,
                                              int burn_in, int count);

// Max pairwise distance of a state set: exact for up to 512 points, a
// seeded random-pair lower estimate above that.
struct DiameterPolicy {
    std::size_t exact_limit = 512;
    std::size_t estimate_pairs = 4096;
    std::uint64_t seed = 0;
};
double set_diameter(const SystemSpec& sys, const std::vector<StatePoint>& points,
                    const DiameterPolicy& policy = {});

// Diameter of the pullback image of `samples` after n steps; n = 0 measures
// the raw sample set.
double pullback_image_diameter(const SystemSpec& sys, const InputWindow& w, int n,
                               const std::vector<StatePoint>& samples,
                               const DiameterPolicy& policy = {});

// d_n = d(psi_n(x, .), psi_n(x', .)) for n = 0..n_max; Forward reads future
// entries, Pullback reads past entries (the shifted-input form).
enum class FlowDirection { Forward, Pullback };
struct TrajectoryMeta {
    std::string system_id;
    std::uint64_t window_seed = 0;
    nlohmann::json initial_states;
};
struct TrajectoryPair {
    std::vector<double> d; // d[n], n = 0..n_max
    TrajectoryMeta meta;
};
TrajectoryPair divergence_curve(const SystemSpec& sys, const StatePoint& x, const StatePoint& y,
                                const InputWindow& w, int n_max, FlowDirection direction);

} // namespace echoprop
