#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "echoprop/window.hpp"

namespace echoprop {

struct StatePoint {
    Vec value;
};

enum class StateSpaceKind { Box, Circle };

// A driven state-space system: update map, state metric, samplers and the
// declared hypotheses the implication checker relies on. All callables are
// pure; a SystemSpec is immutable after construction and safe to share.
//
// Circle-valued systems do not store a bare angle. The squaring map drags
// every double in [0, 1) onto the fixed point within ~60 iterations because
// 1 - 2^-k is representable only up to k = 52, which would blind the testers
// to the very non-uniformity the circle system exists to exhibit. States are
// instead kept in one of two charts, value = {offset, branch}: the point is
// `offset` when branch = 0 and 1 - offset when branch = 1, with offset in
// [0, 1/2]. Near the glued point both sides then resolve offsets down to
// ~1e-308. The doubling system uses a third representation, k/q on a prime
// lattice (value = {k}), since doubling any dyadic double collapses to 0
// within ~60 exact halvings of the mantissa.
struct SystemSpec {
    std::string id;
    StateSpaceKind kind = StateSpaceKind::Box;
    int state_dim = 1; // stored vector length (charts use 2 slots)
    int input_dim = 1;
    Vec input_lo, input_hi;

    // hypotheses, declared per system rather than inferred
    bool state_compact = true;
    bool input_compact = true;
    bool input_metrizable = true;
    // f(., u) is onto the state set for every u, hence every state is
    // reachable; lets the input-forgetting testers reuse the full state pool
    bool reachable_full = false;
    bool hard_states_reachable = false;

    std::function<StatePoint(const StatePoint&, const InputPoint&)> step;
    std::function<double(const StatePoint&, const StatePoint&)> distance;
    std::function<bool(const StatePoint&)> contains;
    // deterministic in (seed, index)
    std::function<StatePoint(std::uint64_t, std::uint64_t)> sample_state;
    std::vector<StatePoint> hard_states;

    // optional closed forms
    std::function<StatePoint(const InputWindow&)> echo_oracle; // truncated at the window horizon
    std::optional<double> divergence_rate;                     // d_n <= rate^n * d_0
    bool divergence_rate_exact = false;

    std::function<nlohmann::json(const StatePoint&)> describe_state;
    nlohmann::json config_echo;
};

// Circle chart helpers (shared by the circle catalog systems and tests).
namespace circle {
StatePoint from_angle(double theta);        // theta in [0, 1)
double to_angle(const StatePoint& x);       // lossy near 1; display only
StatePoint hard_point(int k);               // the point 1 - 2^-k, exact
double distance(const StatePoint& a, const StatePoint& b);
bool valid(const StatePoint& x);
} // namespace circle

// Registered families:
//   affine(a,b)      f(x,u) = a*x + b*u on the invariant box |x| <= |b|/(1-|a|)
//   tanh_esn(s)      f(x,u) = tanh(W*x + Win*u), 16x16 seeded W, spectral norm s
//   circle_square    f(x,u) = g(x), g the squaring homeomorphism of the circle
//   rotation(alpha)  f(x,u) = x + alpha mod 1
//   doubling         f(x,u) = 2x mod 1 on the prime lattice
//   constant(c)      f(x,u) = c
SystemSpec catalog_get(const std::string& name);

// Structured-text config: {"family": ..., "params": [...]} plus optional
// overrides (dims, input bounds, flags, hard states, seed).
SystemSpec system_from_config(const nlohmann::json& config);

// Catalog name or path to a config file.
SystemSpec load_system(const std::string& name_or_path);

std::vector<std::pair<std::string, std::string>> catalog_entries();

nlohmann::json state_to_json(const SystemSpec& sys, const StatePoint& x);
StatePoint state_from_json(const nlohmann::json& j);

} // namespace echoprop
