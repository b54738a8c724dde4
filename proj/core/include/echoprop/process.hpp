#pragma once

#include <cstdint>
#include <string>

#include "echoprop/system.hpp"
#include "echoprop/window.hpp"

namespace echoprop {

// A seeded generator of input windows. Entries are keyed by (seed, logical
// time), so the same process produces consistent values at a given time
// regardless of the horizons requested, and two calls with equal arguments
// return identical windows.
struct InputProcess {
    enum class Kind { Iid, Constant, ExplicitWindow, Observed };

    Kind kind = Kind::Iid;
    std::string id;
    int dim = 1;
    Vec lo, hi;          // iid bounds per component
    Vec value;           // constant value
    InputWindow literal; // explicit window
    // observed deterministic source: irrational rotation with identity
    // observation; entry(t) = anchor + t*rho mod 1
    double rho = 0.0;
    bool anchor_fixed = false;
    double anchor = 0.0;
    bool shift_invariant = true;
    std::uint64_t seed = 0;
};

InputWindow generate_window(const InputProcess& p, int past_horizon, int future_horizon);

// Accepted forms: "iid", "iid(lo,hi)", "constant", "constant(c...)",
// "observed_rotation(rho)", "observed_rotation(rho,anchor)". Bounds default
// to the system's declared input box.
InputProcess parse_process(const std::string& spec, const SystemSpec& sys, std::uint64_t seed);

InputProcess window_process(InputWindow literal, std::uint64_t seed);

InputProcess with_seed(InputProcess p, std::uint64_t seed);

} // namespace echoprop
