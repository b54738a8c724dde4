#include "echoprop/process.hpp"

#include <cmath>
#include <sstream>

#include "echoprop/rng.hpp"

namespace echoprop {

namespace {

InputPoint iid_entry(const InputProcess& p, int t) {
    InputPoint u;
    u.value.resize(static_cast<std::size_t>(p.dim));
    for (int c = 0; c < p.dim; ++c) {
        const std::uint64_t h = mix64(p.seed, stream::window,
                                      static_cast<std::uint64_t>(static_cast<std::int64_t>(t)),
                                      static_cast<std::uint64_t>(c));
        u.value[static_cast<std::size_t>(c)] =
            uniform_in(h, p.lo[static_cast<std::size_t>(c)], p.hi[static_cast<std::size_t>(c)]);
    }
    return u;
}

double frac(double x) {
    return x - std::floor(x);
}

InputPoint observed_entry(const InputProcess& p, int t) {
    const double anchor = p.anchor_fixed
                              ? p.anchor
                              : u01(mix64(p.seed, stream::observed_anchor));
    return InputPoint{{frac(anchor + static_cast<double>(t) * p.rho)}};
}

} // namespace

InputWindow generate_window(const InputProcess& p, int past_horizon, int future_horizon) {
    if (past_horizon < 0 || future_horizon < 0) {
        throw HorizonError("window horizons must be nonnegative");
    }
    auto entry_at = [&](int t) -> InputPoint {
        switch (p.kind) {
            case InputProcess::Kind::Iid:
                return iid_entry(p, t);
            case InputProcess::Kind::Constant:
                return InputPoint{p.value};
            case InputProcess::Kind::ExplicitWindow:
                if (!p.literal.has_entry(t)) {
                    throw HorizonError("explicit window has no entry at t=" + std::to_string(t));
                }
                return p.literal.entry(t);
            case InputProcess::Kind::Observed:
                return observed_entry(p, t);
        }
        throw InternalError("unhandled process kind");
    };
    std::vector<InputPoint> past;
    past.reserve(static_cast<std::size_t>(past_horizon));
    for (int t = -past_horizon + 1; t <= 0; ++t) past.push_back(entry_at(t));
    std::vector<InputPoint> future;
    future.reserve(static_cast<std::size_t>(future_horizon));
    for (int t = 1; t <= future_horizon; ++t) future.push_back(entry_at(t));
    return InputWindow(std::move(past), std::move(future));
}

InputProcess parse_process(const std::string& spec, const SystemSpec& sys, std::uint64_t seed) {
    std::string trimmed;
    for (char c : spec) {
        if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
    }
    std::string name = trimmed;
    std::vector<double> params;
    if (const auto open = trimmed.find('('); open != std::string::npos) {
        if (trimmed.back() != ')') {
            throw ConfigError("malformed process spec: " + spec);
        }
        name = trimmed.substr(0, open);
        std::stringstream ss(trimmed.substr(open + 1, trimmed.size() - open - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                params.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("bad numeric parameter '" + item + "' in process " + spec);
            }
        }
    }

    InputProcess p;
    p.id = trimmed;
    p.dim = sys.input_dim;
    p.seed = seed;
    if (name == "iid") {
        p.kind = InputProcess::Kind::Iid;
        p.shift_invariant = true;
        if (params.empty()) {
            p.lo = sys.input_lo;
            p.hi = sys.input_hi;
        } else if (params.size() == 2) {
            p.lo.assign(static_cast<std::size_t>(p.dim), params[0]);
            p.hi.assign(static_cast<std::size_t>(p.dim), params[1]);
        } else {
            throw ConfigError("iid takes 0 or 2 parameters");
        }
        if (p.lo.size() != p.hi.size()) throw ConfigError("iid bounds mismatch");
        for (std::size_t i = 0; i < p.lo.size(); ++i) {
            if (!(p.lo[i] <= p.hi[i])) throw ConfigError("iid bounds must satisfy lo <= hi");
        }
        return p;
    }
    if (name == "constant") {
        p.kind = InputProcess::Kind::Constant;
        p.shift_invariant = true;
        if (params.empty()) {
            p.value.assign(static_cast<std::size_t>(p.dim), 0.0);
        } else if (static_cast<int>(params.size()) == p.dim) {
            p.value = params;
        } else if (params.size() == 1) {
            p.value.assign(static_cast<std::size_t>(p.dim), params[0]);
        } else {
            throw ConfigError("constant takes 0, 1, or input_dim parameters");
        }
        return p;
    }
    if (name == "observed_rotation") {
        if (sys.input_dim != 1) {
            throw ConfigError("observed_rotation produces scalar inputs");
        }
        if (params.empty() || params.size() > 2) {
            throw ConfigError("observed_rotation takes 1 or 2 parameters");
        }
        p.kind = InputProcess::Kind::Observed;
        p.shift_invariant = true; // the orbit set is shift-invariant
        p.rho = params[0];
        if (params.size() == 2) {
            p.anchor_fixed = true;
            p.anchor = frac(params[1]);
        }
        return p;
    }
    throw ConfigError("unknown process '" + name + "'");
}

InputProcess window_process(InputWindow literal, std::uint64_t seed) {
    InputProcess p;
    p.kind = InputProcess::Kind::ExplicitWindow;
    p.id = "explicit-window";
    p.dim = literal.past_horizon() > 0
                ? static_cast<int>(literal.entry(0).value.size())
                : (literal.future_horizon() > 0
                       ? static_cast<int>(literal.entry(1).value.size())
                       : 1);
    p.literal = std::move(literal);
    p.shift_invariant = false;
    p.seed = seed;
    return p;
}

InputProcess with_seed(InputProcess p, std::uint64_t seed) {
    p.seed = seed;
    return p;
}

} // namespace echoprop
