#include "echoprop/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "echoprop/rng.hpp"

namespace echoprop {

namespace {

using nlohmann::json;

constexpr std::uint64_t kTanhBuildSeed = 0x6573686e'57696e00ull;
constexpr int kCircleHardGridDepth = 256;

// prime below 2^53; doubling acts on {0..q-1} as an exact permutation with
// multiplicative order ~4.5e15, so lattice orbits never collapse in a run
constexpr std::int64_t kDoublingModulus = (std::int64_t{1} << 53) - 111;

double clamp(double x, double lo, double hi) {
    return std::min(hi, std::max(lo, x));
}

std::vector<double> parse_params(const std::string& name, std::string* family) {
    const auto open = name.find('(');
    if (open == std::string::npos) {
        *family = name;
        return {};
    }
    if (name.back() != ')') {
        throw ConfigError("malformed system name: " + name);
    }
    *family = name.substr(0, open);
    std::vector<double> params;
    std::string body = name.substr(open + 1, name.size() - open - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            params.push_back(std::stod(item, &pos));
            while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric parameter '" + item + "' in " + name);
        }
    }
    return params;
}

std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string canonical_id(const std::string& family, const std::vector<double>& params) {
    if (params.empty()) return family;
    std::string s = family + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) s += ",";
        s += format_number(params[i]);
    }
    return s + ")";
}

} // namespace

// ---------------------------------------------------------------------------
// circle charts

namespace circle {

StatePoint from_angle(double theta) {
    theta -= std::floor(theta);
    if (theta > 0.5) {
        return StatePoint{{1.0 - theta, 1.0}};
    }
    return StatePoint{{theta, 0.0}};
}

double to_angle(const StatePoint& x) {
    return x.value[1] != 0.0 ? 1.0 - x.value[0] : x.value[0];
}

StatePoint hard_point(int k) {
    return StatePoint{{std::exp2(static_cast<double>(-k)), 1.0}};
}

double distance(const StatePoint& a, const StatePoint& b) {
    const double ta = a.value[0];
    const double tb = b.value[0];
    if (a.value[1] == b.value[1]) {
        // same chart: offsets differ by at most 1/2, the arc never wraps
        return std::abs(ta - tb);
    }
    const double s = ta + tb; // gap across the glued point
    return std::min(s, 1.0 - s);
}

bool valid(const StatePoint& x) {
    if (x.value.size() != 2) return false;
    if (x.value[1] != 0.0 && x.value[1] != 1.0) return false;
    return x.value[0] >= 0.0 && x.value[0] <= 0.5;
}

} // namespace circle

// ---------------------------------------------------------------------------
// catalog families

namespace {

SystemSpec make_affine(double a, double b) {
    if (std::abs(a) >= 1.0) {
        throw ConfigError("affine(a,b) requires |a| < 1, got a=" + format_number(a));
    }
    const double radius = std::abs(b) / (1.0 - std::abs(a));
    SystemSpec sys;
    sys.id = canonical_id("affine", {a, b});
    sys.kind = StateSpaceKind::Box;
    sys.state_dim = 1;
    sys.input_dim = 1;
    sys.input_lo = {-1.0};
    sys.input_hi = {1.0};
    sys.state_compact = true;
    sys.input_compact = true;
    sys.reachable_full = false;
    sys.hard_states_reachable = true; // box ends are the geometric-series extremes
    sys.step = [a, b, radius](const StatePoint& x, const InputPoint& u) {
        return StatePoint{{clamp(a * x.value[0] + b * u.value[0], -radius, radius)}};
    };
    sys.distance = [](const StatePoint& x, const StatePoint& y) {
        return std::abs(x.value[0] - y.value[0]);
    };
    sys.contains = [radius](const StatePoint& x) {
        return x.value.size() == 1 && std::abs(x.value[0]) <= radius;
    };
    sys.sample_state = [radius](std::uint64_t seed, std::uint64_t i) {
        return StatePoint{{uniform_in(mix64(seed, stream::state_sample, i), -radius, radius)}};
    };
    sys.hard_states = {StatePoint{{-radius}}, StatePoint{{radius}}};
    sys.echo_oracle = [a, b](const InputWindow& w) {
        // sum_{k>=0} a^k b u_{-k}, truncated at the window horizon
        double acc = 0.0;
        for (int t = -w.past_horizon() + 1; t <= 0; ++t) {
            acc = a * acc + b * w.entry(t).value[0];
        }
        return StatePoint{{acc}};
    };
    sys.divergence_rate = std::abs(a);
    sys.divergence_rate_exact = true;
    sys.config_echo = json{{"family", "affine"}, {"params", {a, b}}, {"state_radius", radius}};
    return sys;
}

SystemSpec make_constant(double c) {
    SystemSpec sys;
    sys.id = canonical_id("constant", {c});
    sys.kind = StateSpaceKind::Box;
    sys.state_dim = 1;
    sys.input_dim = 1;
    sys.input_lo = {-1.0};
    sys.input_hi = {1.0};
    sys.step = [c](const StatePoint&, const InputPoint&) { return StatePoint{{c}}; };
    sys.distance = [](const StatePoint& x, const StatePoint& y) {
        return std::abs(x.value[0] - y.value[0]);
    };
    sys.contains = [c](const StatePoint& x) {
        return x.value.size() == 1 && x.value[0] >= c - 1.0 && x.value[0] <= c + 1.0;
    };
    sys.sample_state = [c](std::uint64_t seed, std::uint64_t i) {
        return StatePoint{{uniform_in(mix64(seed, stream::state_sample, i), c - 1.0, c + 1.0)}};
    };
    sys.echo_oracle = [c](const InputWindow&) { return StatePoint{{c}}; };
    sys.divergence_rate = 0.0;
    sys.divergence_rate_exact = true;
    sys.config_echo = json{{"family", "constant"}, {"params", {c}}};
    return sys;
}

struct TanhWeights {
    int n = 16;
    int input_dim = 1;
    std::vector<double> w;   // row-major n x n
    std::vector<double> win; // n x input_dim
};

// spectral norm via power iteration on W^T W; 16x16 converges far below the
// tolerances any test uses
double spectral_norm(const std::vector<double>& w, int n, std::uint64_t seed) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = uniform_in(mix64(seed, 0xABCD, static_cast<std::uint64_t>(i)), -1.0, 1.0);
    std::vector<double> wv(static_cast<std::size_t>(n)), wtwv(static_cast<std::size_t>(n));
    double lambda = 0.0;
    for (int iter = 0; iter < 500; ++iter) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += w[static_cast<std::size_t>(i * n + j)] * v[static_cast<std::size_t>(j)];
            wv[static_cast<std::size_t>(i)] = s;
        }
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += w[static_cast<std::size_t>(i * n + j)] * wv[static_cast<std::size_t>(i)];
            wtwv[static_cast<std::size_t>(j)] = s;
        }
        double norm = 0.0;
        for (int j = 0; j < n; ++j) norm += wtwv[static_cast<std::size_t>(j)] * wtwv[static_cast<std::size_t>(j)];
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        double next = 0.0;
        for (int j = 0; j < n; ++j) {
            v[static_cast<std::size_t>(j)] = wtwv[static_cast<std::size_t>(j)] / norm;
            next += v[static_cast<std::size_t>(j)] * wtwv[static_cast<std::size_t>(j)];
        }
        if (iter > 32 && std::abs(next - lambda) <= 1e-15 * std::max(1.0, next)) {
            lambda = norm;
            break;
        }
        lambda = norm;
    }
    return std::sqrt(lambda);
}

TanhWeights build_tanh_weights(double spectral_target, int n, int input_dim, std::uint64_t seed) {
    TanhWeights tw;
    tw.n = n;
    tw.input_dim = input_dim;
    tw.w.resize(static_cast<std::size_t>(n * n));
    tw.win.resize(static_cast<std::size_t>(n * input_dim));
    for (std::size_t i = 0; i < tw.w.size(); ++i) {
        tw.w[i] = uniform_in(mix64(seed, stream::system_build, i), -1.0, 1.0);
    }
    for (std::size_t i = 0; i < tw.win.size(); ++i) {
        tw.win[i] = uniform_in(mix64(seed, stream::system_build + 1, i), -1.0, 1.0);
    }
    const double sigma = spectral_norm(tw.w, n, seed);
    const double scale = spectral_target / sigma;
    for (auto& x : tw.w) x *= scale;
    return tw;
}

SystemSpec make_tanh_esn(double spectral_target, int n, int input_dim, std::uint64_t seed) {
    if (spectral_target <= 0.0) {
        throw ConfigError("tanh_esn(s) requires s > 0");
    }
    auto tw = std::make_shared<TanhWeights>(build_tanh_weights(spectral_target, n, input_dim, seed));
    SystemSpec sys;
    sys.id = canonical_id("tanh_esn", {spectral_target});
    sys.kind = StateSpaceKind::Box;
    sys.state_dim = n;
    sys.input_dim = input_dim;
    sys.input_lo.assign(static_cast<std::size_t>(input_dim), -1.0);
    sys.input_hi.assign(static_cast<std::size_t>(input_dim), 1.0);
    sys.step = [tw](const StatePoint& x, const InputPoint& u) {
        StatePoint y;
        y.value.resize(static_cast<std::size_t>(tw->n));
        for (int i = 0; i < tw->n; ++i) {
            double s = 0.0;
            for (int j = 0; j < tw->n; ++j) {
                s += tw->w[static_cast<std::size_t>(i * tw->n + j)] * x.value[static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < tw->input_dim; ++j) {
                s += tw->win[static_cast<std::size_t>(i * tw->input_dim + j)] * u.value[static_cast<std::size_t>(j)];
            }
            y.value[static_cast<std::size_t>(i)] = std::tanh(s);
        }
        return y;
    };
    sys.distance = [](const StatePoint& x, const StatePoint& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.value.size(); ++i) {
            const double d = x.value[i] - y.value[i];
            s += d * d;
        }
        return std::sqrt(s);
    };
    sys.contains = [n](const StatePoint& x) {
        if (static_cast<int>(x.value.size()) != n) return false;
        return std::all_of(x.value.begin(), x.value.end(),
                           [](double v) { return v >= -1.0 && v <= 1.0; });
    };
    sys.sample_state = [n](std::uint64_t seed_, std::uint64_t i) {
        StatePoint x;
        x.value.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            x.value[static_cast<std::size_t>(j)] =
                uniform_in(mix64(seed_, stream::state_sample, i, static_cast<std::uint64_t>(j)), -1.0, 1.0);
        }
        return x;
    };
    StatePoint corner_hi, corner_lo;
    corner_hi.value.assign(static_cast<std::size_t>(n), 1.0);
    corner_lo.value.assign(static_cast<std::size_t>(n), -1.0);
    sys.hard_states = {corner_lo, corner_hi};
    sys.divergence_rate = spectral_target; // upper bound, tanh is 1-Lipschitz
    sys.divergence_rate_exact = false;
    sys.config_echo = json{{"family", "tanh_esn"},
                           {"params", {spectral_target}},
                           {"state_dim", n},
                           {"input_dim", input_dim},
                           {"seed", seed}};
    return sys;
}

json describe_circle_state(const StatePoint& x) {
    return json{{"angle", circle::to_angle(x)},
                {"chart", {{"offset", x.value[0]}, {"branch", x.value[1] != 0.0 ? 1 : 0}}}};
}

void fill_circle_common(SystemSpec& sys) {
    sys.kind = StateSpaceKind::Circle;
    sys.state_dim = 2;
    sys.input_dim = 1;
    sys.input_lo = {-1.0};
    sys.input_hi = {1.0};
    sys.state_compact = true;
    sys.input_compact = true;
    sys.distance = circle::distance;
    sys.contains = circle::valid;
    sys.sample_state = [](std::uint64_t seed, std::uint64_t i) {
        return circle::from_angle(u01(mix64(seed, stream::state_sample, i)));
    };
    sys.describe_state = describe_circle_state;
}

SystemSpec make_circle_square() {
    SystemSpec sys;
    sys.id = "circle_square";
    fill_circle_common(sys);
    sys.reachable_full = true; // the squaring map is a homeomorphism
    sys.hard_states_reachable = true;
    sys.step = [](const StatePoint& x, const InputPoint&) {
        const double t = x.value[0];
        if (x.value[1] == 0.0) {
            return StatePoint{{t * t, 0.0}}; // theta^2 <= 1/4 stays in the low chart
        }
        // theta = 1 - eps: theta^2 = 1 - eps*(2 - eps)
        const double eps = t * (2.0 - t);
        if (eps > 0.5) {
            return StatePoint{{1.0 - eps, 0.0}};
        }
        return StatePoint{{eps, 1.0}};
    };
    sys.hard_states.reserve(kCircleHardGridDepth);
    for (int k = 1; k <= kCircleHardGridDepth; ++k) {
        sys.hard_states.push_back(circle::hard_point(k));
    }
    sys.config_echo = json{{"family", "circle_square"}, {"hard_grid_depth", kCircleHardGridDepth}};
    return sys;
}

SystemSpec make_rotation(double alpha) {
    SystemSpec sys;
    sys.id = canonical_id("rotation", {alpha});
    fill_circle_common(sys);
    sys.reachable_full = true; // rotations are bijections
    sys.hard_states_reachable = true;
    const double a = alpha - std::floor(alpha);
    sys.step = [a](const StatePoint& x, const InputPoint&) {
        double theta = circle::to_angle(x) + a;
        if (theta >= 1.0) theta -= 1.0;
        return circle::from_angle(theta);
    };
    sys.divergence_rate = 1.0; // isometry
    sys.divergence_rate_exact = true;
    sys.config_echo = json{{"family", "rotation"}, {"params", {alpha}}};
    return sys;
}

SystemSpec make_doubling() {
    SystemSpec sys;
    sys.id = "doubling";
    sys.kind = StateSpaceKind::Circle;
    sys.state_dim = 1;
    sys.input_dim = 1;
    sys.input_lo = {-1.0};
    sys.input_hi = {1.0};
    sys.reachable_full = true; // 2:1 but onto
    sys.step = [](const StatePoint& x, const InputPoint&) {
        const auto k = static_cast<std::int64_t>(x.value[0]);
        return StatePoint{{static_cast<double>((2 * k) % kDoublingModulus)}};
    };
    sys.distance = [](const StatePoint& x, const StatePoint& y) {
        const auto a = static_cast<std::int64_t>(x.value[0]);
        const auto b = static_cast<std::int64_t>(y.value[0]);
        const std::int64_t d = std::abs(a - b);
        return static_cast<double>(std::min(d, kDoublingModulus - d)) /
               static_cast<double>(kDoublingModulus);
    };
    sys.contains = [](const StatePoint& x) {
        if (x.value.size() != 1) return false;
        const double v = x.value[0];
        return v >= 0.0 && v < static_cast<double>(kDoublingModulus) && v == std::floor(v);
    };
    sys.sample_state = [](std::uint64_t seed, std::uint64_t i) {
        const std::uint64_t h = mix64(seed, stream::state_sample, i);
        return StatePoint{{static_cast<double>(static_cast<std::int64_t>(
            h % static_cast<std::uint64_t>(kDoublingModulus)))}};
    };
    sys.describe_state = [](const StatePoint& x) {
        return json{{"angle", x.value[0] / static_cast<double>(kDoublingModulus)},
                    {"lattice_index", static_cast<std::int64_t>(x.value[0])}};
    };
    sys.config_echo = json{{"family", "doubling"}, {"lattice_modulus", kDoublingModulus}};
    return sys;
}

SystemSpec build_family(const std::string& family, const std::vector<double>& params,
                        const json* overrides) {
    auto expect = [&](std::size_t lo, std::size_t hi) {
        if (params.size() < lo || params.size() > hi) {
            throw ConfigError("family '" + family + "' takes " + std::to_string(lo) +
                              (hi != lo ? ".." + std::to_string(hi) : "") +
                              " parameter(s), got " + std::to_string(params.size()));
        }
    };
    if (family == "affine") {
        expect(2, 2);
        return make_affine(params[0], params[1]);
    }
    if (family == "tanh_esn") {
        expect(1, 1);
        int n = 16;
        int input_dim = 1;
        std::uint64_t seed = kTanhBuildSeed;
        if (overrides) {
            n = overrides->value("state_dim", n);
            input_dim = overrides->value("input_dim", input_dim);
            seed = overrides->value("seed", seed);
        }
        return make_tanh_esn(params[0], n, input_dim, seed);
    }
    if (family == "circle_square") {
        expect(0, 0);
        return make_circle_square();
    }
    if (family == "rotation") {
        expect(1, 1);
        return make_rotation(params[0]);
    }
    if (family == "doubling") {
        expect(0, 0);
        return make_doubling();
    }
    if (family == "constant") {
        expect(0, 1);
        return make_constant(params.empty() ? 0.0 : params[0]);
    }
    throw ConfigError("unknown system '" + family + "'");
}

} // namespace

SystemSpec catalog_get(const std::string& name) {
    std::string trimmed;
    trimmed.reserve(name.size());
    for (char c : name) {
        if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
    }
    std::string family;
    const auto params = parse_params(trimmed, &family);
    return build_family(family, params, nullptr);
}

SystemSpec system_from_config(const nlohmann::json& config) {
    if (!config.is_object() || !config.contains("family")) {
        throw ConfigError("system config must be an object with a 'family' key");
    }
    const auto family = config.at("family").get<std::string>();
    std::vector<double> params;
    if (config.contains("params")) {
        params = config.at("params").get<std::vector<double>>();
    }
    SystemSpec sys = build_family(family, params, &config);
    if (config.contains("input_lo")) sys.input_lo = config.at("input_lo").get<Vec>();
    if (config.contains("input_hi")) sys.input_hi = config.at("input_hi").get<Vec>();
    if (sys.input_lo.size() != sys.input_hi.size() ||
        static_cast<int>(sys.input_lo.size()) != sys.input_dim) {
        throw ConfigError("input bounds must match input_dim");
    }
    if (config.contains("state_compact")) sys.state_compact = config.at("state_compact").get<bool>();
    if (config.contains("input_compact")) sys.input_compact = config.at("input_compact").get<bool>();
    if (config.contains("input_metrizable")) sys.input_metrizable = config.at("input_metrizable").get<bool>();
    if (config.contains("hard_states")) {
        sys.hard_states.clear();
        for (const auto& entry : config.at("hard_states")) {
            StatePoint x{entry.get<Vec>()};
            if (!sys.contains(x)) {
                throw ConfigError("hard state outside the declared state set");
            }
            sys.hard_states.push_back(std::move(x));
        }
    }
    if (config.contains("id")) sys.id = config.at("id").get<std::string>();
    sys.config_echo = config;
    return sys;
}

SystemSpec load_system(const std::string& name_or_path) {
    if (std::filesystem::exists(name_or_path)) {
        std::ifstream in(name_or_path);
        if (!in) {
            throw ConfigError("cannot read system config: " + name_or_path);
        }
        nlohmann::json config;
        try {
            in >> config;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad system config " + name_or_path + ": " + e.what());
        }
        return system_from_config(config);
    }
    return catalog_get(name_or_path);
}

std::vector<std::pair<std::string, std::string>> catalog_entries() {
    return {
        {"affine(a,b)", "f(x,u) = a*x + b*u on the invariant box |x| <= |b|/(1-|a|); contraction for |a| < 1"},
        {"tanh_esn(s)", "f(x,u) = tanh(W*x + Win*u), 16x16 seeded W rescaled to spectral norm s"},
        {"circle_square", "input-independent squaring homeomorphism of the circle; forgets pointwise but not uniformly"},
        {"rotation(alpha)", "circle rotation; an isometry, forgets nothing"},
        {"doubling", "expanding angle doubling on a prime lattice"},
        {"constant(c)", "every state maps to c in one step"},
    };
}

nlohmann::json state_to_json(const SystemSpec& sys, const StatePoint& x) {
    nlohmann::json j{{"value", x.value}};
    if (sys.describe_state) {
        j["display"] = sys.describe_state(x);
    }
    return j;
}

StatePoint state_from_json(const nlohmann::json& j) {
    if (j.is_array()) {
        return StatePoint{j.get<Vec>()};
    }
    return StatePoint{j.at("value").get<Vec>()};
}

} // namespace echoprop
