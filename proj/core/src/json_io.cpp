#include "echoprop/json_io.hpp"

#include <fstream>
#include <map>

namespace echoprop {

using nlohmann::json;

json window_to_json(const InputWindow& w) {
    json entries = json::array();
    for (int t = -w.past_horizon() + 1; t <= w.future_horizon(); ++t) {
        entries.push_back(json{{"t", t}, {"value", w.entry(t).value}});
    }
    return json{{"past_horizon", w.past_horizon()},
                {"future_horizon", w.future_horizon()},
                {"entries", entries}};
}

InputWindow window_from_json(const json& j) {
    int b = 0;
    int h = 0;
    try {
        b = j.at("past_horizon").get<int>();
        h = j.at("future_horizon").get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("window literal missing horizons: ") + e.what());
    }
    if (b < 0 || h < 0) {
        throw ConfigError("window horizons must be nonnegative");
    }
    std::map<int, Vec> by_time;
    for (const auto& entry : j.at("entries")) {
        const int t = entry.at("t").get<int>();
        if (t <= -b || t > h) {
            throw ConfigError("window entry at t=" + std::to_string(t) +
                              " outside the declared horizons");
        }
        if (!by_time.emplace(t, entry.at("value").get<Vec>()).second) {
            throw ConfigError("duplicate window entry at t=" + std::to_string(t));
        }
    }
    std::vector<InputPoint> past, future;
    for (int t = -b + 1; t <= h; ++t) {
        auto it = by_time.find(t);
        if (it == by_time.end()) {
            throw ConfigError("window literal missing entry at t=" + std::to_string(t));
        }
        (t <= 0 ? past : future).push_back(InputPoint{std::move(it->second)});
    }
    return InputWindow(std::move(past), std::move(future));
}

InputWindow read_window_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read window file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("bad window file " + path + ": " + e.what());
    }
    return window_from_json(j);
}

void write_window_file(const InputWindow& w, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write window file: " + path);
    }
    out << window_to_json(w).dump(2) << "\n";
    if (!out) {
        throw InternalError("write failed: " + path);
    }
}

} // namespace echoprop
