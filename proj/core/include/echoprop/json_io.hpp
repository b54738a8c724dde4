#pragma once

#include <string>

#include "json.hpp"

#include "echoprop/window.hpp"

namespace echoprop {

// Window literal schema:
//   {"past_horizon": B, "future_horizon": H,
//    "entries": [{"t": -1, "value": [..]}, ...]}
// with one entry for every t in [-B+1, H].
nlohmann::json window_to_json(const InputWindow& w);
InputWindow window_from_json(const nlohmann::json& j);

InputWindow read_window_file(const std::string& path);
void write_window_file(const InputWindow& w, const std::string& path);

} // namespace echoprop
