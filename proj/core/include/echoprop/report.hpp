#pragma once

#include <string>
#include <vector>

#include "echoprop/diagram.hpp"
#include "echoprop/process.hpp"
#include "echoprop/system.hpp"
#include "echoprop/testers.hpp"

namespace echoprop {

struct AnalysisReport {
    nlohmann::json doc;
    std::vector<PropertyVerdict> verdicts;
    DiagramCheck check;
};

// Runs the requested testers (plus any they depend on), checks the
// implication diagram against the produced verdicts, and assembles a
// schema-versioned document. Deterministic in (system, process, cfg,
// props); worker count never changes a byte.
AnalysisReport run_analysis(const SystemSpec& sys, const InputProcess& proc, const TestConfig& cfg,
                            const std::vector<PropertyId>& props);

std::vector<PropertyId> default_properties();
std::vector<PropertyId> parse_properties(const std::string& comma_separated);

// Canonical serialized form; emit_report writes exactly these bytes.
std::string report_bytes(const AnalysisReport& report);
void emit_report(const AnalysisReport& report, const std::string& path);

SystemFlags flags_for(const SystemSpec& sys, const InputProcess& proc);

nlohmann::json verdict_to_json(const PropertyVerdict& v);

} // namespace echoprop
