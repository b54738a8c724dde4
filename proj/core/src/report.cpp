#include "echoprop/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "echoprop/version.hpp"

namespace echoprop {

using nlohmann::json;

std::vector<PropertyId> default_properties() {
    return {PropertyId::Esp, PropertyId::Fmp,  PropertyId::Sfp, PropertyId::Ifp,
            PropertyId::SSfp, PropertyId::SIfp, PropertyId::Uap};
}

std::vector<PropertyId> parse_properties(const std::string& comma_separated) {
    std::vector<PropertyId> props;
    std::stringstream ss(comma_separated);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const PropertyId p = property_from_string(item);
        if (std::find(props.begin(), props.end(), p) == props.end()) {
            props.push_back(p);
        }
    }
    if (props.empty()) {
        throw ConfigError("no properties requested");
    }
    return props;
}

SystemFlags flags_for(const SystemSpec& sys, const InputProcess& proc) {
    return SystemFlags{sys.state_compact, sys.input_compact, sys.input_metrizable,
                       proc.shift_invariant};
}

json verdict_to_json(const PropertyVerdict& v) {
    return json{{"property", to_string(v.property)},
                {"level", to_string(v.level)},
                {"statistical", v.statistical},
                {"evidence", v.evidence}};
}

namespace {

json config_to_json(const TestConfig& cfg) {
    return json{{"n_max", cfg.n_max},
                {"tail_window", cfg.tail_window},
                {"persist_window", cfg.persist_window()},
                {"tol", cfg.tol},
                {"state_samples", cfg.state_samples},
                {"input_samples", cfg.input_samples},
                {"burn_in", cfg.burn_in},
                {"seed", cfg.seed},
                {"past_horizon", cfg.past_horizon},
                {"window_past", cfg.window_past()},
                {"fmp_windows", cfg.fmp_windows},
                {"fmp_perturbations", cfg.fmp_perturbations},
                {"fmp_ladder_step", cfg.fmp_ladder_step},
                {"fmp_states", cfg.fmp_states},
                {"workers", cfg.workers}};
}

std::string process_kind_name(InputProcess::Kind k) {
    switch (k) {
        case InputProcess::Kind::Iid: return "iid";
        case InputProcess::Kind::Constant: return "constant";
        case InputProcess::Kind::ExplicitWindow: return "explicit-window";
        case InputProcess::Kind::Observed: return "observed-dynamical-system";
    }
    return "unknown";
}

// verdict monotonicity: the level field must agree with the recorded checks
void verify_verdict_consistency(const PropertyVerdict& v) {
    if (!v.evidence.contains("level_checks")) return;
    const auto& c = v.evidence.at("level_checks");
    const bool pw = c.value("pointwise", false);
    const bool su = c.value("state_uniform", false);
    const bool un = c.value("uniform", false);
    if ((un && !su) || (su && !pw)) {
        throw InternalError("verdict level checks are not monotone for " + to_string(v.property));
    }
    const Level expect = un   ? Level::Uniform
                         : su ? Level::StateUniform
                         : pw ? Level::Pointwise
                              : Level::Refuted;
    if (v.level != expect) {
        throw InternalError("verdict level disagrees with its evidence for " +
                            to_string(v.property));
    }
}

} // namespace

AnalysisReport run_analysis(const SystemSpec& sys, const InputProcess& proc, const TestConfig& cfg,
                            const std::vector<PropertyId>& props) {
    cfg.validate();
    auto requested = [&](PropertyId p) {
        return std::find(props.begin(), props.end(), p) != props.end();
    };
    const bool need_esp = requested(PropertyId::Esp) || requested(PropertyId::Fmp) ||
                          requested(PropertyId::Uap);
    const bool need_sfp = requested(PropertyId::Sfp) || requested(PropertyId::Uap);

    std::map<PropertyId, PropertyVerdict> computed;
    if (need_esp) computed[PropertyId::Esp] = test_esp(sys, proc, cfg);
    if (need_sfp) computed[PropertyId::Sfp] = test_forgetting(sys, ForgettingVariant::Sfp, proc, cfg);
    if (requested(PropertyId::Ifp))
        computed[PropertyId::Ifp] = test_forgetting(sys, ForgettingVariant::Ifp, proc, cfg);
    if (requested(PropertyId::SSfp))
        computed[PropertyId::SSfp] = test_forgetting(sys, ForgettingVariant::SSfp, proc, cfg);
    if (requested(PropertyId::SIfp))
        computed[PropertyId::SIfp] = test_forgetting(sys, ForgettingVariant::SIfp, proc, cfg);
    if (requested(PropertyId::Fmp))
        computed[PropertyId::Fmp] = test_fmp(sys, proc, cfg, &computed.at(PropertyId::Esp));
    if (requested(PropertyId::Uap))
        computed[PropertyId::Uap] = test_uniform_attracting(
            sys, proc, cfg, &computed.at(PropertyId::Esp), &computed.at(PropertyId::Sfp));
    if (requested(PropertyId::Steady))
        computed[PropertyId::Steady] = test_steady_state(sys, proc, cfg);

    AnalysisReport report;
    for (PropertyId p : props) {
        auto it = computed.find(p);
        if (it == computed.end()) continue;
        verify_verdict_consistency(it->second);
        report.verdicts.push_back(it->second);
    }

    const SystemFlags flags = flags_for(sys, proc);
    report.check = check_diagram(report.verdicts, flags, standard_diagram());

    json verdicts = json::array();
    for (const auto& v : report.verdicts) verdicts.push_back(verdict_to_json(v));

    report.doc = json{
        {"schema_version", kReportSchemaVersion},
        {"tool_version", kToolVersion},
        {"system",
         {{"id", sys.id},
          {"kind", sys.kind == StateSpaceKind::Circle ? "circle" : "box"},
          {"state_dim", sys.state_dim},
          {"input_dim", sys.input_dim},
          {"flags",
           {{"state_compact", flags.state_compact},
            {"input_compact", flags.input_compact},
            {"input_metrizable", flags.input_metrizable},
            {"reachable_full", sys.reachable_full}}},
          {"config", sys.config_echo}}},
        {"process",
         {{"id", proc.id},
          {"kind", process_kind_name(proc.kind)},
          {"shift_invariant", proc.shift_invariant},
          {"seed", proc.seed}}},
        {"config", config_to_json(cfg)},
        {"verdicts", verdicts},
        {"diagram", check_to_json(report.check)},
        {"truncation",
         {{"past_horizon", cfg.window_past()},
          {"product_metric_tail_bound", product_distance_tail_bound(cfg.window_past())}}},
    };
    return report;
}

std::string report_bytes(const AnalysisReport& report) {
    return report.doc.dump(2) + "\n";
}

void emit_report(const AnalysisReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot open report path for writing: " + path);
    }
    out << report_bytes(report);
    out.flush();
    if (!out) {
        throw InternalError("report write failed: " + path);
    }
}

} // namespace echoprop
