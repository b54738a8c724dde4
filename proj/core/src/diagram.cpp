#include "echoprop/diagram.hpp"

#include <map>
#include <optional>

namespace echoprop {

using nlohmann::json;

std::string to_string(EdgeCondition c) {
    switch (c) {
        case EdgeCondition::Always: return "always";
        case EdgeCondition::StateCompact: return "state_compact";
        case EdgeCondition::StateAndInputCompact: return "state_and_input_compact";
        case EdgeCondition::InputMetrizable: return "input_metrizable";
        case EdgeCondition::ShiftInvariantInputs: return "shift_invariant_inputs";
    }
    throw InternalError("unhandled edge condition");
}

namespace {

constexpr Level kSupported = Level::Uniform; // ESP/FMP/UAP carry no level ladder

DiagramNode node(PropertyId p, Level l) {
    return DiagramNode{p, l};
}

ImplicationDiagram build_standard_diagram() {
    ImplicationDiagram d;
    const Level levels[] = {Level::Pointwise, Level::StateUniform, Level::Uniform};

    // definitional arrows
    for (PropertyId p : {PropertyId::Sfp, PropertyId::Ifp, PropertyId::SSfp, PropertyId::SIfp}) {
        d.edges.push_back({{node(p, Level::Uniform)},
                           node(p, Level::StateUniform),
                           EdgeCondition::Always,
                           "a bound uniform in inputs and states is uniform in states alone"});
        d.edges.push_back({{node(p, Level::StateUniform)},
                           node(p, Level::Pointwise),
                           EdgeCondition::Always,
                           "a bound uniform over state pairs specializes to each fixed pair"});
    }
    for (Level l : levels) {
        d.edges.push_back({{node(PropertyId::Sfp, l)},
                           node(PropertyId::Ifp, l),
                           EdgeCondition::Always,
                           "the reachable set is contained in the state set"});
        d.edges.push_back({{node(PropertyId::SSfp, l)},
                           node(PropertyId::SIfp, l),
                           EdgeCondition::Always,
                           "the reachable set is contained in the state set"});
    }

    // uniform-level equivalences under shift-invariant inputs
    auto shift_pair = [&](PropertyId a, PropertyId b) {
        const char* why =
            "shift invariance lets the shifted and unshifted suprema range over the same inputs";
        d.edges.push_back({{node(a, Level::Uniform)}, node(b, Level::Uniform),
                           EdgeCondition::ShiftInvariantInputs, why});
        d.edges.push_back({{node(b, Level::Uniform)}, node(a, Level::Uniform),
                           EdgeCondition::ShiftInvariantInputs, why});
    };
    shift_pair(PropertyId::Sfp, PropertyId::SSfp);
    shift_pair(PropertyId::Ifp, PropertyId::SIfp);

    // compactness-conditioned arrows
    d.edges.push_back({{node(PropertyId::Esp, kSupported)},
                       node(PropertyId::Fmp, kSupported),
                       EdgeCondition::StateCompact,
                       "on a compact state sequence space the unique-solution map is continuous"});
    d.edges.push_back({{node(PropertyId::Esp, kSupported)},
                       node(PropertyId::SSfp, Level::StateUniform),
                       EdgeCondition::StateCompact,
                       "accumulation points of pullback orbits land in the attractor, whose fibers "
                       "are single solutions"});
    d.edges.push_back({{node(PropertyId::SIfp, Level::StateUniform)},
                       node(PropertyId::Esp, kSupported),
                       EdgeCondition::StateCompact,
                       "state-uniform shifted input forgetting leaves at most one solution per "
                       "input; compactness supplies existence"});
    d.edges.push_back({{node(PropertyId::Esp, kSupported)},
                       node(PropertyId::SSfp, Level::Uniform),
                       EdgeCondition::StateAndInputCompact,
                       "the pullback-collapse argument runs uniformly when the inputs are compact "
                       "as well"});

    // metrizable-input arrow
    d.edges.push_back({{node(PropertyId::Esp, kSupported), node(PropertyId::Fmp, kSupported)},
                       node(PropertyId::SIfp, Level::StateUniform),
                       EdgeCondition::InputMetrizable,
                       "a splice at depth n moves the input by at most 2^-n in the product metric; "
                       "continuity of the induced functional does the rest"});

    // uniform attracting equivalence
    d.edges.push_back({{node(PropertyId::Esp, kSupported), node(PropertyId::Sfp, Level::Uniform)},
                       node(PropertyId::Uap, kSupported),
                       EdgeCondition::Always,
                       "states attract uniformly to the echo-state trajectory exactly when echo "
                       "states exist and state forgetting is uniform"});
    d.edges.push_back({{node(PropertyId::Uap, kSupported)},
                       node(PropertyId::Esp, kSupported),
                       EdgeCondition::Always,
                       "uniform attraction singles out one solution per input"});
    d.edges.push_back({{node(PropertyId::Uap, kSupported)},
                       node(PropertyId::Sfp, Level::Uniform),
                       EdgeCondition::Always,
                       "uniform attraction bounds any state pair via the attracting trajectory"});

    // steady-state alias
    for (Level l : levels) {
        d.edges.push_back({{node(PropertyId::Steady, l)}, node(PropertyId::Ifp, l),
                           EdgeCondition::Always,
                           "unique steady states and input forgetting are the same requirement"});
        d.edges.push_back({{node(PropertyId::Ifp, l)}, node(PropertyId::Steady, l),
                           EdgeCondition::Always,
                           "unique steady states and input forgetting are the same requirement"});
    }

    // declared non-implications, all witnessed by the squaring circle map
    const char* purple =
        "pointwise forgetting cannot rule out multiple solutions for one input";
    for (PropertyId p : {PropertyId::Sfp, PropertyId::Ifp, PropertyId::SSfp, PropertyId::SIfp}) {
        d.non_implications.push_back(
            {node(p, Level::Pointwise), node(PropertyId::Esp, kSupported), "circle_square", purple});
    }
    return d;
}

void validate_node(const DiagramNode& n) {
    const int p = static_cast<int>(n.property);
    if (p < 0 || p > static_cast<int>(PropertyId::Steady)) {
        throw DiagramError("diagram references an unknown property");
    }
    if (n.level != Level::Pointwise && n.level != Level::StateUniform &&
        n.level != Level::Uniform) {
        throw DiagramError("diagram node level must be pointwise, state_uniform, or uniform");
    }
}

json node_to_json(const DiagramNode& n) {
    return json{{"property", to_string(n.property)}, {"level", to_string(n.level)}};
}

} // namespace

const ImplicationDiagram& standard_diagram() {
    static const ImplicationDiagram d = build_standard_diagram();
    return d;
}

DiagramCheck check_diagram(const std::vector<PropertyVerdict>& verdicts, const SystemFlags& flags,
                           const ImplicationDiagram& diagram) {
    std::map<PropertyId, Level> have;
    for (const auto& v : verdicts) {
        have.emplace(v.property, v.level);
    }
    auto lookup = [&](const DiagramNode& n) -> std::optional<Level> {
        validate_node(n);
        auto it = have.find(n.property);
        if (it == have.end() || it->second == Level::NotApplicable) return std::nullopt;
        return it->second;
    };
    auto condition_met = [&](EdgeCondition c) {
        switch (c) {
            case EdgeCondition::Always: return true;
            case EdgeCondition::StateCompact: return flags.state_compact;
            case EdgeCondition::StateAndInputCompact:
                return flags.state_compact && flags.input_compact;
            case EdgeCondition::InputMetrizable: return flags.input_metrizable;
            case EdgeCondition::ShiftInvariantInputs: return flags.shift_invariant_inputs;
        }
        return false;
    };

    DiagramCheck out;
    for (const auto& edge : diagram.edges) {
        if (!condition_met(edge.condition)) continue;
        bool all_present = true;
        bool all_hold = true;
        std::vector<Level> antecedents;
        for (const auto& a : edge.from) {
            const auto l = lookup(a);
            if (!l) {
                all_present = false;
                break;
            }
            antecedents.push_back(*l);
            if (!level_at_least(*l, a.level)) all_hold = false;
        }
        if (!all_present || !all_hold) continue;
        const auto consequent = lookup(edge.to);
        if (!consequent) continue;
        if (!level_at_least(*consequent, edge.to.level)) {
            out.violations.push_back({&edge, std::move(antecedents), *consequent});
        }
    }
    for (const auto& ni : diagram.non_implications) {
        const auto a = lookup(ni.from);
        const auto c = lookup(ni.to);
        if (!a || !c) continue;
        if (level_at_least(*a, ni.from.level) && !level_at_least(*c, ni.to.level)) {
            out.witnessed.push_back({&ni, *a, *c});
        }
    }
    return out;
}

json diagram_to_json(const ImplicationDiagram& diagram) {
    json edges = json::array();
    for (const auto& e : diagram.edges) {
        json from = json::array();
        for (const auto& a : e.from) from.push_back(node_to_json(a));
        edges.push_back(json{{"from", from},
                             {"to", node_to_json(e.to)},
                             {"condition", to_string(e.condition)},
                             {"provenance", e.provenance}});
    }
    json nis = json::array();
    for (const auto& ni : diagram.non_implications) {
        nis.push_back(json{{"from", node_to_json(ni.from)},
                           {"to", node_to_json(ni.to)},
                           {"witness_system", ni.witness_system},
                           {"provenance", ni.provenance}});
    }
    return json{{"edges", edges}, {"non_implications", nis}};
}

json check_to_json(const DiagramCheck& check) {
    json violations = json::array();
    for (const auto& v : check.violations) {
        json from = json::array();
        for (std::size_t i = 0; i < v.edge->from.size(); ++i) {
            json f = node_to_json(v.edge->from[i]);
            f["verdict_level"] = to_string(v.antecedent_levels[i]);
            from.push_back(f);
        }
        json to = node_to_json(v.edge->to);
        to["verdict_level"] = to_string(v.consequent_level);
        violations.push_back(json{{"from", from},
                                  {"to", to},
                                  {"condition", to_string(v.edge->condition)},
                                  {"provenance", v.edge->provenance}});
    }
    json witnessed = json::array();
    for (const auto& w : check.witnessed) {
        witnessed.push_back(json{{"from", node_to_json(w.edge->from)},
                                 {"antecedent_level", to_string(w.antecedent_level)},
                                 {"to", node_to_json(w.edge->to)},
                                 {"consequent_level", to_string(w.consequent_level)},
                                 {"witness_system", w.edge->witness_system}});
    }
    return json{{"violations", violations}, {"non_implications_witnessed", witnessed}};
}

} // namespace echoprop
