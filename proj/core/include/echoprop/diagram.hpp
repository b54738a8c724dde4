#pragma once

#include <string>
#include <vector>

#include "echoprop/testers.hpp"

namespace echoprop {

struct DiagramNode {
    PropertyId property;
    Level level; // required level of the antecedent / consequent
};

enum class EdgeCondition {
    Always,
    StateCompact,
    StateAndInputCompact,
    InputMetrizable,
    ShiftInvariantInputs,
};

std::string to_string(EdgeCondition c);

// An implication: every `from` node holding at its level forces `to`.
// Equivalences are stored as paired edges.
struct DiagramEdge {
    std::vector<DiagramNode> from;
    DiagramNode to;
    EdgeCondition condition = EdgeCondition::Always;
    std::string provenance;
};

// A declared non-implication with a designated witness system; the checker
// reports these affirmatively when the data exhibits them, it never treats
// them as constraints.
struct NonImplication {
    DiagramNode from;
    DiagramNode to;
    std::string witness_system;
    std::string provenance;
};

struct ImplicationDiagram {
    std::vector<DiagramEdge> edges;
    std::vector<NonImplication> non_implications;
};

// The encoded diagram: definitional level and reachability arrows, the
// compactness-conditioned arrows, the metrizable-input arrow, the uniform
// attracting equivalence, and the steady-state alias.
const ImplicationDiagram& standard_diagram();

struct SystemFlags {
    bool state_compact = false;
    bool input_compact = false;
    bool input_metrizable = false;
    bool shift_invariant_inputs = false;
};

struct Violation {
    const DiagramEdge* edge;
    std::vector<Level> antecedent_levels;
    Level consequent_level;
};

struct WitnessedNonImplication {
    const NonImplication* edge;
    Level antecedent_level;
    Level consequent_level;
};

struct DiagramCheck {
    std::vector<Violation> violations;
    std::vector<WitnessedNonImplication> witnessed;
};

// Checks every edge whose condition the flags satisfy; verdicts missing from
// the list skip their edges. Throws DiagramError on unknown node references.
DiagramCheck check_diagram(const std::vector<PropertyVerdict>& verdicts, const SystemFlags& flags,
                           const ImplicationDiagram& diagram);

nlohmann::json diagram_to_json(const ImplicationDiagram& diagram);
nlohmann::json check_to_json(const DiagramCheck& check);

} // namespace echoprop
