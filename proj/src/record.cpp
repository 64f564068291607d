#include "inkscore/record.hpp"

namespace inkscore {

Group group_of(Subgroup sg) {
    switch (sg) {
        case Subgroup::pre_schematic:
        case Subgroup::schematic: return Group::child;
        case Subgroup::adult: return Group::adult;
        case Subgroup::prompt1:
        case Subgroup::prompt2:
        case Subgroup::prompt3: return Group::ai;
    }
    throw Error("group_of: bad subgroup");
}

std::string to_string(Group g) {
    switch (g) {
        case Group::child: return "child";
        case Group::adult: return "adult";
        case Group::ai: return "ai";
    }
    throw Error("to_string: bad group");
}

std::string to_string(Subgroup sg) {
    switch (sg) {
        case Subgroup::pre_schematic: return "pre_schematic";
        case Subgroup::schematic: return "schematic";
        case Subgroup::adult: return "adult";
        case Subgroup::prompt1: return "prompt1";
        case Subgroup::prompt2: return "prompt2";
        case Subgroup::prompt3: return "prompt3";
    }
    throw Error("to_string: bad subgroup");
}

std::string to_string(Stimulus s) {
    switch (s) {
        case Stimulus::G: return "G";
        case Stimulus::I: return "I";
        case Stimulus::R: return "R";
    }
    throw Error("to_string: bad stimulus");
}

Group group_from_string(const std::string& s) {
    if (s == "child") return Group::child;
    if (s == "adult") return Group::adult;
    if (s == "ai") return Group::ai;
    throw ValidationError("unknown group: '" + s + "'");
}

Subgroup subgroup_from_string(const std::string& s) {
    if (s == "pre_schematic") return Subgroup::pre_schematic;
    if (s == "schematic") return Subgroup::schematic;
    if (s == "adult") return Subgroup::adult;
    if (s == "prompt1") return Subgroup::prompt1;
    if (s == "prompt2") return Subgroup::prompt2;
    if (s == "prompt3") return Subgroup::prompt3;
    throw ValidationError("unknown subgroup: '" + s + "'");
}

Stimulus stimulus_from_string(const std::string& s) {
    if (s == "G") return Stimulus::G;
    if (s == "I") return Stimulus::I;
    if (s == "R") return Stimulus::R;
    throw ValidationError("unknown stimulus: '" + s + "'");
}

} // namespace inkscore
