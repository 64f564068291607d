#pragma once

#include <optional>
#include <string>
#include <vector>

#include "inkscore/errors.hpp"

namespace inkscore {

enum class Group { child, adult, ai };
enum class Subgroup { pre_schematic, schematic, adult, prompt1, prompt2, prompt3 };
enum class Stimulus { G, I, R };

Group group_of(Subgroup sg);

std::string to_string(Group g);
std::string to_string(Subgroup sg);
std::string to_string(Stimulus s);

Group group_from_string(const std::string& s);
Subgroup subgroup_from_string(const std::string& s);
Stimulus stimulus_from_string(const std::string& s);

// One drawing as ingested from the manifest. Optional fields are simply
// absent for cohorts where they don't apply (e.g. no flexibility scores for
// drawings whose participant never completed a set).
struct DrawingRecord {
    std::string drawing_id;
    Group group = Group::child;
    Subgroup subgroup = Subgroup::pre_schematic;
    std::string participant;   // producing person, or AI prompt label
    Stimulus stimulus = Stimulus::G;
    bool inverted = false;     // drawn with the sheet rotated 180 degrees
    std::string image_path;
    std::string caption;       // human annotator's content description
    std::vector<std::string> categories;
    std::optional<double> expert1;   // creativity, 0..4
    std::optional<double> expert2;   // creativity, 0..4
    std::optional<double> audra;     // automated rating, 0..1
    std::optional<double> osc;       // automated rating, 0..1
    std::optional<double> used_stim; // stimulus integration, 0..2
    std::optional<double> flex1;     // flexibility, 0..2
    std::optional<double> flex2;     // flexibility, 0..2
};

} // namespace inkscore
