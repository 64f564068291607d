#pragma once

#include <optional>
#include <string>
#include <vector>

#include "inkscore/errors.hpp"

namespace inkscore {

// One fixed-effect term: a single variable, or an interaction of several.
// Factors keep the order in which the term was formed; equality is
// order-insensitive so `a:b` and `b:a` are one term.
struct Term {
    std::vector<std::string> factors;

    std::string name() const;  // factors joined with ':'
    bool same_factors(const Term& other) const;
    bool operator==(const Term& other) const = default;
};

struct ModelSpec {
    std::string response;
    std::vector<Term> fixed_terms;               // mains first, then interactions
    std::optional<std::string> random_intercept;  // grouping variable, if any

    bool operator==(const ModelSpec& other) const = default;
};

// Parses "response ~ predictors" where predictors combine identifiers with
// '+', ':' (interaction), '*' (crossing: a*b = a + b + a:b), parentheses,
// a bare '1' for an intercept-only right side, and at most one random
// intercept written '(1|group)'. Crossings are fully expanded and duplicate
// terms dropped. Errors carry the byte position of the offending token.
ModelSpec parse_formula(const std::string& formula);

std::string render_formula(const ModelSpec& spec);

} // namespace inkscore
