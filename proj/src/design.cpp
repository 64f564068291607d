#include "inkscore/design.hpp"

#include <algorithm>
#include <cmath>

namespace inkscore {

namespace {

// Group levels key on the cell's text, whatever the column type.
std::string cell_key(const MetricsTable& table, std::size_t row,
                     const std::string& col) {
    if (table.column_type(col) == ColumnType::text) return table.text(row, col);
    return format_double(table.number(row, col));
}

} // namespace

DesignMatrix build_design(const ModelSpec& spec, const MetricsTable& table,
                          bool standardize,
                          const DesignScaler* apply_scaler,
                          const std::vector<std::size_t>* row_subset) {
    // Variables involved anywhere in the fixed part, first appearance order.
    std::vector<std::string> vars;
    for (const Term& t : spec.fixed_terms)
        for (const std::string& f : t.factors)
            if (std::find(vars.begin(), vars.end(), f) == vars.end())
                vars.push_back(f);

    auto check_numeric = [&](const std::string& name) {
        if (!table.has_column(name))
            throw Error("build_design: no such column '" + name + "'");
        if (table.column_type(name) != ColumnType::numeric)
            throw Error("build_design: column '" + name + "' is not numeric");
    };
    check_numeric(spec.response);
    for (const std::string& v : vars) check_numeric(v);
    if (spec.random_intercept && !table.has_column(*spec.random_intercept))
        throw Error("build_design: no such column '" + *spec.random_intercept + "'");

    std::vector<std::size_t> candidates;
    if (row_subset) {
        candidates = *row_subset;
    } else {
        candidates.resize(table.n_rows());
        for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
    }

    DesignMatrix design;
    for (std::size_t r : candidates) {
        bool complete = table.present(r, spec.response);
        for (const std::string& v : vars) complete = complete && table.present(r, v);
        if (spec.random_intercept)
            complete = complete && table.present(r, *spec.random_intercept);
        if (complete) design.rows.push_back(r);
        else ++design.n_dropped;
    }
    if (design.rows.empty())
        throw Error("build_design: empty result after dropping rows with missing values");

    const std::size_t n = design.rows.size();

    if (apply_scaler) {
        design.scaler = *apply_scaler;
        design.standardized = true;
        for (const std::string& v : vars)
            if (!design.scaler.stats.count(v))
                throw Error("build_design: scaler lacks variable '" + v + "'");
    } else if (standardize) {
        design.standardized = true;
        for (const std::string& v : vars) {
            double sum = 0.0;
            for (std::size_t r : design.rows) sum += table.number(r, v);
            const double mean = sum / n;
            double ss = 0.0;
            for (std::size_t r : design.rows) {
                const double d = table.number(r, v) - mean;
                ss += d * d;
            }
            const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
            if (sd == 0.0)
                throw Error("build_design: cannot standardize constant column '" + v + "'");
            design.scaler.stats[v] = {mean, sd};
        }
    }

    auto value_of = [&](std::size_t r, const std::string& v) {
        double x = table.number(r, v);
        if (design.standardized) {
            const auto& [mean, sd] = design.scaler.stats.at(v);
            x = (x - mean) / sd;
        }
        return x;
    };

    const std::size_t p = 1 + spec.fixed_terms.size();
    design.X.resize(n, p);
    design.y.resize(n);
    design.colnames.push_back("(Intercept)");
    for (const Term& t : spec.fixed_terms) design.colnames.push_back(t.name());

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = design.rows[i];
        design.y(i) = table.number(r, spec.response);
        design.X(i, 0) = 1.0;
        for (std::size_t t = 0; t < spec.fixed_terms.size(); ++t) {
            double prod = 1.0;
            for (const std::string& f : spec.fixed_terms[t].factors)
                prod *= value_of(r, f);
            design.X(i, t + 1) = prod;
        }
    }

    if (spec.random_intercept) {
        std::map<std::string, int> level_index;
        design.group.reserve(n);
        for (std::size_t r : design.rows) {
            const std::string key = cell_key(table, r, *spec.random_intercept);
            auto [it, inserted] =
                level_index.emplace(key, static_cast<int>(design.group_levels.size()));
            if (inserted) design.group_levels.push_back(key);
            design.group.push_back(it->second);
        }
    }
    return design;
}

} // namespace inkscore
