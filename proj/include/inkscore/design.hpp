#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "inkscore/formula.hpp"
#include "inkscore/table.hpp"

namespace inkscore {

// Per-variable centering/scaling captured on training rows so test rows can
// be transformed with the same statistics.
struct DesignScaler {
    std::map<std::string, std::pair<double, double>> stats;  // var -> (mean, sd)
};

struct DesignMatrix {
    Eigen::MatrixXd X;                  // n x p, column 0 is the intercept
    Eigen::VectorXd y;
    std::vector<std::string> colnames;  // "(Intercept)", then term names
    std::vector<int> group;             // row -> level index; empty without random term
    std::vector<std::string> group_levels;  // level index -> name
    std::vector<std::size_t> rows;      // source table row per design row
    std::size_t n_dropped = 0;          // rows lost to missing values
    DesignScaler scaler;
    bool standardized = false;
};

// Assembles X/y/groups for a model. Rows with any missing referenced value
// are dropped (and counted). With `standardize`, every variable is z-scored
// before terms are formed, so interaction columns are products of z-scores;
// pass `apply_scaler` to reuse training statistics on held-out rows.
// `row_subset` restricts the build to the given table rows.
DesignMatrix build_design(const ModelSpec& spec, const MetricsTable& table,
                          bool standardize,
                          const DesignScaler* apply_scaler = nullptr,
                          const std::vector<std::size_t>* row_subset = nullptr);

} // namespace inkscore
