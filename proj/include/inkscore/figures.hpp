#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inkscore/config.hpp"

namespace inkscore {

// Five-number summary with Tukey whiskers: whiskers reach the most extreme
// points within 1.5*IQR of the box; anything beyond is an outlier dot.
// Quartiles use linear interpolation between order statistics.
struct BoxStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
    std::vector<double> outliers;  // input order
};

BoxStats box_stats(const std::vector<double>& values);

// Interpolated quantile of a sorted sample, p in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double p);

struct FigureOutcome {
    std::vector<std::string> written;  // paths, in emission order
    std::vector<std::string> notices;  // skipped figures and why
};

// Renders the report bundle to SVG files plus plain-text data tables:
// one boxplot per compared metric (with significance brackets from the
// pairwise tests), a flexibility boxplot, and the caption dendrogram.
// Output depends only on the bundle; identical bundles give identical bytes.
FigureOutcome emit_figures(const nlohmann::ordered_json& report,
                           const std::string& out_dir);

// Loads report.json from cfg.out_dir and emits into its figures/ directory.
FigureOutcome run_figures(const RunConfig& cfg);

} // namespace inkscore
