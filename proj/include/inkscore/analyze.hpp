#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inkscore/pipeline.hpp"

namespace inkscore {

struct ReportBundle {
    nlohmann::ordered_json json;  // machine-readable, one key per analysis
    std::string text;             // the same content, rendered for reading
};

// Runs the analyses named in cfg.analysis.analyses over a persisted metrics
// table: subgroup comparisons with pairwise tests, rater agreement, model
// ranking/cross-validation plus the combined coefficient table, conceptual
// diversity with caption clustering, and flexibility sets. Sections degrade
// to notices when data is too thin; a missing required column is an error
// naming the column.
ReportBundle analyze(const MetricsTable& table,
                     const std::vector<StoredEmbedding>& embeddings,
                     const RunConfig& cfg);

// Loads metrics.csv and embeddings.jsonl from cfg.out_dir, analyzes, and
// writes report.json + report.txt next to them.
ReportBundle run_analyze(const RunConfig& cfg);

} // namespace inkscore
