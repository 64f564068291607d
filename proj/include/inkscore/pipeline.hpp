#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inkscore/config.hpp"
#include "inkscore/record.hpp"
#include "inkscore/stats.hpp"
#include "inkscore/table.hpp"

namespace inkscore {

struct DrawingFailure {
    std::string drawing_id;
    std::string error;
};

struct PreprocessOutcome {
    std::size_t n_records = 0;
    std::size_t n_processed = 0;
    std::size_t n_dilated = 0;
    std::optional<double> adult_mean_thickness;
    std::optional<KWResult> thickness_kw;
    std::vector<DrawingFailure> failures;
    std::vector<std::string> warnings;
};

struct MetricsOutcome {
    MetricsTable table;
    std::size_t n_records = 0;
    std::vector<DrawingFailure> failures;
    std::vector<std::string> warnings;
};

// Stage one: binarize, despeckle, resize every drawing (and the stimulus
// images), dilate child/AI strokes toward the adult mean thickness, and write
// processed PNGs plus preprocess_meta.json under out_dir. A drawing that
// cannot be processed is recorded as a failure; the run aborts only when more
// than 1% of drawings fail.
PreprocessOutcome run_preprocess(const RunConfig& cfg);

// Stage two: style metrics, provider embeddings/captions (cache-first),
// content metrics, and the derived score columns. Persists metrics.csv,
// embeddings.jsonl and run_meta.json under out_dir.
MetricsOutcome run_metrics(const RunConfig& cfg);

// Both stages; returns the persisted table.
MetricsTable run_pipeline(const RunConfig& cfg);

// On-disk layout under cfg.out_dir. Everything the pipeline writes is
// deterministic for a fixed seed, manifest and warm cache.
std::string processed_dir(const RunConfig& cfg);
std::string processed_image_path(const RunConfig& cfg, const std::string& drawing_id);
std::string processed_stimulus_path(const RunConfig& cfg, Stimulus s);
std::string metrics_csv_path(const RunConfig& cfg);
std::string embeddings_path(const RunConfig& cfg);
std::string run_meta_path(const RunConfig& cfg);
std::string preprocess_meta_path(const RunConfig& cfg);
std::string report_json_path(const RunConfig& cfg);
std::string report_text_path(const RunConfig& cfg);
std::string figures_dir(const RunConfig& cfg);

// Columns of metrics.csv that stay text even when their cells look numeric.
const std::set<std::string>& metrics_text_columns();

// Loads a previously persisted metrics table.
MetricsTable load_metrics(const RunConfig& cfg);

// Embedding rows persisted alongside the table, keyed by kind
// ("image" | "text" | "stimulus") then id.
struct StoredEmbedding {
    std::string kind;
    std::string id;
    std::string model_id;
    std::vector<double> values;
};
std::vector<StoredEmbedding> load_embeddings(const RunConfig& cfg);

} // namespace inkscore
