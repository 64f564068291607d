#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inkscore/providers.hpp"
#include "inkscore/record.hpp"
#include "inkscore/style.hpp"

namespace inkscore {

struct PreprocessConfig {
    std::optional<int> fixed_threshold;  // empty = Otsu with fallback
    int min_speck_area = 5;
    int out_size = 400;
    bool match_thickness = true;   // dilate child/AI strokes toward adult mean
    double thickness_tol = 1.0;
};

struct AnalysisConfig {
    std::vector<std::string> analyses = {"group_compare", "agreement", "models",
                                         "diversity", "flexibility"};
    int n_folds = 3;
    std::string stratify_by = "subgroup";
    // Candidate formulas, ranked by BIC per response; defaults follow the
    // two best published models.
    std::vector<std::string> models = {
        "expert ~ (used_stim + hard_to_interpret) * (10NN_text + dist_from_stim) + (1|subgroup)",
        "automated ~ ink_density + dist_from_stim + 10NN_image + (1|subgroup)"};
    bool combined_random_intercept = true;  // reported either way
    std::string combined_random_group = "subgroup";
    int knn_k = 10;
    // Theme granularity: a positive count wins over the distance threshold.
    int cluster_n_themes = 12;
    std::optional<double> cluster_cut_distance;
};

struct RunConfig {
    std::string manifest;
    std::string out_dir = "out";
    std::string cache_dir = "cache";
    std::uint32_t seed = 42;
    bool offline = false;
    std::map<Stimulus, std::string> stimuli;  // stimulus letter -> image path
    PreprocessConfig preprocess;
    HoughParams hough;  // seed follows the run seed unless set explicitly
    bool hough_seed_explicit = false;  // config pinned hough.seed itself
    ProviderConfig image_embedding;
    ProviderConfig text_embedding;
    ProviderConfig caption;
    AnalysisConfig analysis;

    // The configuration as it will be echoed into run metadata; secrets are
    // env-var names only, never values.
    nlohmann::ordered_json echo() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& base_dir);

} // namespace inkscore
