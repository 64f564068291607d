#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inkscore/lmm.hpp"

namespace inkscore {

struct CVReport {
    double r2_test = 0.0;   // mean over folds, 1 - SS_res/SS_tot about test mean
    double cor_test = 0.0;  // mean Spearman(prediction, truth) over folds
    std::vector<double> fold_r2;
    std::vector<double> fold_cor;
    std::map<std::string, int> fold_assignments;  // id -> fold
    std::uint32_t seed = 0;
    int n_folds = 0;
    std::size_t n_rows = 0;  // rows that entered the folds
};

// Stratified k-fold CV: rows are dealt round-robin within each stratum after
// a seeded shuffle, so per-stratum fold counts differ by at most one. Each
// fold is predicted with the training fold's scaler and BLUPs.
CVReport cross_validate(const ModelSpec& spec, const MetricsTable& table,
                        int n_folds, const std::string& stratify_by,
                        std::uint32_t seed, bool standardize = true,
                        const std::string& id_column = "drawing_id");

struct RankedModel {
    ModelSpec spec;
    FitResult fit;
};

struct ModelRanking {
    std::vector<RankedModel> ranked;  // ascending BIC
    std::vector<std::string> notices; // specs that failed to fit, with reasons
};

// Full-data ML fits over the rows every spec can use (intersection of
// complete cases), ranked by BIC.
ModelRanking compare_models(const std::vector<ModelSpec>& specs,
                            const MetricsTable& table, bool standardize = true);

// Variance inflation factors for predictor columns (no intercept column in
// `X`; the internal regressions add one). A perfectly collinear column comes
// back as +infinity.
std::vector<double> vif(const Eigen::MatrixXd& X);

// VIFs for a built design, skipping its intercept column.
std::vector<double> design_vifs(const DesignMatrix& design);

struct CoefficientRow {
    std::string term;
    double beta = 0.0;
    double p = 1.0;
    bool significant = false;  // p < 0.01
    double vif = 1.0;
};

struct CombinedModelReport {
    std::vector<std::string> responses;
    std::vector<std::vector<CoefficientRow>> coefficients;  // per response
    std::vector<FitResult> fits;                            // per response
    std::optional<std::string> random_intercept;            // as fitted
    std::size_t n_rows = 0;
};

// One predictor set, several responses (the paper-style side-by-side
// coefficient table). All responses are fitted on the same rows with
// standardized predictors.
CombinedModelReport combined_model_report(
    const std::vector<Term>& predictors,
    const std::vector<std::string>& responses, const MetricsTable& table,
    const std::optional<std::string>& random_intercept);

} // namespace inkscore
