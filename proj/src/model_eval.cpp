#include "inkscore/model_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "inkscore/stats.hpp"

namespace inkscore {

namespace {

void seeded_shuffle_sizes(std::vector<std::size_t>& xs, std::mt19937& rng) {
    for (std::size_t i = xs.size(); i > 1; --i) {
        const std::uint32_t bound = static_cast<std::uint32_t>(i);
        const std::uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
        std::uint32_t r;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(xs[i - 1], xs[r % bound]);
    }
}

bool all_equal(const std::vector<double>& xs) {
    for (double x : xs)
        if (x != xs.front()) return false;
    return true;
}

std::string row_id(const MetricsTable& table, std::size_t row,
                   const std::string& id_column) {
    if (table.has_column(id_column) &&
        table.column_type(id_column) == ColumnType::text &&
        table.present(row, id_column))
        return table.text(row, id_column);
    return std::to_string(row);
}

} // namespace

CVReport cross_validate(const ModelSpec& spec, const MetricsTable& table,
                        int n_folds, const std::string& stratify_by,
                        std::uint32_t seed, bool standardize,
                        const std::string& id_column) {
    if (n_folds < 2) throw Error("cross_validate: need at least 2 folds");
    if (!table.has_column(stratify_by))
        throw Error("cross_validate: no such column '" + stratify_by + "'");

    // Complete-case rows for this model; the scaling here is irrelevant,
    // only the row list is used.
    const DesignMatrix full = build_design(spec, table, false);

    // Strata in sorted key order, rows dealt round-robin after a shuffle.
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t r : full.rows) {
        if (!table.present(r, stratify_by))
            throw Error("cross_validate: missing stratum for row " + std::to_string(r));
        const std::string key =
            table.column_type(stratify_by) == ColumnType::text
                ? table.text(r, stratify_by)
                : format_double(table.number(r, stratify_by));
        strata[key].push_back(r);
    }
    for (const auto& [key, rows] : strata)
        if (static_cast<int>(rows.size()) < n_folds)
            throw Error("cross_validate: stratification impossible, stratum '" +
                        key + "' has " + std::to_string(rows.size()) +
                        " rows for " + std::to_string(n_folds) + " folds");

    CVReport report;
    report.seed = seed;
    report.n_folds = n_folds;
    report.n_rows = full.rows.size();

    std::map<std::size_t, int> fold_of;
    std::mt19937 rng(seed);
    for (auto& [key, rows] : strata) {
        seeded_shuffle_sizes(rows, rng);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const int fold = static_cast<int>(i % n_folds);
            fold_of[rows[i]] = fold;
            report.fold_assignments[row_id(table, rows[i], id_column)] = fold;
        }
    }

    for (int f = 0; f < n_folds; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t r : full.rows)
            (fold_of[r] == f ? test_rows : train_rows).push_back(r);

        const DesignMatrix train =
            build_design(spec, table, standardize, nullptr, &train_rows);
        const DesignMatrix test =
            build_design(spec, table, standardize,
                         train.standardized ? &train.scaler : nullptr, &test_rows);

        const FitResult fit = fit_lmm(train);
        const std::vector<double> pred = predict(fit, test, true);
        std::vector<double> truth(test.y.data(), test.y.data() + test.y.size());

        double mean = 0.0;
        for (double t : truth) mean += t;
        mean /= truth.size();
        double ss_res = 0.0, ss_tot = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
            ss_tot += (truth[i] - mean) * (truth[i] - mean);
        }
        double r2;
        if (ss_tot == 0.0)
            r2 = ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
        else
            r2 = 1.0 - ss_res / ss_tot;
        report.fold_r2.push_back(r2);

        // A constant vector has no rank ordering; report 0 rather than fail.
        const double cor = (all_equal(pred) || all_equal(truth))
                               ? 0.0
                               : spearman(pred, truth).rho;
        report.fold_cor.push_back(cor);
    }

    for (double v : report.fold_r2) report.r2_test += v;
    report.r2_test /= report.fold_r2.size();
    for (double v : report.fold_cor) report.cor_test += v;
    report.cor_test /= report.fold_cor.size();
    return report;
}

ModelRanking compare_models(const std::vector<ModelSpec>& specs,
                            const MetricsTable& table, bool standardize) {
    ModelRanking ranking;

    // Rows usable by every spec, so BICs share one likelihood surface.
    std::vector<std::size_t> common;
    bool first = true;
    std::vector<bool> usable(specs.size(), true);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        try {
            const DesignMatrix d = build_design(specs[i], table, false);
            std::set<std::size_t> rows(d.rows.begin(), d.rows.end());
            if (first) {
                common = d.rows;
                first = false;
            } else {
                std::vector<std::size_t> next;
                for (std::size_t r : common)
                    if (rows.count(r)) next.push_back(r);
                common = std::move(next);
            }
        } catch (const Error& e) {
            usable[i] = false;
            ranking.notices.push_back("model '" + render_formula(specs[i]) +
                                      "' excluded: " + e.what());
        }
    }

    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!usable[i]) continue;
        try {
            const DesignMatrix d =
                build_design(specs[i], table, standardize, nullptr, &common);
            ranking.ranked.push_back({specs[i], fit_lmm(d)});
        } catch (const Error& e) {
            ranking.notices.push_back("model '" + render_formula(specs[i]) +
                                      "' excluded: " + e.what());
        }
    }

    std::stable_sort(ranking.ranked.begin(), ranking.ranked.end(),
                     [](const RankedModel& a, const RankedModel& b) {
                         return a.fit.bic < b.fit.bic;
                     });
    return ranking;
}

std::vector<double> vif(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n <= p + 1) throw Error("vif: need n > p + 1");

    std::vector<double> out(p, 1.0);
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::MatrixXd M(n, p);  // intercept + the other columns
        M.col(0).setOnes();
        Eigen::Index c = 1;
        for (Eigen::Index k = 0; k < p; ++k)
            if (k != j) M.col(c++) = X.col(k);

        const Eigen::VectorXd target = X.col(j);
        const Eigen::VectorXd coef = M.colPivHouseholderQr().solve(target);
        const double rss = (target - M * coef).squaredNorm();
        const double mean = target.mean();
        const double tss = (target.array() - mean).square().sum();
        if (tss == 0.0) {
            out[j] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double r2 = std::clamp(1.0 - rss / tss, 0.0, 1.0);
        out[j] = 1.0 - r2 < 1e-12 ? std::numeric_limits<double>::infinity()
                                  : 1.0 / (1.0 - r2);
    }
    return out;
}

std::vector<double> design_vifs(const DesignMatrix& design) {
    const Eigen::Index p = design.X.cols();
    if (p <= 1) return {};
    return vif(design.X.rightCols(p - 1));
}

CombinedModelReport combined_model_report(
    const std::vector<Term>& predictors,
    const std::vector<std::string>& responses, const MetricsTable& table,
    const std::optional<std::string>& random_intercept) {
    if (responses.empty()) throw Error("combined_model_report: no responses");

    std::vector<ModelSpec> specs;
    for (const std::string& r : responses) {
        ModelSpec spec;
        spec.response = r;
        spec.fixed_terms = predictors;
        spec.random_intercept = random_intercept;
        specs.push_back(std::move(spec));
    }

    // One shared row set across responses.
    std::vector<std::size_t> common;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const DesignMatrix d = build_design(specs[i], table, false);
        if (i == 0) {
            common = d.rows;
        } else {
            std::set<std::size_t> rows(d.rows.begin(), d.rows.end());
            std::vector<std::size_t> next;
            for (std::size_t r : common)
                if (rows.count(r)) next.push_back(r);
            common = std::move(next);
        }
    }
    if (common.empty())
        throw Error("combined_model_report: no rows shared by all responses");

    CombinedModelReport report;
    report.responses = responses;
    report.random_intercept = random_intercept;
    report.n_rows = common.size();

    for (const ModelSpec& spec : specs) {
        const DesignMatrix d = build_design(spec, table, true, nullptr, &common);
        const std::vector<double> vifs = design_vifs(d);
        for (double v : vifs)
            if (std::isinf(v))
                throw Error("combined_model_report: perfectly collinear predictors");
        const FitResult fit = fit_lmm(d);

        std::vector<CoefficientRow> rows;
        for (std::size_t k = 1; k < fit.betas.size(); ++k) {
            CoefficientRow row;
            row.term = fit.term_names[k];
            row.beta = fit.betas[k];
            row.p = fit.coef_p[k];
            row.significant = row.p < 0.01;
            row.vif = vifs[k - 1];
            rows.push_back(std::move(row));
        }
        report.coefficients.push_back(std::move(rows));
        report.fits.push_back(fit);
    }
    return report;
}

} // namespace inkscore
