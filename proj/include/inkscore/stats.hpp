#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "inkscore/errors.hpp"

namespace inkscore {

/// Complete subjects x raters score matrix.
struct RatingsMatrix {
    std::size_t n_subjects = 0;
    std::size_t n_raters = 0;
    std::vector<double> values; // row-major, subjects x raters

    double at(std::size_t subject, std::size_t rater) const {
        return values[subject * n_raters + rater];
    }
};

struct KWResult {
    double H = 0.0;
    int df = 0;
    double p = 1.0;
    std::vector<std::size_t> group_ns;
};

struct SpearmanResult {
    double rho = 0.0;
    double p = 1.0;
};

struct PairwiseTest {
    std::size_t a = 0; // group indices
    std::size_t b = 0;
    double U = 0.0;
    double p_adjusted = 1.0;
    bool significant = false; // p_adjusted < 0.01
};

struct GroupSummary {
    std::string key;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
    std::size_t missing = 0;
};

// -- scale / agreement ------------------------------------------------------

/// (x - min) / (max - min). Throws "zero range" on constant input.
std::vector<double> min_max_normalize(const std::vector<double>& xs);

/// Two-way mixed, consistency, average-measures ICC: (MSR - MSE) / MSR from
/// the two-way ANOVA without replication. Values <= 0 are reported as-is.
double icc_average_fixed(const RatingsMatrix& m);

/// Pearson correlation of mid-ranks; p from the t-approximation with n-2 df.
/// Throws "undefined correlation" when either vector is constant.
SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y);

// -- nonparametric group comparison ------------------------------------------

/// Rank-based H with tie correction; p from chi-square with (g-1) df.
/// All-identical values yield H = 0, p = 1.
KWResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct MannWhitneyResult {
    double U = 0.0; // statistic of the first group
    double p = 1.0; // two-sided, tie-corrected normal approximation
};
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

/// Mann-Whitney U per group pair with Bonferroni-adjusted p; stars at p < 0.01.
std::vector<PairwiseTest> pairwise_group_tests(const std::vector<std::vector<double>>& groups);

/// Per-key mean and sample sd, NaN values skipped and counted as missing.
/// Empty keys are omitted.
std::vector<GroupSummary> group_summary(const std::vector<std::string>& keys,
                                        const std::vector<double>& values);

// -- distribution tails -------------------------------------------------------

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Upper tail of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double x, double df);
/// Two-sided tail of Student's t with df degrees of freedom.
double student_t_sf_two_sided(double t, double df);
/// Standard normal upper tail.
double normal_sf(double z);

// -- shared helpers -----------------------------------------------------------

/// Mid-ranks (average ranks for ties), 1-based.
std::vector<double> mid_ranks(const std::vector<double>& xs);

} // namespace inkscore
