#pragma once

#include <string>
#include <vector>

#include "inkscore/design.hpp"

namespace inkscore {

// Gaussian linear model with one optional random intercept, fitted by
// maximum likelihood: y ~ N(Xb, sigma2*I + tau2*Z*Z').
struct FitResult {
    std::vector<double> betas;
    std::vector<std::string> term_names;    // aligned with betas
    double tau2 = 0.0;                      // random-intercept variance
    double sigma2 = 0.0;                    // residual variance (ML)
    std::vector<double> group_intercepts;   // BLUPs, aligned with group_levels
    std::vector<std::string> group_levels;
    double loglik = 0.0;
    double bic = 0.0;                       // (|betas|+2)*ln(n) - 2*loglik
    std::size_t n = 0;
    std::vector<double> coef_p;             // Wald z p-values, aligned with betas
    bool converged = true;
};

// The variance ratio lambda = tau2/sigma2 is profiled out and maximized by
// golden-section search on [0, 1e4] (tolerance 1e-8), with both interval ends
// checked explicitly; beta and sigma2 have closed forms given lambda. Fewer
// than two group levels (or no random term) collapses to ordinary least
// squares at lambda = 0.
FitResult fit_lmm(const DesignMatrix& design);

// X*beta, plus each row's group BLUP when include_random and the fit has a
// positive tau2. A group level the fit never saw is an error.
std::vector<double> predict(const FitResult& fit, const DesignMatrix& design,
                            bool include_random);

} // namespace inkscore
