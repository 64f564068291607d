#include "inkscore/lmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "inkscore/stats.hpp"

namespace inkscore {

namespace {

// Everything about the data the profile likelihood needs, accumulated once.
struct Sufficient {
    Eigen::MatrixXd XtX;
    Eigen::VectorXd Xty;
    double yty = 0.0;
    std::vector<double> group_n;          // observations per level
    std::vector<Eigen::VectorXd> group_sx; // sum of rows of X per level
    std::vector<double> group_sy;          // sum of y per level
    std::size_t n = 0;
    std::size_t p = 0;
};

struct Profile {
    Eigen::VectorXd beta;
    Eigen::MatrixXd A;        // X' V^-1 X (V = I + lambda Z Z')
    double sigma2 = 0.0;
    double loglik = 0.0;
    bool singular = false;
};

Profile evaluate(const Sufficient& s, double lambda) {
    Profile prof;
    Eigen::MatrixXd A = s.XtX;
    Eigen::VectorXd b = s.Xty;
    double q = s.yty;
    double logdet_v = 0.0;
    for (std::size_t j = 0; j < s.group_n.size(); ++j) {
        const double nj = s.group_n[j];
        const double c = lambda / (1.0 + lambda * nj);
        if (c != 0.0) {
            A.noalias() -= c * s.group_sx[j] * s.group_sx[j].transpose();
            b.noalias() -= c * s.group_sy[j] * s.group_sx[j];
            q -= c * s.group_sy[j] * s.group_sy[j];
        }
        logdet_v += std::log1p(lambda * nj);
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) {
        prof.singular = true;
        prof.loglik = -std::numeric_limits<double>::infinity();
        return prof;
    }
    prof.A = std::move(A);
    prof.beta = lu.solve(b);
    const double rss_v = std::max(q - prof.beta.dot(b), 0.0);
    prof.sigma2 = rss_v / static_cast<double>(s.n);
    const double n = static_cast<double>(s.n);
    prof.loglik = -0.5 * n * std::log(2.0 * std::numbers::pi *
                                      std::max(prof.sigma2, 1e-300)) -
                  0.5 * logdet_v - 0.5 * n;
    return prof;
}

} // namespace

FitResult fit_lmm(const DesignMatrix& design) {
    const std::size_t n = static_cast<std::size_t>(design.X.rows());
    const std::size_t p = static_cast<std::size_t>(design.X.cols());
    if (n <= p + 1)
        throw Error("fit_lmm: need n > p + 1 (" + std::to_string(n) + " rows, " +
                    std::to_string(p) + " columns)");

    Sufficient s;
    s.n = n;
    s.p = p;
    s.XtX = design.X.transpose() * design.X;
    s.Xty = design.X.transpose() * design.y;
    s.yty = design.y.squaredNorm();

    const std::size_t n_levels = design.group_levels.size();
    const bool mixed = !design.group.empty() && n_levels >= 2;
    if (mixed) {
        s.group_n.assign(n_levels, 0.0);
        s.group_sx.assign(n_levels, Eigen::VectorXd::Zero(p));
        s.group_sy.assign(n_levels, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const int g = design.group[i];
            s.group_n[g] += 1.0;
            s.group_sx[g] += design.X.row(i).transpose();
            s.group_sy[g] += design.y(i);
        }
    }

    double lambda = 0.0;
    Profile best = evaluate(s, 0.0);
    if (best.singular) throw Error("fit_lmm: rank-deficient design");

    if (mixed) {
        // Golden-section maximization of the profile log-likelihood.
        constexpr double kHi = 1e4;
        constexpr double kTol = 1e-8;
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = 0.0, b = kHi;
        double c = b - phi * (b - a);
        double d = a + phi * (b - a);
        double fc = evaluate(s, c).loglik;
        double fd = evaluate(s, d).loglik;
        while (b - a > kTol) {
            if (fc >= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = evaluate(s, c).loglik;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = evaluate(s, d).loglik;
            }
        }
        const double mid = 0.5 * (a + b);
        // The boundary lambda = 0 (pure OLS) and the far end compete with
        // the interior optimum.
        for (double cand : {mid, kHi}) {
            const Profile prof = evaluate(s, cand);
            if (!prof.singular && prof.loglik > best.loglik) {
                best = prof;
                lambda = cand;
            }
        }
        if (best.singular) throw Error("fit_lmm: rank-deficient design");
    }

    FitResult fit;
    fit.n = n;
    fit.term_names = design.colnames;
    fit.betas.assign(best.beta.data(), best.beta.data() + p);
    fit.sigma2 = best.sigma2;
    fit.tau2 = lambda * best.sigma2;
    fit.loglik = best.loglik;
    fit.bic = static_cast<double>(p + 2) * std::log(static_cast<double>(n)) -
              2.0 * fit.loglik;
    fit.converged = true;

    if (mixed) {
        fit.group_levels = design.group_levels;
        fit.group_intercepts.assign(n_levels, 0.0);
        if (lambda > 0.0) {
            const Eigen::VectorXd resid = design.y - design.X * best.beta;
            std::vector<double> rsum(n_levels, 0.0);
            for (std::size_t i = 0; i < n; ++i) rsum[design.group[i]] += resid(i);
            for (std::size_t j = 0; j < n_levels; ++j)
                fit.group_intercepts[j] =
                    lambda * rsum[j] / (1.0 + lambda * s.group_n[j]);
        }
    }

    // Wald z per coefficient from the profiled covariance sigma2 * A^-1.
    const Eigen::MatrixXd cov =
        fit.sigma2 * best.A.fullPivLu().inverse();
    fit.coef_p.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        const double var = std::max(cov(k, k), 0.0);
        const double se = std::sqrt(var);
        if (se == 0.0) {
            fit.coef_p[k] = fit.betas[k] == 0.0 ? 1.0 : 0.0;
        } else {
            fit.coef_p[k] = 2.0 * normal_sf(std::abs(fit.betas[k]) / se);
        }
    }
    return fit;
}

std::vector<double> predict(const FitResult& fit, const DesignMatrix& design,
                            bool include_random) {
    const std::size_t p = fit.betas.size();
    if (static_cast<std::size_t>(design.X.cols()) != p)
        throw Error("predict: design has " + std::to_string(design.X.cols()) +
                    " columns, fit expects " + std::to_string(p));
    const Eigen::Map<const Eigen::VectorXd> beta(fit.betas.data(), p);
    Eigen::VectorXd yhat = design.X * beta;

    // tau2 == 0 means every BLUP is zero; the flag cannot matter then.
    if (include_random && fit.tau2 > 0.0 && !fit.group_levels.empty()) {
        if (design.group.empty())
            throw Error("predict: fit has a random intercept but the design has no groups");
        for (std::size_t i = 0; i < static_cast<std::size_t>(yhat.size()); ++i) {
            const std::string& level = design.group_levels[design.group[i]];
            const auto it = std::find(fit.group_levels.begin(),
                                      fit.group_levels.end(), level);
            if (it == fit.group_levels.end())
                throw Error("predict: unseen group level '" + level + "'");
            yhat(i) += fit.group_intercepts[it - fit.group_levels.begin()];
        }
    }
    return std::vector<double>(yhat.data(), yhat.data() + yhat.size());
}

} // namespace inkscore
