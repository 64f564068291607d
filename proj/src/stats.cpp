#include "inkscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace inkscore {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sum of (t^3 - t) over tie groups of the pooled ranks.
double tie_term(std::vector<double> sorted) {
    double term = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        double t = static_cast<double>(j - i);
        term += t * t * t - t;
        i = j;
    }
    return term;
}

} // namespace

double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw Error("gamma_p: invalid arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw Error("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0 || x < 0.0 || x > 1.0)
        throw Error("incomplete_beta: invalid arguments");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double chi_square_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return gamma_q(df / 2.0, x / 2.0);
}

double student_t_sf_two_sided(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    double x = df / (df + t * t);
    return incomplete_beta(df / 2.0, 0.5, x);
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

std::vector<double> mid_ranks(const std::vector<double>& xs) {
    std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && xs[order[j]] == xs[order[i]]) ++j;
        double rank = 0.5 * static_cast<double>(i + 1 + j); // average of i+1 .. j
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

std::vector<double> min_max_normalize(const std::vector<double>& xs) {
    if (xs.empty()) throw Error("min_max_normalize: empty input");
    auto [mn_it, mx_it] = std::minmax_element(xs.begin(), xs.end());
    double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn)) throw Error("zero range");
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - mn) / (mx - mn);
    return out;
}

double icc_average_fixed(const RatingsMatrix& m) {
    std::size_t n = m.n_subjects, k = m.n_raters;
    if (k < 2 || n < 3) throw Error("icc_average_fixed: need >= 2 raters and >= 3 subjects");
    if (m.values.size() != n * k) throw Error("icc_average_fixed: incomplete matrix");

    double grand = 0.0;
    for (double v : m.values) grand += v;
    grand /= static_cast<double>(n * k);

    double ss_rows = 0.0, ss_cols = 0.0, ss_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row_mean = 0.0;
        for (std::size_t j = 0; j < k; ++j) row_mean += m.at(i, j);
        row_mean /= static_cast<double>(k);
        ss_rows += (row_mean - grand) * (row_mean - grand);
    }
    ss_rows *= static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) {
        double col_mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) col_mean += m.at(i, j);
        col_mean /= static_cast<double>(n);
        ss_cols += (col_mean - grand) * (col_mean - grand);
    }
    ss_cols *= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j)
            ss_total += (m.at(i, j) - grand) * (m.at(i, j) - grand);

    double ss_err = ss_total - ss_rows - ss_cols;
    double msr = ss_rows / static_cast<double>(n - 1);
    double mse = ss_err / static_cast<double>((n - 1) * (k - 1));
    if (msr == 0.0)
        return mse == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return (msr - mse) / msr;
}

SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("spearman: length mismatch");
    std::size_t n = x.size();
    if (n < 3) throw Error("spearman: need length >= 3");

    auto rx = mid_ranks(x);
    auto ry = mid_ranks(y);

    double mx = mean_of(rx), my = mean_of(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("undefined correlation");
    double rho = sxy / std::sqrt(sxx * syy);
    rho = std::clamp(rho, -1.0, 1.0);

    double df = static_cast<double>(n - 2);
    double denom = 1.0 - rho * rho;
    double p;
    if (denom <= 0.0) {
        p = 0.0;
    } else {
        double t = rho * std::sqrt(df / denom);
        p = student_t_sf_two_sided(t, df);
    }
    return {rho, p};
}

KWResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw Error("kruskal_wallis: need >= 2 groups");
    std::vector<double> pooled;
    KWResult res;
    for (const auto& g : groups) {
        if (g.empty()) throw Error("kruskal_wallis: empty group");
        res.group_ns.push_back(g.size());
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    std::size_t n = pooled.size();
    if (n < 5) throw Error("kruskal_wallis: need total n >= 5");

    auto ranks = mid_ranks(pooled);
    double nn = static_cast<double>(n);
    double stat = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rsum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rsum += ranks[offset + i];
        stat += rsum * rsum / static_cast<double>(g.size());
        offset += g.size();
    }
    double h = 12.0 / (nn * (nn + 1.0)) * stat - 3.0 * (nn + 1.0);

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double ties = tie_term(std::move(sorted));
    double correction = 1.0 - ties / (nn * nn * nn - nn);
    res.df = static_cast<int>(groups.size()) - 1;
    if (correction <= 0.0) { // every value identical
        res.H = 0.0;
        res.p = 1.0;
        return res;
    }
    res.H = std::max(0.0, h / correction);
    res.p = chi_square_sf(res.H, static_cast<double>(res.df));
    return res;
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw Error("mann_whitney_u: empty group");
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    auto ranks = mid_ranks(pooled);

    double n1 = static_cast<double>(a.size());
    double n2 = static_cast<double>(b.size());
    double r1 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
    double u1 = r1 - n1 * (n1 + 1.0) / 2.0;

    double nn = n1 + n2;
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double ties = tie_term(std::move(sorted));
    double var = n1 * n2 / 12.0 * ((nn + 1.0) - ties / (nn * (nn - 1.0)));
    MannWhitneyResult res;
    res.U = u1;
    if (var <= 0.0) { // all values tied
        res.p = 1.0;
        return res;
    }
    double mu = n1 * n2 / 2.0;
    // continuity correction toward the mean
    double diff = std::fabs(u1 - mu) - 0.5;
    double z = std::max(0.0, diff) / std::sqrt(var);
    res.p = std::min(1.0, 2.0 * normal_sf(z));
    return res;
}

std::vector<PairwiseTest> pairwise_group_tests(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw Error("pairwise_group_tests: need >= 2 groups");
    std::size_t n_pairs = groups.size() * (groups.size() - 1) / 2;
    std::vector<PairwiseTest> out;
    out.reserve(n_pairs);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            auto mw = mann_whitney_u(groups[i], groups[j]);
            PairwiseTest t;
            t.a = i;
            t.b = j;
            t.U = mw.U;
            t.p_adjusted = std::min(1.0, mw.p * static_cast<double>(n_pairs));
            t.significant = t.p_adjusted < 0.01;
            out.push_back(t);
        }
    }
    return out;
}

std::vector<GroupSummary> group_summary(const std::vector<std::string>& keys,
                                        const std::vector<double>& values) {
    if (keys.size() != values.size()) throw Error("group_summary: length mismatch");
    std::map<std::string, std::vector<double>> present;
    std::map<std::string, std::size_t> missing;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (std::isnan(values[i]))
            ++missing[keys[i]];
        else
            present[keys[i]].push_back(values[i]);
    }
    std::vector<GroupSummary> out;
    for (auto& [key, vals] : present) {
        GroupSummary s;
        s.key = key;
        s.n = vals.size();
        s.missing = missing.count(key) ? missing[key] : 0;
        s.mean = mean_of(vals);
        double ss = 0.0;
        for (double v : vals) ss += (v - s.mean) * (v - s.mean);
        s.sd = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace inkscore
