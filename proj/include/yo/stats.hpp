#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "yo/errors.hpp"
#include "yo/rng.hpp"

namespace yo::stats {

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;  // sample (n-1); 0 when n == 1
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
    std::optional<double> cv;  // std/mean, absent when mean == 0
};

struct TestResult {
    double t = 0.0;
    double p_value = 1.0;  // two-sided
    double cohens_d = 0.0;
    double dof = 0.0;
};

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw InvalidInput("mean: empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw InvalidInput("variance: need at least 2 values");
    const double m = mean(xs);
    double ss = 0.0;
    for (double v : xs) ss += (v - m) * (v - m);
    return ss / static_cast<double>(xs.size() - 1);
}

inline double median(std::span<const double> xs) {
    if (xs.empty()) throw InvalidInput("median: empty sample");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline SampleSummary summarize(std::span<const double> xs) {
    if (xs.empty()) throw InvalidInput("summarize: empty sample");
    SampleSummary s;
    s.n = xs.size();
    s.mean = mean(xs);
    s.std = xs.size() > 1 ? std::sqrt(variance(xs)) : 0.0;
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    s.min = *lo;
    s.max = *hi;
    s.median = median(xs);
    if (s.mean != 0.0) s.cv = s.std / s.mean;
    return s;
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 500;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidInput("incomplete_beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided tail P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
inline double students_t_two_sided(double t, double dof) {
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

inline double students_t_cdf(double t, double dof) {
    const double tail = 0.5 * students_t_two_sided(t, dof);
    return t < 0.0 ? tail : 1.0 - tail;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// (mean_a - mean_b) / pooled std.
inline double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw InvalidInput("cohens_d: both samples need n >= 2");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = std::sqrt(((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0));
    if (pooled == 0.0) throw DegenerateInput("cohens_d: pooled standard deviation is zero");
    return (mean(a) - mean(b)) / pooled;
}

/// Welch two-sample t-test; p_value is two-sided.
inline TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw InvalidInput("welch_t_test: both samples need n >= 2");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = variance(a) / na, vb = variance(b) / nb;
    if (va + vb == 0.0) throw DegenerateInput("welch_t_test: both samples have zero variance");
    TestResult r;
    r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
    r.dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p_value = students_t_two_sided(r.t, r.dof);
    r.cohens_d = cohens_d(a, b);
    return r;
}

/// One-sided Welch p-value for the alternative mean(a) < mean(b).
inline double welch_p_less(std::span<const double> a, std::span<const double> b) {
    const auto r = welch_t_test(a, b);
    return students_t_cdf(r.t, r.dof);
}

struct MannWhitneyResult {
    double u = 0.0;        // U statistic of sample a
    double z = 0.0;        // normal approximation, continuity-corrected
    double p_less = 1.0;   // one-sided: a tends to be smaller than b
};

/// Mann-Whitney U with tie-corrected normal approximation.
inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InvalidInput("mann_whitney_u: empty sample");
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;
    std::vector<std::pair<double, bool>> pooled;
    pooled.reserve(n);
    for (double v : a) pooled.emplace_back(v, true);
    for (double v : b) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

    double rank_sum_a = 0.0, tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (pooled[k].second) rank_sum_a += avg_rank;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double dna = static_cast<double>(na), dnb = static_cast<double>(nb), dn = static_cast<double>(n);
    MannWhitneyResult r;
    r.u = rank_sum_a - dna * (dna + 1.0) / 2.0;
    const double mu = dna * dnb / 2.0;
    const double sigma = std::sqrt(dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0))));
    if (sigma == 0.0) throw DegenerateInput("mann_whitney_u: all values tied");
    r.z = (r.u - mu + 0.5) / sigma;
    r.p_less = normal_cdf(r.z);
    return r;
}

/// Fraction of paired bootstrap resamples in which CV(a*) > CV(b*).
inline double bootstrap_cv_greater(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                                   std::uint64_t seed) {
    if (a.size() < 2 || b.size() < 2) throw InvalidInput("bootstrap_cv_greater: both samples need n >= 2");
    RngStream rng(seed, 0xb007);
    std::vector<double> ra(a.size()), rb(b.size());
    auto cv_of = [](const std::vector<double>& xs) {
        const double m = mean(xs);
        return m == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(variance(xs)) / m;
    };
    std::size_t wins = 0;
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto& v : ra) v = a[rng.index(a.size())];
        for (auto& v : rb) v = b[rng.index(b.size())];
        if (cv_of(ra) > cv_of(rb)) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(resamples);
}

}  // namespace yo::stats
