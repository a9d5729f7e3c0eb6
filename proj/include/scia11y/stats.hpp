#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "scia11y/errors.hpp"

namespace scia11y::stats {

// Special functions are evaluated by series/continued fractions; iteration
// stops below 1e-12 relative change, comfortably inside the 1e-10 contract.
inline constexpr double kRelTol = 1e-14;
inline constexpr int kMaxIterations = 1000;

namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kRelTol) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for the upper tail.
inline double gamma_q_continued_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kRelTol) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double beta_continued_fraction(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kRelTol) break;
    }
    return h;
}

} // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

// Regularized upper incomplete gamma Q(a, x).
inline double regularized_gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_continued_fraction(a, x);
}

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-tailed p for Student's t with `dof` degrees of freedom.
inline double student_t_two_tailed_p(double t, double dof) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

// Upper-tail p for the F distribution with (d1, d2) degrees of freedom.
inline double f_upper_tail_p(double f, double d1, double d2) {
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

// Upper-tail p for the chi-squared distribution.
inline double chi_squared_upper_tail_p(double x, double dof) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return regularized_gamma_q(dof / 2.0, x / 2.0);
}

enum class StatKind { PearsonR, AnovaF, KruskalWallisH };

inline const char* stat_kind_name(StatKind kind) {
    switch (kind) {
    case StatKind::PearsonR: return "pearson_r";
    case StatKind::AnovaF: return "anova_f";
    case StatKind::KruskalWallisH: return "kruskal_wallis_h";
    }
    return "unknown";
}

struct StatResult {
    StatKind kind = StatKind::PearsonR;
    double value = std::numeric_limits<double>::quiet_NaN();
    double p_value = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::size_t> group_sizes;
    bool degenerate = false; // value/p undefined for this input
    std::string note;
};

// Pearson correlation with a two-tailed p from t = r*sqrt((n-2)/(1-r^2)).
inline StatResult pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw LengthMismatchError("pearson_r inputs differ in length (" +
                                  std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    }
    const std::size_t n = x.size();
    if (n < 3) throw DegenerateInputError("pearson_r requires at least 3 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateInputError("pearson_r input has zero variance");
    }
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);

    StatResult result;
    result.kind = StatKind::PearsonR;
    result.value = r;
    result.group_sizes = {n};
    double one_minus_r2 = 1.0 - r * r;
    if (one_minus_r2 <= 0.0) {
        result.p_value = 0.0;
    } else {
        double t = r * std::sqrt((static_cast<double>(n) - 2.0) / one_minus_r2);
        result.p_value = student_t_two_tailed_p(t, static_cast<double>(n) - 2.0);
    }
    return result;
}

// One-way ANOVA F with (k-1, N-k) degrees of freedom. Zero within-group
// variance with positive between-group variance gives F = +inf, p = 0; zero
// variance everywhere is reported as degenerate.
inline StatResult anova_f(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw DegenerateInputError("anova_f requires at least 2 groups");
    std::size_t total_n = 0;
    for (const auto& g : groups) {
        if (g.empty()) throw DegenerateInputError("anova_f groups must be nonempty");
        total_n += g.size();
    }
    const std::size_t k = groups.size();
    if (total_n <= k) throw DegenerateInputError("anova_f requires more observations than groups");

    double grand_sum = 0.0;
    for (const auto& g : groups) {
        for (double v : g) grand_sum += v;
    }
    double grand_mean = grand_sum / static_cast<double>(total_n);

    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        double mean = 0.0;
        for (double v : g) mean += v;
        mean /= static_cast<double>(g.size());
        double diff = mean - grand_mean;
        ss_between += static_cast<double>(g.size()) * diff * diff;
        for (double v : g) ss_within += (v - mean) * (v - mean);
    }

    StatResult result;
    result.kind = StatKind::AnovaF;
    for (const auto& g : groups) result.group_sizes.push_back(g.size());

    double df_between = static_cast<double>(k) - 1.0;
    double df_within = static_cast<double>(total_n - k);
    if (ss_within == 0.0) {
        if (ss_between == 0.0) {
            result.degenerate = true;
            result.note = "zero within-group and between-group variance";
            return result;
        }
        result.value = std::numeric_limits<double>::infinity();
        result.p_value = 0.0;
        return result;
    }
    result.value = (ss_between / df_between) / (ss_within / df_within);
    result.p_value = f_upper_tail_p(result.value, df_between, df_within);
    return result;
}

// Kruskal-Wallis H with averaged ranks over ties and the standard tie
// correction; p from chi-squared with k-1 degrees of freedom.
inline StatResult kruskal_wallis_h(const std::vector<std::vector<double>>& groups) {
    std::vector<const std::vector<double>*> nonempty;
    for (const auto& g : groups) {
        if (!g.empty()) nonempty.push_back(&g);
    }
    if (nonempty.size() < 2) {
        throw DegenerateInputError("kruskal_wallis_h requires at least 2 nonempty groups");
    }

    struct Tagged {
        double value;
        std::size_t group;
    };
    std::vector<Tagged> pooled;
    for (std::size_t g = 0; g < nonempty.size(); ++g) {
        for (double v : *nonempty[g]) pooled.push_back({v, g});
    }
    const std::size_t total_n = pooled.size();
    std::sort(pooled.begin(), pooled.end(),
              [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

    std::vector<double> rank_sums(nonempty.size(), 0.0);
    double tie_sum = 0.0;
    std::size_t i = 0;
    while (i < total_n) {
        std::size_t j = i;
        while (j < total_n && pooled[j].value == pooled[i].value) ++j;
        double tie_count = static_cast<double>(j - i);
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) rank_sums[pooled[t].group] += avg_rank;
        if (j - i > 1) tie_sum += tie_count * (tie_count * tie_count - 1.0);
        i = j;
    }

    double n = static_cast<double>(total_n);
    double correction = 1.0 - tie_sum / (n * n * n - n);
    if (correction <= 0.0) {
        throw DegenerateInputError("kruskal_wallis_h input values are all identical");
    }

    double sum_term = 0.0;
    for (std::size_t g = 0; g < nonempty.size(); ++g) {
        double ng = static_cast<double>(nonempty[g]->size());
        sum_term += rank_sums[g] * rank_sums[g] / ng;
    }
    double h = 12.0 / (n * (n + 1.0)) * sum_term - 3.0 * (n + 1.0);
    h /= correction;

    StatResult result;
    result.kind = StatKind::KruskalWallisH;
    for (const auto* g : nonempty) result.group_sizes.push_back(g->size());
    result.value = h;
    result.p_value = chi_squared_upper_tail_p(h, static_cast<double>(nonempty.size()) - 1.0);
    return result;
}

} // namespace scia11y::stats
