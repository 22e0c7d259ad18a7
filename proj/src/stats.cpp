#include "audit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "audit/error.hpp"

namespace audit::stats {

namespace {

double tie_sum(const std::vector<double>& sorted) {
    // sum of t^3 - t over tie groups
    double total = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        double t = static_cast<double>(j - i);
        total += t * t * t - t;
        i = j;
    }
    return total;
}

bool has_ties(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return std::adjacent_find(values.begin(), values.end()) != values.end();
}

// P(rank-sum distribution): ways[k][s] = #subsets of size k of ranks 1..N
// with sum s. Used by the exact Mann-Whitney branch.
std::vector<std::vector<double>> ranksum_counts(int n_total, int k_max, int s_max) {
    std::vector<std::vector<double>> ways(
        static_cast<std::size_t>(k_max) + 1,
        std::vector<double>(static_cast<std::size_t>(s_max) + 1, 0.0));
    ways[0][0] = 1.0;
    for (int rank = 1; rank <= n_total; ++rank) {
        for (int k = std::min(k_max, rank); k >= 1; --k) {
            for (int s = s_max; s >= rank; --s) {
                ways[k][s] += ways[k - 1][s - rank];
            }
        }
    }
    return ways;
}

double two_sided_from_z(double z) {
    return std::min(1.0, 2.0 * (1.0 - normal_cdf(std::fabs(z))));
}

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Regularized incomplete gamma Q(a, x) via series / continued fraction.
double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw AuditError("numeric_error", "gamma_q domain");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // series for P(a,x)
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // continued fraction for Q(a,x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double chi_square_sf(double x, int df) {
    if (x <= 0.0) return 1.0;
    return std::clamp(gamma_q(df / 2.0, x / 2.0), 0.0, 1.0);
}

const char* method_name(Method method) {
    switch (method) {
        case Method::mann_whitney_u: return "mann_whitney_u";
        case Method::kruskal_wallis: return "kruskal_wallis";
        case Method::wilcoxon_signed_rank: return "wilcoxon_signed_rank";
        case Method::mapsswe: return "mapsswe";
        case Method::mcnemar: return "mcnemar";
    }
    return "?";
}

std::vector<double> midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
        i = j;
    }
    return ranks;
}

TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        throw AuditError("empty_sample", "both samples must be non-empty");
    const int n1 = static_cast<int>(a.size());
    const int n2 = static_cast<int>(b.size());
    const int n_total = n1 + n2;

    std::vector<double> combined = a;
    combined.insert(combined.end(), b.begin(), b.end());
    std::vector<double> ranks = midranks(combined);

    double rank_sum_a = 0.0;
    for (int i = 0; i < n1; ++i) rank_sum_a += ranks[static_cast<std::size_t>(i)];
    const double u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;

    TestResult result;
    result.method = Method::mann_whitney_u;
    result.statistic = u;
    result.n = {n1, n2};

    const bool tied = has_ties(combined);
    if (n_total <= 12 && !tied) {
        // exact enumeration over all C(n, n1) rank assignments
        const int s_max = n_total * (n_total + 1) / 2;
        auto ways = ranksum_counts(n_total, n1, s_max);
        const double total = std::exp(log_choose(n_total, n1));
        const int base = n1 * (n1 + 1) / 2;
        double le = 0.0, ge = 0.0;
        const int u_obs = static_cast<int>(std::llround(u));
        for (int s = base; s <= s_max; ++s) {
            int u_val = s - base;
            double w = ways[static_cast<std::size_t>(n1)][static_cast<std::size_t>(s)];
            if (u_val <= u_obs) le += w;
            if (u_val >= u_obs) ge += w;
        }
        result.exact = true;
        result.p_value = std::min(1.0, 2.0 * std::min(le, ge) / total);
        return result;
    }

    const double mu = n1 * static_cast<double>(n2) / 2.0;
    std::vector<double> sorted = combined;
    std::sort(sorted.begin(), sorted.end());
    const double ties = tie_sum(sorted);
    const double var = n1 * static_cast<double>(n2) / 12.0 *
                       ((n_total + 1.0) - ties / (static_cast<double>(n_total) *
                                                  (n_total - 1.0)));
    if (var <= 0.0) {
        result.degenerate = true;
        result.p_value = 1.0;
        return result;
    }
    double diff = u - mu;
    double cc = diff > 0 ? -0.5 : (diff < 0 ? 0.5 : 0.0);   // continuity, toward mean
    result.p_value = two_sided_from_z((diff + cc) / std::sqrt(var));
    return result;
}

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2)
        throw AuditError("too_few_groups", "need at least two groups");
    for (const auto& g : groups)
        if (g.empty()) throw AuditError("empty_sample", "groups must be non-empty");

    std::vector<double> combined;
    for (const auto& g : groups) combined.insert(combined.end(), g.begin(), g.end());
    const double n_total = static_cast<double>(combined.size());
    std::vector<double> ranks = midranks(combined);

    TestResult result;
    result.method = Method::kruskal_wallis;
    for (const auto& g : groups) result.n.push_back(static_cast<int>(g.size()));

    double h = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
        offset += g.size();
        h += rank_sum * rank_sum / static_cast<double>(g.size());
    }
    h = 12.0 / (n_total * (n_total + 1.0)) * h - 3.0 * (n_total + 1.0);

    std::vector<double> sorted = combined;
    std::sort(sorted.begin(), sorted.end());
    const double correction =
        1.0 - tie_sum(sorted) / (n_total * n_total * n_total - n_total);
    if (correction <= 0.0) {
        result.degenerate = true;
        result.statistic = 0.0;
        result.p_value = 1.0;
        return result;
    }
    h /= correction;
    result.statistic = h;
    result.p_value = chi_square_sf(h, static_cast<int>(groups.size()) - 1);
    return result;
}

TestResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> diffs;
    for (const auto& [x, y] : pairs) {
        double d = x - y;
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty())
        throw AuditError("degenerate_pairs", "all differences are zero");

    const int n = static_cast<int>(diffs.size());
    std::vector<double> magnitudes(diffs.size());
    std::transform(diffs.begin(), diffs.end(), magnitudes.begin(),
                   [](double d) { return std::fabs(d); });
    std::vector<double> ranks = midranks(magnitudes);

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i] > 0) w_plus += ranks[i];
        else w_minus += ranks[i];
    }

    TestResult result;
    result.method = Method::wilcoxon_signed_rank;
    result.statistic = w_plus - w_minus;   // negated under x/y swap
    result.n = {n};

    const bool tied = has_ties(magnitudes);
    if (n <= 25 && !tied) {
        // exact distribution of W+ over all 2^n sign patterns
        const int s_max = n * (n + 1) / 2;
        std::vector<double> ways(static_cast<std::size_t>(s_max) + 1, 0.0);
        ways[0] = 1.0;
        for (int rank = 1; rank <= n; ++rank)
            for (int s = s_max; s >= rank; --s) ways[static_cast<std::size_t>(s)] +=
                ways[static_cast<std::size_t>(s - rank)];
        const double total = std::pow(2.0, n);
        const int w_obs = static_cast<int>(std::llround(w_plus));
        double le = 0.0, ge = 0.0;
        for (int s = 0; s <= s_max; ++s) {
            if (s <= w_obs) le += ways[static_cast<std::size_t>(s)];
            if (s >= w_obs) ge += ways[static_cast<std::size_t>(s)];
        }
        result.exact = true;
        result.p_value = std::min(1.0, 2.0 * std::min(le, ge) / total);
        return result;
    }

    const double mu = n * (n + 1.0) / 4.0;
    std::vector<double> sorted = magnitudes;
    std::sort(sorted.begin(), sorted.end());
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_sum(sorted) / 48.0;
    if (var <= 0.0) {
        result.degenerate = true;
        result.p_value = 1.0;
        return result;
    }
    double diff = w_plus - mu;
    double cc = diff > 0 ? -0.5 : (diff < 0 ? 0.5 : 0.0);
    result.p_value = two_sided_from_z((diff + cc) / std::sqrt(var));
    return result;
}

TestResult mapsswe(const std::vector<double>& err_a, const std::vector<double>& err_b) {
    if (err_a.size() != err_b.size())
        throw AuditError("length_mismatch", "paired vectors differ in length");
    const int n = static_cast<int>(err_a.size());
    if (n < 2) throw AuditError("too_few_segments", "need at least two segments");

    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += err_a[static_cast<std::size_t>(i)] -
                                        err_b[static_cast<std::size_t>(i)];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        double d = err_a[static_cast<std::size_t>(i)] -
                   err_b[static_cast<std::size_t>(i)] - mean;
        var += d * d;
    }
    var /= (n - 1.0);   // sample variance

    TestResult result;
    result.method = Method::mapsswe;
    result.n = {n};
    if (var == 0.0) {
        result.degenerate = true;
        result.statistic = 0.0;
        result.p_value = mean == 0.0 ? 1.0 : 0.0;
        return result;
    }
    result.statistic = mean / std::sqrt(var / n);
    result.p_value = two_sided_from_z(result.statistic);
    return result;
}

TestResult mcnemar(int b, int c) {
    if (b < 0 || c < 0) throw AuditError("bad_argument", "counts must be >= 0");
    TestResult result;
    result.method = Method::mcnemar;
    result.n = {b, c};
    result.exact = true;
    if (b + c == 0) {
        result.degenerate = true;
        result.statistic = 0.0;
        result.p_value = 1.0;
        return result;
    }
    const int n = b + c;
    const int k = std::min(b, c);
    double tail = 0.0;
    for (int i = 0; i <= k; ++i)
        tail += std::exp(log_choose(n, i) - n * std::log(2.0));
    result.statistic = static_cast<double>(b);
    result.p_value = std::min(1.0, 2.0 * tail);
    return result;
}

std::vector<double> adjust_pvalues(const std::vector<double>& ps, AdjustMethod method) {
    const std::size_t m = ps.size();
    for (double p : ps)
        if (p < 0.0 || p > 1.0)
            throw AuditError("bad_pvalue", "p-values must lie in [0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return ps[i] < ps[j]; });

    std::vector<double> adjusted(m, 0.0);
    if (method == AdjustMethod::benjamini_hochberg) {
        double running = 1.0;
        for (std::size_t idx = m; idx-- > 0;) {
            double scaled = std::min(1.0, ps[order[idx]] * static_cast<double>(m) /
                                               static_cast<double>(idx + 1));
            running = std::min(running, scaled);
            adjusted[order[idx]] = running;
        }
    } else {
        double running = 0.0;
        for (std::size_t idx = 0; idx < m; ++idx) {
            double scaled =
                std::min(1.0, ps[order[idx]] * static_cast<double>(m - idx));
            running = std::max(running, scaled);
            adjusted[order[idx]] = running;
        }
    }
    return adjusted;
}

}  // namespace audit::stats
