#ifndef AUDIT_STATS_HPP
#define AUDIT_STATS_HPP

#include <string>
#include <utility>
#include <vector>

namespace audit::stats {

enum class Method {
    mann_whitney_u,
    kruskal_wallis,
    wilcoxon_signed_rank,
    mapsswe,
    mcnemar,
};

const char* method_name(Method method);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    Method method = Method::mann_whitney_u;
    std::vector<int> n;
    bool degenerate = false;
    bool exact = false;
};

// Two-sided Mann-Whitney U with midrank ties. Exact enumeration when
// n1+n2 <= 12 and there are no ties, else normal approximation with tie and
// continuity corrections.
TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

TestResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs);

// Gillick & Cox matched-pair test on per-segment error counts.
TestResult mapsswe(const std::vector<double>& err_a, const std::vector<double>& err_b);

// Exact binomial test on the discordant counts.
TestResult mcnemar(int b, int c);

enum class AdjustMethod { benjamini_hochberg, holm_bonferroni };

std::vector<double> adjust_pvalues(const std::vector<double>& ps, AdjustMethod method);

// Shared numerics.
double normal_cdf(double z);
double chi_square_sf(double x, int df);
std::vector<double> midranks(const std::vector<double>& values);

}  // namespace audit::stats

#endif
