#ifndef AUDIT_MATCH_HPP
#define AUDIT_MATCH_HPP

#include <map>
#include <string>
#include <vector>

#include "audit/regress.hpp"

namespace audit::causal {

struct Unit {
    std::string id;
    bool treated = false;
    std::vector<double> covariates;
};

struct MatchResult {
    std::vector<std::pair<std::string, std::string>> pairs;   // (treated, control)
    std::vector<std::string> unmatched;                       // treated left unpaired
    double caliper = 0.13;
    std::map<std::string, double> propensity;
    std::map<std::string, double> smd_before;                 // per covariate
    std::map<std::string, double> smd_after;
};

struct SmdValue {
    double value = 0.0;
    bool degenerate = false;   // zero pooled variance with unequal means
};

// Standardized mean difference with the pooled-variance denominator.
SmdValue smd(const std::vector<double>& values, const std::vector<bool>& treated);

struct MatchConfig {
    double caliper = 0.13;
    bool caliper_on_logit_sd = false;   // alternative: caliper in logit-SD units
};

// Greedy 1:1 nearest-neighbor matching without replacement, descending
// treated propensity, caliper on the propensity-score scale.
MatchResult propensity_match(const std::vector<Unit>& units,
                             const std::vector<std::string>& covariate_names,
                             const MatchConfig& cfg = {});

// Two pairwise matches against a shared control pool (a vs control and
// b vs control); a control unit may be used once per pairwise match.
struct CommonReferentResult {
    MatchResult match_a;
    MatchResult match_b;
};
CommonReferentResult common_referent_match(const std::vector<Unit>& control,
                                           const std::vector<Unit>& group_a,
                                           const std::vector<Unit>& group_b,
                                           const std::vector<std::string>& covariate_names,
                                           const MatchConfig& cfg = {});

}  // namespace audit::causal

#endif
