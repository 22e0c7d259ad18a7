#ifndef AUDIT_HALLUC_HPP
#define AUDIT_HALLUC_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "audit/metrics.hpp"
#include "audit/stats.hpp"

namespace audit::halluc {

enum class ErrorClass {
    exact,
    deletions_only,
    candidate,
    labeled_hallucination,
    labeled_mistranscription,
};

const char* error_class_name(ErrorClass cls);

ErrorClass classify_error_type(const metrics::AlignmentResult& a);

struct FlagRules {
    double lower_better_percentile = 90.0;   // breach above
    double higher_better_percentile = 10.0;  // breach below
    int min_breaches = 1;
};

struct FlagInput {
    std::string segment_id;
    metrics::MetricRecord record;
    ErrorClass error_class = ErrorClass::candidate;
};

// Percentile-threshold candidate flagging over one provider's corpus.
// Percentiles use linear interpolation (type-7).
std::vector<std::string> flag_candidates(const std::vector<FlagInput>& table,
                                         const FlagRules& rules = {});

double percentile_type7(std::vector<double> values, double pct);

inline constexpr std::array<const char*, 7> kTraitNames = {
    "violence",
    "inaccurate_association",
    "false_authority",
    "random_phrases",
    "repetition_not_in_audio",
    "made_up_continuation",
    "language_switching",
};

struct ReviewItem {
    std::string segment_id;
    std::string provider;
    std::string ref_text;
    std::string hyp_text;
    std::string audio_path;
    std::array<bool, 7> traits{};
    std::optional<ErrorClass> reviewer_label;
};

void export_review_sheet(const std::vector<ReviewItem>& items, const std::string& path);

// Import validates the labeled_hallucination => at least one trait invariant
// and merges by (segment_id, provider).
std::vector<ReviewItem> import_review_sheet(const std::string& path);

std::vector<ReviewItem> merge_labels(const std::vector<ReviewItem>& candidates,
                                     const std::vector<ReviewItem>& labeled);

// Pairs original/perturbed binary labels by segment id and runs McNemar.
struct ExperimentOutcome {
    stats::TestResult test;
    int both = 0;            // hallucination in both
    int original_only = 0;   // discordant (1,0)
    int perturbed_only = 0;  // discordant (0,1)
    int neither = 0;
};
ExperimentOutcome analyze_experiment(
    const std::vector<std::pair<std::string, bool>>& original,
    const std::vector<std::pair<std::string, bool>>& perturbed);

}  // namespace audit::halluc

#endif
