#include "audit/halluc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "audit/csv.hpp"
#include "audit/error.hpp"

namespace audit::halluc {

const char* error_class_name(ErrorClass cls) {
    switch (cls) {
        case ErrorClass::exact: return "exact";
        case ErrorClass::deletions_only: return "deletions_only";
        case ErrorClass::candidate: return "candidate";
        case ErrorClass::labeled_hallucination: return "hallucination";
        case ErrorClass::labeled_mistranscription: return "mistranscription";
    }
    return "?";
}

ErrorClass classify_error_type(const metrics::AlignmentResult& a) {
    if (a.S == 0 && a.I == 0 && a.D == 0) return ErrorClass::exact;
    if (a.S == 0 && a.I == 0 && a.D > 0) return ErrorClass::deletions_only;
    return ErrorClass::candidate;
}

double percentile_type7(std::vector<double> values, double pct) {
    if (values.empty()) throw AuditError("empty_sample", "no values for percentile");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    double h = (pct / 100.0) * (static_cast<double>(values.size()) - 1.0);
    double lo = std::floor(h);
    std::size_t i = static_cast<std::size_t>(lo);
    if (i + 1 >= values.size()) return values.back();
    return values[i] + (h - lo) * (values[i + 1] - values[i]);
}

std::vector<std::string> flag_candidates(const std::vector<FlagInput>& table,
                                         const FlagRules& rules) {
    if (table.size() < 10)
        throw AuditError("insufficient_corpus", "need at least 10 records");

    struct MetricSel {
        const char* name;
        double (*get)(const metrics::MetricRecord&);
        bool lower_better;
    };
    static const std::vector<MetricSel> selectors = {
        {"wer", [](const metrics::MetricRecord& r) { return r.wer; }, true},
        {"cer", [](const metrics::MetricRecord& r) { return r.cer; }, true},
        {"wil", [](const metrics::MetricRecord& r) { return r.wil; }, true},
        {"ril", [](const metrics::MetricRecord& r) { return r.ril; }, true},
        {"insertion_rate",
         [](const metrics::MetricRecord& r) { return r.insertion_rate; }, true},
        {"bleu", [](const metrics::MetricRecord& r) { return r.bleu; }, false},
        {"rouge1", [](const metrics::MetricRecord& r) { return r.rouge1; }, false},
        {"rouge2", [](const metrics::MetricRecord& r) { return r.rouge2; }, false},
        {"rougeL", [](const metrics::MetricRecord& r) { return r.rougeL; }, false},
        {"meteor", [](const metrics::MetricRecord& r) { return r.meteor; }, false},
    };

    std::map<const char*, double> thresholds;
    for (const auto& sel : selectors) {
        std::vector<double> values;
        values.reserve(table.size());
        for (const auto& row : table) values.push_back(sel.get(row.record));
        thresholds[sel.name] = percentile_type7(
            std::move(values),
            sel.lower_better ? rules.lower_better_percentile
                             : rules.higher_better_percentile);
    }

    std::vector<std::string> flagged;
    for (const auto& row : table) {
        if (row.error_class != ErrorClass::candidate) continue;
        int breaches = 0;
        for (const auto& sel : selectors) {
            double v = sel.get(row.record);
            double t = thresholds[sel.name];
            if (sel.lower_better ? v > t : v < t) ++breaches;   // strict breach
        }
        if (breaches >= rules.min_breaches) flagged.push_back(row.segment_id);
    }
    return flagged;
}

void export_review_sheet(const std::vector<ReviewItem>& items, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw AuditError("io_error", "cannot write " + path);
    std::vector<std::string> header = {"segment_id", "provider", "ref_text",
                                       "hyp_text", "audio_path"};
    for (const char* trait : kTraitNames) header.emplace_back(trait);
    header.emplace_back("reviewer_label");
    out << csv::join_row(header);
    for (const auto& item : items) {
        std::vector<std::string> row = {item.segment_id, item.provider, item.ref_text,
                                        item.hyp_text, item.audio_path};
        for (bool t : item.traits) row.emplace_back(t ? "1" : "0");
        row.emplace_back(item.reviewer_label ? error_class_name(*item.reviewer_label)
                                             : "");
        out << csv::join_row(row);
    }
}

std::vector<ReviewItem> import_review_sheet(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw AuditError("bad_sheet", "empty review sheet");
    const std::size_t expected = 5 + kTraitNames.size() + 1;
    std::vector<ReviewItem> items;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != expected)
            throw AuditError("bad_sheet",
                             "row " + std::to_string(r) + " has wrong field count");
        ReviewItem item;
        item.segment_id = row[0];
        item.provider = row[1];
        item.ref_text = row[2];
        item.hyp_text = row[3];
        item.audio_path = row[4];
        int trait_count = 0;
        for (std::size_t t = 0; t < kTraitNames.size(); ++t) {
            item.traits[t] = row[5 + t] == "1";
            if (item.traits[t]) ++trait_count;
        }
        const std::string& label = row[5 + kTraitNames.size()];
        if (!label.empty()) {
            if (label == "hallucination") {
                if (trait_count == 0)
                    throw AuditError("invalid_label",
                                     item.segment_id +
                                         ": hallucination label requires >= 1 trait");
                item.reviewer_label = ErrorClass::labeled_hallucination;
            } else if (label == "mistranscription") {
                item.reviewer_label = ErrorClass::labeled_mistranscription;
            } else {
                throw AuditError("invalid_label",
                                 item.segment_id + ": unknown label '" + label + "'");
            }
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<ReviewItem> merge_labels(const std::vector<ReviewItem>& candidates,
                                     const std::vector<ReviewItem>& labeled) {
    std::map<std::pair<std::string, std::string>, const ReviewItem*> by_key;
    std::vector<ReviewItem> merged = candidates;
    for (auto& item : merged) by_key[{item.segment_id, item.provider}] = nullptr;
    for (const auto& item : labeled) {
        auto it = by_key.find({item.segment_id, item.provider});
        if (it == by_key.end())
            throw AuditError("unknown_id", "label for unknown candidate " +
                                               item.segment_id + "/" + item.provider);
    }
    for (auto& item : merged) {
        for (const auto& lab : labeled) {
            if (lab.segment_id == item.segment_id && lab.provider == item.provider) {
                item.traits = lab.traits;
                item.reviewer_label = lab.reviewer_label;
            }
        }
    }
    return merged;
}

ExperimentOutcome analyze_experiment(
    const std::vector<std::pair<std::string, bool>>& original,
    const std::vector<std::pair<std::string, bool>>& perturbed) {
    std::map<std::string, bool> orig;
    for (const auto& [id, label] : original) orig[id] = label;
    if (orig.size() != original.size())
        throw AuditError("duplicate_ids", "duplicate segment ids in original labels");

    ExperimentOutcome outcome;
    std::map<std::string, bool> seen;
    for (const auto& [id, label] : perturbed) {
        auto it = orig.find(id);
        if (it == orig.end())
            throw AuditError("unpaired_ids", "perturbed label for unknown id " + id);
        seen[id] = true;
        if (it->second && label) ++outcome.both;
        else if (it->second && !label) ++outcome.original_only;
        else if (!it->second && label) ++outcome.perturbed_only;
        else ++outcome.neither;
    }
    if (seen.size() != orig.size())
        throw AuditError("unpaired_ids", "missing perturbed labels for some segments");
    outcome.test = stats::mcnemar(outcome.original_only, outcome.perturbed_only);
    return outcome;
}

}  // namespace audit::halluc
