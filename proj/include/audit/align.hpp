#ifndef AUDIT_ALIGN_HPP
#define AUDIT_ALIGN_HPP

#include <string>
#include <vector>

namespace audit::metrics {

enum class OpKind { match, sub, ins, del };

struct AlignOp {
    OpKind kind;
    std::string ref_word;   // empty for insertions
    std::string hyp_word;   // empty for deletions
};

struct AlignmentResult {
    int S = 0, I = 0, D = 0, H = 0;
    int n_ref = 0, n_hyp = 0;
    std::vector<AlignOp> ops;

    int edits() const { return S + I + D; }
};

// Minimal-cost word alignment with unit costs. Backtrace tie-break prefers
// match > substitution > deletion > insertion so the op sequence is
// deterministic. ref must be non-empty.
AlignmentResult align(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp);

double wer(const AlignmentResult& a);

double group_wer(const std::vector<AlignmentResult>& records, bool weighted);

// Character-level error rate over space-joined word lists.
double cer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

}  // namespace audit::metrics

#endif
