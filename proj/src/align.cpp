#include "audit/align.hpp"

#include <algorithm>

#include "audit/error.hpp"
#include "audit/normalize.hpp"

namespace audit::metrics {

namespace {

template <typename Seq>
AlignmentResult align_seq(const Seq& ref, const Seq& hyp) {
    const std::size_t n = ref.size(), m = hyp.size();
    // dp[i][j]: edit cost for ref[0..i) vs hyp[0..j)
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = 0; i <= n; ++i) dp[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= m; ++j) dp[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            int diag = dp[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            dp[i][j] = std::min({diag, dp[i - 1][j] + 1, dp[i][j - 1] + 1});
        }
    }

    AlignmentResult r;
    r.n_ref = static_cast<int>(n);
    r.n_hyp = static_cast<int>(m);

    // Backtrace, preferring match > sub > del > ins on cost ties.
    std::size_t i = n, j = m;
    std::vector<AlignOp> rev;
    auto word = [](const auto& w) {
        if constexpr (std::is_same_v<std::decay_t<decltype(w)>, char>)
            return std::string(1, w);
        else
            return std::string(w);
    };
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] &&
            dp[i][j] == dp[i - 1][j - 1]) {
            rev.push_back({OpKind::match, word(ref[i - 1]), word(hyp[j - 1])});
            --i; --j;
        } else if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1 &&
                   ref[i - 1] != hyp[j - 1]) {
            rev.push_back({OpKind::sub, word(ref[i - 1]), word(hyp[j - 1])});
            --i; --j;
        } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
            rev.push_back({OpKind::del, word(ref[i - 1]), {}});
            --i;
        } else {
            rev.push_back({OpKind::ins, {}, word(hyp[j - 1])});
            --j;
        }
    }
    r.ops.assign(rev.rbegin(), rev.rend());
    for (const auto& op : r.ops) {
        switch (op.kind) {
            case OpKind::match: ++r.H; break;
            case OpKind::sub: ++r.S; break;
            case OpKind::ins: ++r.I; break;
            case OpKind::del: ++r.D; break;
        }
    }
    return r;
}

}  // namespace

AlignmentResult align(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp) {
    if (ref.empty()) throw AuditError("empty_reference", "reference has no words");
    return align_seq(ref, hyp);
}

double wer(const AlignmentResult& a) {
    return static_cast<double>(a.edits()) / static_cast<double>(a.n_ref);
}

double group_wer(const std::vector<AlignmentResult>& records, bool weighted) {
    if (records.empty()) throw AuditError("empty_group", "no records to aggregate");
    if (weighted) {
        long long errors = 0, words = 0;
        for (const auto& r : records) {
            errors += r.edits();
            words += r.n_ref;
        }
        return static_cast<double>(errors) / static_cast<double>(words);
    }
    double total = 0.0;
    for (const auto& r : records) total += wer(r);
    return total / static_cast<double>(records.size());
}

double cer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    std::string r = normalize::join_words(ref);
    std::string h = normalize::join_words(hyp);
    if (r.empty()) throw AuditError("empty_reference", "reference has no characters");
    AlignmentResult a = align_seq(r, h);
    return static_cast<double>(a.edits()) / static_cast<double>(r.size());
}

}  // namespace audit::metrics
