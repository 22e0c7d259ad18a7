#include "audit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>

namespace audit::metrics {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, int> ngram_counts(const std::vector<std::string>& words, int n) {
    std::map<Ngram, int> counts;
    if (static_cast<int>(words.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= words.size(); ++i)
        ++counts[Ngram(words.begin() + static_cast<std::ptrdiff_t>(i),
                       words.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return counts;
}

int clipped_overlap(const std::map<Ngram, int>& ref, const std::map<Ngram, int>& hyp) {
    int overlap = 0;
    for (const auto& [gram, count] : hyp) {
        auto it = ref.find(gram);
        if (it != ref.end()) overlap += std::min(count, it->second);
    }
    return overlap;
}

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                          : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double f1(double precision, double recall) {
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

std::string stem(const std::string& w) {
    static const std::vector<std::string> suffixes = {"ing", "ed", "ly", "es", "s"};
    for (const auto& suf : suffixes) {
        if (w.size() > suf.size() + 2 && w.compare(w.size() - suf.size(), suf.size(), suf) == 0)
            return w.substr(0, w.size() - suf.size());
    }
    return w;
}

}  // namespace

double bleu_sentence(const std::vector<std::string>& ref,
                     const std::vector<std::string>& hyp) {
    if (hyp.empty()) return 0.0;
    double log_sum = 0.0;
    for (int n = 1; n <= 4; ++n) {
        auto r = ngram_counts(ref, n);
        auto h = ngram_counts(hyp, n);
        int total = 0;
        for (const auto& [gram, count] : h) total += count;
        int overlap = clipped_overlap(r, h);
        double num = overlap, den = total;
        if (n > 1) {   // add-one smoothing on higher orders
            num += 1.0;
            den += 1.0;
        }
        if (den <= 0.0 || num <= 0.0) return 0.0;
        log_sum += std::log(num / den);
    }
    double bp = hyp.size() >= ref.size()
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(ref.size()) / hyp.size());
    return bp * std::exp(log_sum / 4.0);
}

double rouge_n(const std::vector<std::string>& ref,
               const std::vector<std::string>& hyp, int n) {
    auto r = ngram_counts(ref, n);
    auto h = ngram_counts(hyp, n);
    int ref_total = 0, hyp_total = 0;
    for (const auto& [g, c] : r) ref_total += c;
    for (const auto& [g, c] : h) hyp_total += c;
    if (ref_total == 0 || hyp_total == 0) return 0.0;
    int overlap = clipped_overlap(r, h);
    return f1(static_cast<double>(overlap) / hyp_total,
              static_cast<double>(overlap) / ref_total);
}

double rouge_l(const std::vector<std::string>& ref,
               const std::vector<std::string>& hyp) {
    if (ref.empty() || hyp.empty()) return 0.0;
    int l = lcs_length(ref, hyp);
    return f1(static_cast<double>(l) / hyp.size(), static_cast<double>(l) / ref.size());
}

double meteor(const std::vector<std::string>& ref,
              const std::vector<std::string>& hyp) {
    constexpr double alpha = 0.9, beta = 3.0, gamma = 0.5;
    if (ref.empty() || hyp.empty()) return 0.0;

    std::vector<std::optional<std::size_t>> hyp_to_ref(hyp.size());
    std::vector<bool> ref_used(ref.size(), false);

    // Two match stages: exact surfaces, then shared suffix stems. Within a
    // stage each hypothesis word takes the unmatched reference candidate
    // closest to the running alignment position, keeping chunks small.
    auto run_stage = [&](bool use_stem) {
        std::ptrdiff_t expected = 0;
        for (std::size_t hi = 0; hi < hyp.size(); ++hi) {
            if (hyp_to_ref[hi]) {
                expected = static_cast<std::ptrdiff_t>(*hyp_to_ref[hi]) + 1;
                continue;
            }
            std::optional<std::size_t> best;
            for (std::size_t ri = 0; ri < ref.size(); ++ri) {
                if (ref_used[ri]) continue;
                bool matches = use_stem ? stem(hyp[hi]) == stem(ref[ri])
                                        : hyp[hi] == ref[ri];
                if (!matches) continue;
                if (!best ||
                    std::llabs(static_cast<std::ptrdiff_t>(ri) - expected) <
                        std::llabs(static_cast<std::ptrdiff_t>(*best) - expected))
                    best = ri;
            }
            if (best) {
                hyp_to_ref[hi] = *best;
                ref_used[*best] = true;
                expected = static_cast<std::ptrdiff_t>(*best) + 1;
            }
        }
    };
    run_stage(false);
    run_stage(true);

    int m = 0;
    int chunks = 0;
    std::optional<std::size_t> prev_ref;
    for (std::size_t hi = 0; hi < hyp.size(); ++hi) {
        if (!hyp_to_ref[hi]) {
            prev_ref.reset();
            continue;
        }
        ++m;
        if (!prev_ref || *hyp_to_ref[hi] != *prev_ref + 1) ++chunks;
        prev_ref = *hyp_to_ref[hi];
    }
    if (m == 0) return 0.0;

    double precision = static_cast<double>(m) / hyp.size();
    double recall = static_cast<double>(m) / ref.size();
    double fmean = precision * recall / (alpha * precision + (1.0 - alpha) * recall);
    double penalty = gamma * std::pow(static_cast<double>(chunks) / m, beta);
    return fmean * (1.0 - penalty);
}

double word_information_lost(const AlignmentResult& a) {
    if (a.n_hyp == 0) return 1.0;   // hit term vanishes
    double h = static_cast<double>(a.H);
    return 1.0 - (h * h) / (static_cast<double>(a.n_ref) * a.n_hyp);
}

double relative_information_lost(const AlignmentResult& a) {
    // Empirical joint over (ref word, hyp word or epsilon) from the ops that
    // consume a reference word; insertions carry no reference information.
    std::map<std::pair<std::string, std::string>, double> joint;
    std::map<std::string, double> ref_marginal, hyp_marginal;
    double total = 0.0;
    for (const auto& op : a.ops) {
        if (op.kind == OpKind::ins) continue;
        std::string hyp_side = op.kind == OpKind::del ? std::string() : op.hyp_word;
        joint[{op.ref_word, hyp_side}] += 1.0;
        ref_marginal[op.ref_word] += 1.0;
        hyp_marginal[hyp_side] += 1.0;
        total += 1.0;
    }
    if (total <= 0.0) return 0.0;
    double h_ref = 0.0;
    for (const auto& [w, c] : ref_marginal) {
        double p = c / total;
        h_ref -= p * std::log2(p);
    }
    if (h_ref <= 0.0) return 0.0;
    double mi = 0.0;
    for (const auto& [pair, c] : joint) {
        double p = c / total;
        double pr = ref_marginal[pair.first] / total;
        double ph = hyp_marginal[pair.second] / total;
        mi += p * std::log2(p / (pr * ph));
    }
    double ril = 1.0 - mi / h_ref;
    return std::clamp(ril, 0.0, 1.0);
}

MetricRecord metric_suite(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp) {
    AlignmentResult a = align(ref, hyp);
    MetricRecord rec;
    rec.n_ref = a.n_ref;
    rec.n_hyp = a.n_hyp;
    rec.s = a.S;
    rec.i = a.I;
    rec.d = a.D;
    rec.wer = wer(a);
    rec.cer = cer(ref, hyp);
    rec.wil = word_information_lost(a);
    rec.ril = relative_information_lost(a);
    rec.bleu = bleu_sentence(ref, hyp);
    rec.rouge1 = rouge_n(ref, hyp, 1);
    rec.rouge2 = rouge_n(ref, hyp, 2);
    rec.rougeL = rouge_l(ref, hyp);
    rec.meteor = meteor(ref, hyp);
    rec.insertion_rate = static_cast<double>(a.I) / a.n_ref;
    return rec;
}

}  // namespace audit::metrics
