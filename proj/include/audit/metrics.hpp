#ifndef AUDIT_METRICS_HPP
#define AUDIT_METRICS_HPP

#include <string>
#include <vector>

#include "audit/align.hpp"

namespace audit::metrics {

struct MetricRecord {
    std::string segment_id;
    std::string provider;
    std::string level;
    double wer = 0.0;
    double cer = 0.0;
    double wil = 0.0;
    double ril = 0.0;
    double bleu = 0.0;
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougeL = 0.0;
    double meteor = 0.0;
    double insertion_rate = 0.0;
    int n_ref = 0, n_hyp = 0;
    int s = 0, i = 0, d = 0;
};

double bleu_sentence(const std::vector<std::string>& ref,
                     const std::vector<std::string>& hyp);

// F1-flavoured ROUGE scores.
double rouge_n(const std::vector<std::string>& ref,
               const std::vector<std::string>& hyp, int n);
double rouge_l(const std::vector<std::string>& ref,
               const std::vector<std::string>& hyp);

// Exact + suffix-stem matching, alpha=0.9, beta=3, gamma=0.5.
double meteor(const std::vector<std::string>& ref,
              const std::vector<std::string>& hyp);

double word_information_lost(const AlignmentResult& a);
double relative_information_lost(const AlignmentResult& a);

MetricRecord metric_suite(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp);

}  // namespace audit::metrics

#endif
