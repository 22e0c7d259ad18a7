// Acceptance suite: one pass/fail line per criterion, exit nonzero on any
// failure. Tolerances are stated inline next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "audit/acoustics.hpp"
#include "audit/align.hpp"
#include "audit/chat.hpp"
#include "audit/csv.hpp"
#include "audit/halluc.hpp"
#include "audit/match.hpp"
#include "audit/metrics.hpp"
#include "audit/normalize.hpp"
#include "audit/perturb.hpp"
#include "audit/pipeline.hpp"
#include "audit/regress.hpp"
#include "audit/stats.hpp"
#include "audit/wav.hpp"
#include "synthetic_corpus.hpp"

using namespace audit;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(what);
}

void criterion(int number, const std::string& title,
               const std::function<void()>& body) {
    auto start = std::chrono::steady_clock::now();
    try {
        body();
        double s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
        std::printf("criterion %d: PASS  %s (%.2fs)\n", number, title.c_str(), s);
    } catch (const std::exception& e) {
        ++g_failures;
        std::printf("criterion %d: FAIL  %s — %s\n", number, title.c_str(), e.what());
    }
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int brute_cost(const std::vector<std::string>& ref,
               const std::vector<std::string>& hyp, std::size_t i = 0,
               std::size_t j = 0) {
    if (i == ref.size()) return static_cast<int>(hyp.size() - j);
    if (j == hyp.size()) return static_cast<int>(ref.size() - i);
    int best = brute_cost(ref, hyp, i + 1, j + 1) + (ref[i] == hyp[j] ? 0 : 1);
    best = std::min(best, brute_cost(ref, hyp, i + 1, j) + 1);
    best = std::min(best, brute_cost(ref, hyp, i, j + 1) + 1);
    return best;
}

void criterion1() {
    // WER("the metrics","metrics") = WER("the metrics","the mets") = 0.5 exact
    auto a = metrics::align({"the", "metrics"}, {"metrics"});
    require(metrics::wer(a) == 0.5, "deletion case != 0.5");
    auto b = metrics::align({"the", "metrics"}, {"the", "mets"});
    require(metrics::wer(b) == 0.5, "substitution case != 0.5");
    std::vector<std::string> ref;
    for (int i = 0; i < 12; ++i) ref.push_back("w" + std::to_string(i));
    require(metrics::wer(metrics::align(ref, {})) == 1.0,
            "empty hypothesis != 1.0");
}

void criterion2() {
    auto tokens =
        chat::parse_chat_utterance(
            "&+h &+h he he wanted to they were &-um ball they were having a ball .")
            .tokens;
    auto at = [&](normalize::Level level) {
        return normalize::join_words(
            normalize::standardize_ground_truth(tokens, level));
    };
    require(at(normalize::Level::RFF) ==
                "he he wanted to they were ball they were having a ball",
            "RFF mismatch");
    require(at(normalize::Level::RFFR) ==
                "he wanted to they were ball they were having a ball",
            "RFFR mismatch");
    require(at(normalize::Level::RFFRR) == "he wanted to they were having a ball",
            "RFFRR mismatch");

    // monotone length + idempotence on 10,000 generated sequences
    std::mt19937_64 rng(1);
    const std::vector<std::string> vocab = {"cat", "dog", "ran", "sat", "tree"};
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<chat::Token> toks;
        int n = 1 + static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) {
            unsigned pick = rng() % 8;
            if (pick < 5 || toks.empty())
                toks.push_back({vocab[rng() % vocab.size()],
                                chat::TokenClass::word, false});
            else if (pick == 5)
                toks.push_back({"um", chat::TokenClass::filler, false});
            else if (pick == 6)
                toks.push_back({"h", chat::TokenClass::fragment, false});
            else
                toks.push_back(toks.back());
        }
        toks.push_back({"end", chat::TokenClass::word, false});
        std::size_t prev = SIZE_MAX;
        for (normalize::Level level : normalize::all_levels()) {
            auto words = normalize::standardize_ground_truth(toks, level);
            require(words.size() <= prev, "monotone length violated");
            prev = words.size();
            std::vector<chat::Token> rewrap;
            for (const auto& w : words)
                rewrap.push_back({w, chat::TokenClass::word, false});
            require(normalize::standardize_ground_truth(rewrap, level) == words,
                    "idempotence violated");
        }
    }
}

void criterion3() {
    std::mt19937_64 rng(2);
    const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
    for (int trial = 0; trial < 5000; ++trial) {
        std::vector<std::string> ref, hyp;
        std::size_t nr = 1 + rng() % 8, nh = rng() % 9;
        for (std::size_t i = 0; i < nr; ++i) ref.push_back(alphabet[rng() % 4]);
        for (std::size_t i = 0; i < nh; ++i) hyp.push_back(alphabet[rng() % 4]);
        metrics::AlignmentResult a = metrics::align(ref, hyp);
        require(a.edits() == brute_cost(ref, hyp), "cost != brute-force minimum");
        require(a.H + a.S + a.D == static_cast<int>(nr), "H+S+D != N_ref");
    }
}

void criterion4() {
    audio::AudioBuffer rms;
    rms.sample_rate = 16000;
    rms.samples.assign(16000, 0.0043f);
    auto noise = acoustics::background_noise(rms);
    require(noise.noise_db && std::fabs(*noise.noise_db + 47.32) <= 0.01 + 1e-9,
            "dB anchor off by more than 0.01");

    audio::AudioBuffer mixed;
    mixed.sample_rate = 16000;
    mixed.samples.assign(32000, 0.0f);
    for (int i = 0; i < 32000; ++i)
        mixed.samples.push_back(
            static_cast<float>(0.5 * std::sin(2.0 * M_PI * 440.0 * i / 16000.0)));
    double share = acoustics::vad_nonvocal_share(mixed).nonvocal_share;
    // 0.5 +/- one 30 ms frame over 4 s, hangover may extend voicing
    require(share > 0.5 - 6 * 0.030 / 4.0 && share < 0.5 + 0.030 / 4.0,
            "nonvocal share outside 0.5 +/- frame tolerance");

    audio::AudioBuffer quiet;
    quiet.sample_rate = 16000;
    quiet.samples.assign(32000, 0.005f);
    auto q = acoustics::background_noise(quiet);
    require(q.noise_rms && std::fabs(*q.noise_rms - 0.005) < 1e-6,
            "constant 0.005 rms not recovered within 1e-6");
}

void criterion5() {
    audio::AudioBuffer signal;
    signal.sample_rate = 16000;
    for (int i = 0; i < 48000; ++i)
        signal.samples.push_back(
            static_cast<float>(0.4 * std::sin(2.0 * M_PI * 440.0 * i / 16000.0)));
    audio::AudioBuffer noise = perturb::synth_white_noise(3.0, 16000, 13);
    for (double target : {5.0, 10.0}) {
        double ps = 0.0, pn = 0.0;
        for (float s : signal.samples) ps += static_cast<double>(s) * s;
        for (float s : noise.samples) pn += static_cast<double>(s) * s;
        ps /= signal.samples.size();
        pn /= noise.samples.size();
        double gain = std::sqrt(ps / (pn * std::pow(10.0, target / 10.0)));
        audio::AudioBuffer scaled = noise;
        for (auto& s : scaled.samples) s = static_cast<float>(s * gain);
        require(std::fabs(perturb::measure_snr_db(signal, scaled) - target) < 0.1,
                "SNR off by more than 0.1 dB");
    }

    audio::AudioBuffer pre = perturb::prepend_silence(signal, 10.0);
    require(pre.samples.size() == signal.samples.size() + 160000,
            "prepend sample count not exact");

    std::vector<perturb::PerturbationSpec> specs = {
        {perturb::Arm::silence_prepend_10s, {}, {}, "", 3},
        {perturb::Arm::white_prefix_1s, 5.0, {}, "", 3},
        {perturb::Arm::white_insert_mid, 5.0, 1.0, "", 3},
        {perturb::Arm::white_throughout, 10.0, {}, "", 3},
        {perturb::Arm::truncate, {}, 1.0, "", 3},
    };
    for (const auto& spec : specs) {
        audio::AudioBuffer a = perturb::apply(signal, spec);
        audio::AudioBuffer b = perturb::apply(signal, spec);
        require(a.samples == b.samples,
                std::string("arm not deterministic: ") + perturb::arm_name(spec.arm));
    }
}

void criterion6() {
    stats::TestResult mc = stats::mcnemar(10, 2);
    require(std::fabs(mc.p_value - 0.038574218750) < 1e-6,
            "mcnemar b=10 c=2 p != 0.0386 within 1e-6");

    auto bh = stats::adjust_pvalues({0.01, 0.02, 0.03, 0.04},
                                    stats::AdjustMethod::benjamini_hochberg);
    for (double p : bh)
        require(std::fabs(p - 0.04) < 1e-12, "BH example != all 0.04");
    auto holm = stats::adjust_pvalues({0.01, 0.04},
                                      stats::AdjustMethod::holm_bonferroni);
    require(std::fabs(holm[0] - 0.02) < 1e-12 && std::fabs(holm[1] - 0.04) < 1e-12,
            "Holm example != [0.02, 0.04]");

    stats::TestResult w = stats::mapsswe({2, 0, 0, 3}, {0, 0, 1, 0});
    require(std::fabs(w.statistic - 1.0954) < 1e-3, "MAPSSWE W != 1.0954");
    require(std::fabs(w.p_value - 0.273) < 0.001, "MAPSSWE p != 0.273");
    stats::TestResult ws = stats::mapsswe({0, 0, 1, 0}, {2, 0, 0, 3});
    require(std::fabs(ws.statistic + w.statistic) < 1e-12,
            "MAPSSWE not antisymmetric");

    // exact branches vs enumeration (spot cases within n <= 10)
    stats::TestResult mw = stats::mann_whitney_u({1, 2, 3}, {4, 5, 6});
    require(mw.exact && std::fabs(mw.p_value - 0.1) < 1e-12,
            "MW exact {1,2,3} vs {4,5,6} != 0.1");
    stats::TestResult wil = stats::wilcoxon_signed_rank(
        {{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}});
    require(wil.exact && std::fabs(wil.p_value - 0.0625) < 1e-12,
            "Wilcoxon all-positive n=5 != 2/32");
}

void criterion7() {
    // exact OLS
    causal::DesignMatrix x;
    x.column_names = {"intercept", "x"};
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
        x.rows.push_back({1.0, i * 0.25});
        y.push_back(2.0 * i * 0.25);
    }
    causal::RegressionResult exact = causal::ols_clustered(x, y);
    require(std::fabs(exact.coefficients[1] - 2.0) < 1e-10, "beta != 2 +/- 1e-10");

    // singleton clusters == HC1
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    causal::DesignMatrix xs, xn;
    xs.column_names = xn.column_names = {"intercept", "x"};
    std::vector<double> yy;
    for (int i = 0; i < 60; ++i) {
        double xi = normal(rng);
        xs.rows.push_back({1.0, xi});
        xn.rows.push_back({1.0, xi});
        xs.cluster_id.push_back("u" + std::to_string(i));
        yy.push_back(0.5 * xi + normal(rng));
    }
    causal::RegressionResult a = causal::ols_clustered(xs, yy);
    causal::RegressionResult b = causal::ols_clustered(xn, yy);
    for (std::size_t j = 0; j < a.se.size(); ++j)
        require(std::fabs(a.se[j] - b.se[j]) < 1e-10,
                "clustered SE != HC1 for singleton clusters");

    // simulated recovery at n=5000 within +/- 0.15
    causal::DesignMatrix xg;
    xg.column_names = {"intercept", "x"};
    std::vector<double> yl, yp;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        double xi = normal(rng);
        xg.rows.push_back({1.0, xi});
        double pl = 1.0 / (1.0 + std::exp(-(0.5 + xi)));
        double pp = 0.5 * std::erfc(-(0.3 + 0.8 * xi) / std::sqrt(2.0));
        yl.push_back(unif(rng) < pl ? 1.0 : 0.0);
        yp.push_back(unif(rng) < pp ? 1.0 : 0.0);
    }
    causal::RegressionResult lr = causal::fit_logistic(xg, yl);
    require(std::fabs(lr.coefficients[1] - 1.0) < 0.15, "logit slope off > 0.15");
    causal::RegressionResult pr = causal::fit_probit(xg, yp);
    require(std::fabs(pr.coefficients[1] - 0.8) < 0.15, "probit slope off > 0.15");

    // coverage over 500 cluster-correlated simulations in [0.92, 0.98]
    int covered = 0;
    for (int rep = 0; rep < 500; ++rep) {
        causal::DesignMatrix xc;
        xc.column_names = {"intercept", "x"};
        std::vector<double> yc;
        const double crit = 1.9842;   // t(G-1) critical value for G = 100
        for (int g = 0; g < 100; ++g) {
            double u = normal(rng), xgv = normal(rng);
            for (int i = 0; i < 10; ++i) {
                xc.rows.push_back({1.0, xgv});
                xc.cluster_id.push_back("g" + std::to_string(g));
                yc.push_back(1.0 + 2.0 * xgv + u + 0.5 * normal(rng));
            }
        }
        causal::RegressionResult r = causal::ols_clustered(xc, yc);
        if (r.coefficients[1] - crit * r.se[1] <= 2.0 &&
            2.0 <= r.coefficients[1] + crit * r.se[1])
            ++covered;
    }
    double coverage = covered / 500.0;
    require(coverage >= 0.92 && coverage <= 0.98,
            "coverage " + std::to_string(coverage) + " outside [0.92, 0.98]");

    // post-match balance below 0.1 on confounded data
    std::vector<causal::Unit> units;
    for (int i = 0; i < 200; ++i)
        units.push_back({"t" + std::to_string(i), true, {1.0 + normal(rng)}});
    for (int i = 0; i < 800; ++i)
        units.push_back({"c" + std::to_string(i), false, {normal(rng)}});
    causal::MatchResult m = causal::propensity_match(units, {"z"});
    require(std::fabs(m.smd_after.at("z")) < 0.1, "post-match |SMD| >= 0.1");
}

void criterion8() {
    fs::path root = fs::temp_directory_path() / "audit_acceptance_corpus";
    fs::remove_all(root);
    fs::create_directories(root);
    synthetic::CorpusSpec spec;   // 200 segments per group, planted rates
    synthetic::BuiltCorpus corpus = synthetic::build(root, spec);
    pipeline::AuditConfig cfg =
        pipeline::config_from_json_file(corpus.config_path.string());

    cfg.out_dir = (root / "run1").string();
    pipeline::RunReport report = pipeline::run_pipeline(cfg);
    require(report.ok(), "pipeline failed at stage " + report.first_failed_stage());

    // weighted WER per group within +/- 0.01 of planted rates
    auto summary = csv::read_file((root / "run1" / "summary.csv").string());
    std::map<std::string, double> weighted;
    for (std::size_t r = 1; r < summary.size(); ++r)
        weighted[summary[r][1]] = std::stod(summary[r][5]);
    require(std::fabs(weighted.at("aphasia") - 0.15) < 0.01,
            "aphasia weighted WER " + std::to_string(weighted.at("aphasia")) +
                " not within 0.01 of 0.15");
    require(std::fabs(weighted.at("control") - 0.07) < 0.01,
            "control weighted WER " + std::to_string(weighted.at("control")) +
                " not within 0.01 of 0.07");

    // Mann-Whitney adjusted p < 0.05
    auto tests = csv::read_file((root / "run1" / "tests.csv").string());
    require(tests.size() >= 2, "no test rows");
    bool significant = false;
    for (std::size_t r = 1; r < tests.size(); ++r)
        if (tests[r][1] == "mann_whitney_u" && std::stod(tests[r][4]) < 0.05)
            significant = true;
    require(significant, "adjusted Mann-Whitney p not < 0.05");

    // planted non-fluent penalty visible in the fluency disaggregation
    auto disagg = csv::read_file((root / "run1" / "disaggregate.csv").string());
    double fluent_wer = -1.0, non_fluent_wer = -1.0;
    for (std::size_t r = 1; r < disagg.size(); ++r) {
        if (disagg[r][0] != "fluency") continue;
        if (disagg[r][1] == "fluent") fluent_wer = std::stod(disagg[r][5]);
        if (disagg[r][1] == "non_fluent") non_fluent_wer = std::stod(disagg[r][5]);
    }
    require(fluent_wer >= 0 && non_fluent_wer >= 0, "fluency cells missing");
    require(non_fluent_wer > fluent_wer,
            "non-fluent cell WER not strictly above fluent cell");

    // byte-identical double run
    cfg.out_dir = (root / "run2").string();
    require(pipeline::run_pipeline(cfg).ok(), "second run failed");
    for (const auto& entry : fs::directory_iterator(root / "run1")) {
        std::string name = entry.path().filename().string();
        require(synthetic::slurp(entry.path()) ==
                    synthetic::slurp(root / "run2" / name),
                "artifact differs between runs: " + name);
    }
}

void criterion9() {
    std::mt19937_64 rng(6);
    auto random_table = [&rng](int n) {
        std::vector<halluc::FlagInput> table;
        for (int i = 0; i < n; ++i) {
            halluc::FlagInput in;
            in.segment_id = "s" + std::to_string(i);
            auto u = [&rng]() { return static_cast<double>(rng() % 1000) / 1000.0; };
            in.record.wer = u();
            in.record.cer = u();
            in.record.wil = u();
            in.record.ril = u();
            in.record.bleu = u();
            in.record.rouge1 = u();
            in.record.rouge2 = u();
            in.record.rougeL = u();
            in.record.meteor = u();
            in.record.insertion_rate = u();
            in.error_class = halluc::ErrorClass::candidate;
            table.push_back(in);
        }
        return table;
    };
    for (int trial = 0; trial < 1000; ++trial) {
        auto table = random_table(10 + static_cast<int>(rng() % 25));
        halluc::FlagRules base;
        auto to_set = [](const std::vector<std::string>& v) {
            return std::set<std::string>(v.begin(), v.end());
        };
        auto prev = to_set(halluc::flag_candidates(table, base));
        for (int k = 2; k <= 3; ++k) {
            halluc::FlagRules rules = base;
            rules.min_breaches = k;
            auto cur = to_set(halluc::flag_candidates(table, rules));
            require(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()),
                    "min_breaches monotonicity violated");
            prev = cur;
        }
        halluc::FlagRules tight = base;
        tight.lower_better_percentile = 96.0;
        tight.higher_better_percentile = 4.0;
        auto loose = to_set(halluc::flag_candidates(table, base));
        auto strict = to_set(halluc::flag_candidates(table, tight));
        require(
            std::includes(loose.begin(), loose.end(), strict.begin(), strict.end()),
            "percentile tightening monotonicity violated");
    }

    // export/import identity
    std::vector<halluc::ReviewItem> items(3);
    for (int i = 0; i < 3; ++i) {
        items[i].segment_id = "s" + std::to_string(i);
        items[i].provider = "mock";
        items[i].ref_text = "ref, \"text\" " + std::to_string(i);
        items[i].hyp_text = "hyp text";
    }
    items[1].traits[2] = true;
    items[1].reviewer_label = halluc::ErrorClass::labeled_hallucination;
    fs::path sheet = fs::temp_directory_path() / "audit_acceptance_sheet.csv";
    halluc::export_review_sheet(items, sheet.string());
    auto back = halluc::import_review_sheet(sheet.string());
    require(back.size() == items.size(), "import row count changed");
    for (std::size_t i = 0; i < items.size(); ++i)
        require(back[i].segment_id == items[i].segment_id &&
                    back[i].ref_text == items[i].ref_text &&
                    back[i].traits == items[i].traits &&
                    back[i].reviewer_label == items[i].reviewer_label,
                "import != export");
    fs::remove(sheet);

    // analyze_experiment agrees with mcnemar on shared cases
    std::vector<std::pair<std::string, bool>> orig, pert;
    for (int i = 0; i < 9; ++i) {
        orig.push_back({"x" + std::to_string(i), i < 7});
        pert.push_back({"x" + std::to_string(i), i < 2});
    }
    auto outcome = halluc::analyze_experiment(orig, pert);
    stats::TestResult direct =
        stats::mcnemar(outcome.original_only, outcome.perturbed_only);
    require(std::fabs(outcome.test.p_value - direct.p_value) < 1e-15,
            "analyze_experiment p != mcnemar p");
}

}  // namespace

int main() {
    criterion(1, "WER micro-anchors", criterion1);
    criterion(2, "standardization ladder + properties", criterion2);
    criterion(3, "alignment brute-force equivalence", criterion3);
    criterion(4, "acoustics anchors", criterion4);
    criterion(5, "perturbation SNR and determinism", criterion5);
    criterion(6, "statistics exact anchors", criterion6);
    criterion(7, "causal estimation and balance", criterion7);
    criterion(8, "end-to-end synthetic audit", criterion8);
    criterion(9, "hallucination workflow", criterion9);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
