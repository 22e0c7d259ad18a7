// asraudit: batch ASR transcription-quality audit driver.
//
// Every stage subcommand reads/writes artifacts under the configured output
// directory, so single stages and the full `run` DAG are interchangeable.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "audit/chat.hpp"
#include "audit/csv.hpp"
#include "audit/error.hpp"
#include "audit/halluc.hpp"
#include "audit/normalize.hpp"
#include "audit/perturb.hpp"
#include "audit/pipeline.hpp"
#include "audit/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace audit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string level;
    std::string provider;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "Audit config (JSON)");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "Output directory override");
    cmd->add_option("--level", opts.level, "Standardization level override");
    cmd->add_option("--provider", opts.provider, "Provider name override");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&opts](std::uint64_t v) {
            opts.seed = v;
            opts.seed_set = true;
        },
        "Seed override");
}

pipeline::AuditConfig load_config(const CommonOpts& opts) {
    pipeline::AuditConfig cfg = pipeline::config_from_json_file(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.seed_set) {
        cfg.seed = opts.seed;
        for (auto& spec : cfg.providers)
            for (auto& [group, model] : spec.mock_by_group) model.seed = opts.seed;
    }
    if (!opts.level.empty())
        cfg.levels = {normalize::level_from_name(opts.level)};
    if (!opts.provider.empty()) {
        std::vector<pipeline::ProviderSpec> kept;
        for (auto& spec : cfg.providers)
            if (spec.name == opts.provider) kept.push_back(spec);
        if (kept.empty())
            throw AuditError("config_error", "no provider named " + opts.provider);
        cfg.providers = std::move(kept);
        cfg.hallucination.provider = opts.provider;
    }
    return cfg;
}

int run_stage(const CommonOpts& opts, void (*stage)(const pipeline::AuditConfig&)) {
    pipeline::AuditConfig cfg = load_config(opts);
    stage(cfg);
    return kExitOk;
}

// --- normalize -------------------------------------------------------------

int cmd_normalize(const CommonOpts& opts, bool chat_mode, const std::string& text) {
    normalize::NormalizationRules rules;
    if (!opts.config_path.empty()) rules = load_config(opts).rules;
    normalize::Level level = opts.level.empty()
                                 ? normalize::Level::RFFRR
                                 : normalize::level_from_name(opts.level);
    auto emit = [&](const std::string& line) {
        if (chat_mode) {
            chat::Utterance utt = chat::parse_chat_utterance(line);
            std::cout << normalize::join_words(normalize::standardize_ground_truth(
                             utt.tokens, level, rules))
                      << '\n';
        } else {
            std::cout << normalize::join_words(
                             normalize::standardize_asr_text(line, rules))
                      << '\n';
        }
    };
    if (!text.empty()) {
        emit(text);
    } else {
        std::string line;
        while (std::getline(std::cin, line))
            if (!line.empty()) emit(line);
    }
    return kExitOk;
}

// --- perturb ---------------------------------------------------------------

int cmd_perturb(const CommonOpts& opts, const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw AuditError("config_error", "cannot open " + manifest_path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw AuditError("config_error", e.what());
    }
    fs::path out_dir = opts.out_dir.empty() ? fs::path(".") : fs::path(opts.out_dir);
    fs::create_directories(out_dir);
    const fs::path base = fs::path(manifest_path).parent_path();
    auto resolve = [&base](const std::string& p) {
        return fs::path(p).is_absolute() ? fs::path(p) : base / p;
    };

    std::ofstream prov(out_dir / "provenance.csv", std::ios::binary);
    prov << "experiment_id,input,output,arm,snr_db,insert_at_s,seed,n_samples\n";
    for (const auto& ej : j.at("experiments")) {
        perturb::PerturbationSpec spec;
        spec.arm = perturb::arm_from_name(ej.at("arm").get<std::string>());
        if (ej.contains("snr_db")) spec.snr_db = ej["snr_db"].get<double>();
        if (ej.contains("insert_at_s"))
            spec.insert_at_s = ej["insert_at_s"].get<double>();
        if (ej.contains("noise_path"))
            spec.noise_path = resolve(ej["noise_path"].get<std::string>()).string();
        spec.seed = ej.value("seed", opts.seed);

        std::string id = ej.at("id").get<std::string>();
        std::string input = ej.at("input").get<std::string>();
        audio::AudioBuffer buf = audio::read_wav(resolve(input).string());
        audio::AudioBuffer out_buf = perturb::apply(buf, spec);
        std::string output =
            ej.value("output", id + "_" + perturb::arm_name(spec.arm) + ".wav");
        audio::write_wav((out_dir / output).string(), out_buf);

        prov << csv::join_row(
            {id, input, output, perturb::arm_name(spec.arm),
             spec.snr_db ? csv::format_double(*spec.snr_db) : std::string(),
             spec.insert_at_s ? csv::format_double(*spec.insert_at_s) : std::string(),
             std::to_string(spec.seed), std::to_string(out_buf.samples.size())});
    }
    return kExitOk;
}

// --- halluc import / analyze ----------------------------------------------

int cmd_halluc_import(const CommonOpts& opts, const std::string& sheet) {
    pipeline::AuditConfig cfg = load_config(opts);
    std::vector<halluc::ReviewItem> labeled = halluc::import_review_sheet(sheet);
    std::vector<halluc::ReviewItem> candidates = halluc::import_review_sheet(
        (fs::path(cfg.out_dir) / "review_sheet.csv").string());
    std::vector<halluc::ReviewItem> merged = halluc::merge_labels(candidates, labeled);

    std::ofstream out(fs::path(cfg.out_dir) / "labels.csv", std::ios::binary);
    out << "segment_id,provider,label,traits\n";
    for (const auto& item : merged) {
        std::string traits;
        for (std::size_t t = 0; t < halluc::kTraitNames.size(); ++t) {
            if (!item.traits[t]) continue;
            if (!traits.empty()) traits += ";";
            traits += halluc::kTraitNames[t];
        }
        out << csv::join_row({item.segment_id, item.provider,
                              item.reviewer_label
                                  ? halluc::error_class_name(*item.reviewer_label)
                                  : "",
                              traits});
    }
    return kExitOk;
}

std::vector<std::pair<std::string, bool>> read_label_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    std::vector<std::pair<std::string, bool>> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 2)
            throw AuditError("bad_record", "label csv needs segment_id,label");
        const std::string& label = rows[r][1];
        bool positive = label == "1" || label == "true" ||
                        label == "hallucination" || label == "labeled_hallucination";
        out.push_back({rows[r][0], positive});
    }
    return out;
}

int cmd_halluc_analyze(const CommonOpts& opts, const std::string& original,
                       const std::string& perturbed) {
    auto outcome =
        halluc::analyze_experiment(read_label_csv(original), read_label_csv(perturbed));
    std::ostream* sink = &std::cout;
    std::ofstream file;
    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        file.open(fs::path(opts.out_dir) / "halluc_test.csv", std::ios::binary);
        sink = &file;
    }
    *sink << "method,statistic,p_value,both,original_only,perturbed_only,neither\n"
          << csv::join_row({stats::method_name(outcome.test.method),
                            csv::format_double(outcome.test.statistic),
                            csv::format_double(outcome.test.p_value),
                            std::to_string(outcome.both),
                            std::to_string(outcome.original_only),
                            std::to_string(outcome.perturbed_only),
                            std::to_string(outcome.neither)});
    return kExitOk;
}

// --- run -------------------------------------------------------------------

int cmd_run(const CommonOpts& opts) {
    pipeline::AuditConfig cfg = load_config(opts);
    pipeline::RunReport report = pipeline::run_pipeline(cfg);
    for (const auto& s : report.stages) {
        std::cerr << s.stage << ": " << s.status;
        if (!s.error.empty()) std::cerr << " (" << s.error << ")";
        std::cerr << '\n';
    }
    if (!report.ok()) {
        std::cerr << "failed stage: " << report.first_failed_stage() << '\n';
        return kExitStage;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch ASR transcription-quality audit toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string text, manifest_path, sheet_path, original_path, perturbed_path;
    bool chat_mode = false;

    auto* ingest = app.add_subcommand("ingest", "Parse transcripts into segments");
    add_common(ingest, opts, true);

    auto* norm = app.add_subcommand("normalize", "Standardize text from stdin/--text");
    add_common(norm, opts, false);
    norm->add_option("--text", text, "Single line instead of stdin");
    norm->add_flag("--chat", chat_mode, "Treat input as CHAT utterances");

    auto* transcribe =
        app.add_subcommand("transcribe-mock", "Generate synthetic transcripts");
    add_common(transcribe, opts, true);

    auto* metrics = app.add_subcommand("metrics", "Score transcripts per level");
    add_common(metrics, opts, true);

    auto* features = app.add_subcommand("features", "Extract acoustic features");
    add_common(features, opts, true);

    auto* statscmd = app.add_subcommand("stats", "Group hypothesis tests");
    add_common(statscmd, opts, true);

    auto* match = app.add_subcommand("match", "Propensity-score matching");
    add_common(match, opts, true);

    auto* regress = app.add_subcommand("regress", "Clustered regressions");
    add_common(regress, opts, true);

    auto* halluc = app.add_subcommand("halluc", "Hallucination workflow");
    halluc->require_subcommand(1);
    auto* hflag = halluc->add_subcommand("flag", "Flag candidate segments");
    add_common(hflag, opts, true);
    auto* hexport = halluc->add_subcommand("export", "Write the review sheet");
    add_common(hexport, opts, true);
    auto* himport = halluc->add_subcommand("import", "Import a labeled sheet");
    add_common(himport, opts, true);
    himport->add_option("--sheet", sheet_path, "Labeled review sheet")->required();
    auto* hanalyze =
        halluc->add_subcommand("analyze", "Paired original-vs-perturbed test");
    add_common(hanalyze, opts, false);
    hanalyze->add_option("--original", original_path, "Original labels CSV")
        ->required();
    hanalyze->add_option("--perturbed", perturbed_path, "Perturbed labels CSV")
        ->required();

    auto* perturbcmd = app.add_subcommand("perturb", "Apply audio perturbations");
    add_common(perturbcmd, opts, false);
    perturbcmd->add_option("--manifest", manifest_path, "Experiment manifest (JSON)")
        ->required();

    auto* reportcmd = app.add_subcommand("report", "Summary and disaggregation");
    add_common(reportcmd, opts, true);

    auto* run = app.add_subcommand("run", "Full audit DAG");
    add_common(run, opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*ingest) return run_stage(opts, pipeline::stage_ingest);
        if (*norm) return cmd_normalize(opts, chat_mode, text);
        if (*transcribe) return run_stage(opts, pipeline::stage_transcribe);
        if (*metrics) return run_stage(opts, pipeline::stage_metrics);
        if (*features) return run_stage(opts, pipeline::stage_features);
        if (*statscmd) return run_stage(opts, pipeline::stage_stats);
        if (*match) return run_stage(opts, pipeline::stage_match);
        if (*regress) return run_stage(opts, pipeline::stage_regress);
        if (*hflag || *hexport) return run_stage(opts, pipeline::stage_halluc_flag);
        if (*himport) return cmd_halluc_import(opts, sheet_path);
        if (*hanalyze) return cmd_halluc_analyze(opts, original_path, perturbed_path);
        if (*perturbcmd) return cmd_perturb(opts, manifest_path);
        if (*reportcmd) return run_stage(opts, pipeline::stage_report);
        if (*run) return cmd_run(opts);
    } catch (const AuditError& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
        return e.code() == "config_error" || e.code() == "bad_manifest" ? kExitConfig
                                                                        : kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitStage;
    }
    return kExitConfig;
}
