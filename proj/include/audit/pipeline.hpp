#ifndef AUDIT_PIPELINE_HPP
#define AUDIT_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audit/chat.hpp"
#include "audit/halluc.hpp"
#include "audit/normalize.hpp"
#include "audit/providers.hpp"

namespace audit::pipeline {

struct ProviderSpec {
    std::string name;
    std::string path;                                  // empty when mocked
    providers::TranscriptFormat format = providers::TranscriptFormat::json_map;
    bool mock = false;
    std::map<std::string, providers::ErrorModel> mock_by_group;   // participant group -> model
};

struct MatchSpec {
    bool enabled = false;
    double caliper = 0.13;
    bool caliper_on_logit_sd = false;
};

struct RegressSpec {
    bool enabled = false;
    std::string level = "RFFRR";
};

struct HallucSpec {
    bool enabled = false;
    std::string provider;          // defaults to first provider
    std::string level = "RFFRR";
    halluc::FlagRules rules;
};

struct AuditConfig {
    std::string corpus_manifest;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::vector<ProviderSpec> providers;
    std::vector<normalize::Level> levels = {normalize::Level::RFFRR};
    std::vector<std::string> axes = {"group"};
    int min_cell_segments = 5;
    normalize::NormalizationRules rules;
    chat::SegmentationConfig segmentation;
    MatchSpec matching;
    RegressSpec regression;
    HallucSpec hallucination;
};

AuditConfig config_from_json_file(const std::string& path);

struct Corpus {
    std::vector<chat::Participant> participants;
    std::vector<chat::Segment> segments;
    std::vector<chat::DropRecord> dropped;
};

// Stage entry points. Each reads its inputs from files under cfg.out_dir
// (or the corpus manifest) and writes its artifacts back, so subcommands
// and the full DAG share one code path.
void stage_ingest(const AuditConfig& cfg);
void stage_transcribe(const AuditConfig& cfg);
void stage_metrics(const AuditConfig& cfg);
void stage_features(const AuditConfig& cfg);
void stage_stats(const AuditConfig& cfg);
void stage_match(const AuditConfig& cfg);
void stage_regress(const AuditConfig& cfg);
void stage_halluc_flag(const AuditConfig& cfg);
void stage_report(const AuditConfig& cfg);

struct StageStatus {
    std::string stage;
    std::string status;    // ok | failed | skipped
    std::string error;
};

struct RunReport {
    std::vector<StageStatus> stages;
    bool ok() const;
    std::string first_failed_stage() const;
};

// Full DAG with stage isolation: a failing stage marks its dependents
// skipped but unrelated stages still run.
RunReport run_pipeline(const AuditConfig& cfg);

// Helpers shared with the CLI and tests.
Corpus load_corpus(const AuditConfig& cfg);
Corpus read_segments_artifact(const std::string& out_dir);

}  // namespace audit::pipeline

#endif
