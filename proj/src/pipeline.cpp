#include "audit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "audit/acoustics.hpp"
#include "audit/align.hpp"
#include "audit/csv.hpp"
#include "audit/error.hpp"
#include "audit/match.hpp"
#include "audit/metrics.hpp"
#include "audit/regress.hpp"
#include "audit/stats.hpp"
#include "audit/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace audit::pipeline {

namespace {

std::string art(const AuditConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

const char* token_class_name(chat::TokenClass c) {
    switch (c) {
        case chat::TokenClass::word: return "word";
        case chat::TokenClass::filler: return "filler";
        case chat::TokenClass::fragment: return "fragment";
        case chat::TokenClass::unintelligible: return "unintelligible";
        case chat::TokenClass::gesture: return "gesture";
        case chat::TokenClass::marker: return "marker";
    }
    return "?";
}

chat::TokenClass token_class_from_name(const std::string& s) {
    if (s == "word") return chat::TokenClass::word;
    if (s == "filler") return chat::TokenClass::filler;
    if (s == "fragment") return chat::TokenClass::fragment;
    if (s == "unintelligible") return chat::TokenClass::unintelligible;
    if (s == "gesture") return chat::TokenClass::gesture;
    if (s == "marker") return chat::TokenClass::marker;
    throw AuditError("bad_record", "unknown token class " + s);
}

chat::Participant participant_from_json(const json& j) {
    chat::Participant p;
    p.id = j.at("id").get<std::string>();
    std::string group = j.at("group").get<std::string>();
    if (group == "aphasia") p.group = chat::Group::aphasia;
    else if (group == "control") p.group = chat::Group::control;
    else throw AuditError("bad_manifest", "unknown group " + group);
    if (j.contains("fluency") && !j["fluency"].is_null()) {
        std::string f = j["fluency"].get<std::string>();
        p.fluency = f == "fluent" ? chat::Fluency::fluent : chat::Fluency::non_fluent;
    }
    if (j.contains("boston_type") && !j["boston_type"].is_null()) {
        std::string b = j["boston_type"].get<std::string>();
        if (b == "anomic") p.boston_type = chat::BostonType::anomic;
        else if (b == "broca") p.boston_type = chat::BostonType::broca;
        else if (b == "conduction") p.boston_type = chat::BostonType::conduction;
        else if (b == "global") p.boston_type = chat::BostonType::global;
        else if (b == "wernicke") p.boston_type = chat::BostonType::wernicke;
        else p.boston_type = chat::BostonType::other;
    }
    p.wab_score = j.value("wab_score", 100.0);
    p.age = j.value("age", 0.0);
    p.gender = j.value("gender", std::string());
    p.race = j.value("race", std::string());
    p.education = j.value("education", std::string());
    p.primary_language = j.value("primary_language", std::string("eng"));
    if (p.group == chat::Group::control) {
        p.wab_score = 100.0;            // controls carry the ceiling score
        p.fluency.reset();
        p.boston_type.reset();
    }
    return p;
}

std::map<std::string, chat::Participant> load_participants(const AuditConfig& cfg) {
    std::ifstream in(cfg.corpus_manifest);
    if (!in) throw AuditError("io_error", "cannot open " + cfg.corpus_manifest);
    json j;
    in >> j;
    std::map<std::string, chat::Participant> out;
    for (const auto& pj : j.at("participants")) {
        chat::Participant p = participant_from_json(pj);
        out[p.id] = p;
    }
    return out;
}

std::string axis_value(const chat::Participant& p, const std::string& axis) {
    if (axis == "group")
        return p.group == chat::Group::aphasia ? "aphasia" : "control";
    if (axis == "fluency") {
        if (!p.fluency) return "na";
        return *p.fluency == chat::Fluency::fluent ? "fluent" : "non_fluent";
    }
    if (axis == "boston_type") {
        if (!p.boston_type) return "na";
        switch (*p.boston_type) {
            case chat::BostonType::anomic: return "anomic";
            case chat::BostonType::broca: return "broca";
            case chat::BostonType::conduction: return "conduction";
            case chat::BostonType::global: return "global";
            case chat::BostonType::wernicke: return "wernicke";
            case chat::BostonType::other: return "other";
        }
    }
    if (axis == "gender") return p.gender.empty() ? "na" : p.gender;
    if (axis == "race") return p.race.empty() ? "na" : p.race;
    if (axis == "education") return p.education.empty() ? "na" : p.education;
    throw AuditError("unknown_axis", "no subgroup axis named '" + axis + "'");
}

// composite axes use '+' ("group+fluency")
std::string cell_value(const chat::Participant& p, const std::string& axis) {
    std::string out;
    std::stringstream parts(axis);
    std::string part;
    while (std::getline(parts, part, '+')) {
        if (!out.empty()) out += "|";
        out += axis_value(p, part);
    }
    return out;
}

struct MetricRow {
    std::string segment_id, participant_id, provider, level;
    metrics::MetricRecord rec;
};

std::vector<MetricRow> read_metrics_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw AuditError("bad_artifact", "empty metrics csv");
    std::vector<MetricRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 19)
            throw AuditError("bad_artifact", "metrics csv row width != 19");
        MetricRow m;
        m.segment_id = row[0];
        m.participant_id = row[1];
        m.provider = row[2];
        m.level = row[3];
        m.rec.wer = std::stod(row[4]);
        m.rec.cer = std::stod(row[5]);
        m.rec.wil = std::stod(row[6]);
        m.rec.ril = std::stod(row[7]);
        m.rec.bleu = std::stod(row[8]);
        m.rec.rouge1 = std::stod(row[9]);
        m.rec.rouge2 = std::stod(row[10]);
        m.rec.rougeL = std::stod(row[11]);
        m.rec.meteor = std::stod(row[12]);
        m.rec.insertion_rate = std::stod(row[13]);
        m.rec.n_ref = std::stoi(row[14]);
        m.rec.n_hyp = std::stoi(row[15]);
        m.rec.s = std::stoi(row[16]);
        m.rec.i = std::stoi(row[17]);
        m.rec.d = std::stoi(row[18]);
        out.push_back(std::move(m));
    }
    return out;
}

struct FeatureRow {
    std::string segment_id;
    double total_duration_s = 0.0;
    double nonvocal_share = 0.0;
    double noise_rms = 0.0;
    bool imputed = false;
};

std::map<std::string, FeatureRow> read_features_csv(const std::string& path) {
    std::map<std::string, FeatureRow> out;
    if (!fs::exists(path)) return out;
    auto rows = csv::read_file(path);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 6)
            throw AuditError("bad_artifact", "features csv row width != 6");
        FeatureRow f;
        f.segment_id = row[0];
        f.total_duration_s = std::stod(row[1]);
        f.nonvocal_share = std::stod(row[2]);
        f.noise_rms = row[3].empty() ? 0.0 : std::stod(row[3]);
        f.imputed = row[5] == "1";
        out[f.segment_id] = f;
    }
    return out;
}

std::map<std::string, std::map<std::string, std::string>> read_transcripts(
    const AuditConfig& cfg) {
    // provider -> segment -> text
    auto records = providers::read_jsonl(art(cfg, "transcripts.jsonl"));
    std::map<std::string, std::map<std::string, std::string>> out;
    for (const auto& rec : records) out[rec.provider][rec.segment_id] = rec.raw_text;
    return out;
}

std::vector<double> wers_for(const std::vector<MetricRow>& rows,
                             const std::string& provider, const std::string& level,
                             const std::map<std::string, chat::Participant>& people,
                             chat::Group group) {
    std::vector<double> out;
    for (const auto& row : rows) {
        if (row.provider != provider || row.level != level) continue;
        auto it = people.find(row.participant_id);
        if (it == people.end() || it->second.group != group) continue;
        out.push_back(row.rec.wer);
    }
    return out;
}

// drops zero-variance columns (synthetic corpora often pin a covariate)
void prune_constant_columns(causal::DesignMatrix& x) {
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < x.k(); ++j) {
        if (x.column_names[j] == "intercept") {
            keep.push_back(j);
            continue;
        }
        bool constant = true;
        for (std::size_t i = 1; i < x.n(); ++i)
            if (x.rows[i][j] != x.rows[0][j]) { constant = false; break; }
        if (!constant) keep.push_back(j);
    }
    if (keep.size() == x.k()) return;
    std::vector<std::string> names;
    for (std::size_t j : keep) names.push_back(x.column_names[j]);
    for (auto& row : x.rows) {
        std::vector<double> pruned;
        for (std::size_t j : keep) pruned.push_back(row[j]);
        row = std::move(pruned);
    }
    x.column_names = std::move(names);
}

}  // namespace

AuditConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AuditError("config_error", "cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw AuditError("config_error", e.what());
    }
    AuditConfig cfg;
    try {
        cfg.corpus_manifest = j.at("corpus_manifest").get<std::string>();
        cfg.out_dir = j.at("out_dir").get<std::string>();
        cfg.seed = j.value("seed", 0ull);
        if (j.contains("levels")) {
            cfg.levels.clear();
            for (const auto& l : j["levels"])
                cfg.levels.push_back(normalize::level_from_name(l.get<std::string>()));
        }
        if (j.contains("axes")) {
            cfg.axes.clear();
            for (const auto& a : j["axes"]) cfg.axes.push_back(a.get<std::string>());
        }
        cfg.min_cell_segments = j.value("min_cell_segments", 5);
        for (const auto& pj : j.at("providers")) {
            ProviderSpec spec;
            spec.name = pj.at("name").get<std::string>();
            if (pj.contains("mock")) {
                spec.mock = true;
                for (auto& [group, mj] : pj["mock"].items()) {
                    providers::ErrorModel model;
                    model.sub_rate = mj.value("sub_rate", 0.0);
                    model.del_rate = mj.value("del_rate", 0.0);
                    model.ins_rate = mj.value("ins_rate", 0.0);
                    model.seed = cfg.seed;
                    spec.mock_by_group[group] = model;
                }
            } else {
                spec.path = pj.at("path").get<std::string>();
                std::string format = pj.value("format", std::string("json_map"));
                if (format == "json_map")
                    spec.format = providers::TranscriptFormat::json_map;
                else if (format == "jsonl")
                    spec.format = providers::TranscriptFormat::jsonl;
                else if (format == "per_file_text")
                    spec.format = providers::TranscriptFormat::per_file_text;
                else
                    throw AuditError("config_error", "unknown format " + format);
            }
            cfg.providers.push_back(std::move(spec));
        }
        if (cfg.providers.empty() || cfg.levels.empty())
            throw AuditError("config_error", "need at least one provider and level");
        if (j.contains("rules_file"))
            cfg.rules = normalize::rules_from_json_file(j["rules_file"].get<std::string>());
        if (j.contains("segmentation")) {
            const auto& s = j["segmentation"];
            cfg.segmentation.min_duration_s =
                s.value("min_duration_s", cfg.segmentation.min_duration_s);
            cfg.segmentation.max_duration_s =
                s.value("max_duration_s", cfg.segmentation.max_duration_s);
            cfg.segmentation.min_words = s.value("min_words", cfg.segmentation.min_words);
            if (s.contains("interviewer_ids")) {
                cfg.segmentation.interviewer_ids.clear();
                for (const auto& id : s["interviewer_ids"])
                    cfg.segmentation.interviewer_ids.push_back(id.get<std::string>());
            }
        }
        if (j.contains("matching")) {
            cfg.matching.enabled = j["matching"].value("enabled", true);
            cfg.matching.caliper = j["matching"].value("caliper", 0.13);
            cfg.matching.caliper_on_logit_sd =
                j["matching"].value("caliper_on_logit_sd", false);
        }
        if (j.contains("regression")) {
            cfg.regression.enabled = j["regression"].value("enabled", true);
            cfg.regression.level = j["regression"].value("level", std::string("RFFRR"));
        }
        if (j.contains("halluc")) {
            cfg.hallucination.enabled = j["halluc"].value("enabled", true);
            cfg.hallucination.provider =
                j["halluc"].value("provider", cfg.providers.front().name);
            cfg.hallucination.level = j["halluc"].value("level", std::string("RFFRR"));
            cfg.hallucination.rules.min_breaches = j["halluc"].value("min_breaches", 1);
            cfg.hallucination.rules.lower_better_percentile =
                j["halluc"].value("lower_better_percentile", 90.0);
            cfg.hallucination.rules.higher_better_percentile =
                j["halluc"].value("higher_better_percentile", 10.0);
        }
    } catch (const json::exception& e) {
        throw AuditError("config_error", e.what());
    }
    return cfg;
}

Corpus load_corpus(const AuditConfig& cfg) {
    std::ifstream in(cfg.corpus_manifest);
    if (!in) throw AuditError("io_error", "cannot open " + cfg.corpus_manifest);
    json j;
    in >> j;

    Corpus corpus;
    for (const auto& pj : j.at("participants"))
        corpus.participants.push_back(participant_from_json(pj));
    std::set<std::string> ids;
    for (const auto& p : corpus.participants) ids.insert(p.id);

    const fs::path base = fs::path(cfg.corpus_manifest).parent_path();
    int interview_idx = 0;
    for (const auto& ij : j.at("interviews")) {
        std::string pid = ij.at("participant_id").get<std::string>();
        if (!ids.count(pid))
            throw AuditError("bad_manifest", "unknown participant " + pid);
        std::string chat_path = ij.at("chat_path").get<std::string>();
        std::string audio_path = ij.value("audio_path", std::string());
        fs::path resolved = fs::path(chat_path).is_absolute()
                                ? fs::path(chat_path)
                                : base / chat_path;
        std::ifstream chat_in(resolved);
        if (!chat_in)
            throw AuditError("io_error", "cannot open " + resolved.string());

        std::vector<chat::Utterance> utts;
        std::string line;
        while (std::getline(chat_in, line)) {
            if (line.empty() || line[0] == '@') continue;   // CHAT headers
            utts.push_back(chat::parse_chat_utterance(line));
        }
        chat::SegmentationResult segmented = chat::segment_corpus(utts, cfg.segmentation);
        int k = 0;
        for (auto& seg : segmented.segments) {
            seg.id = pid + "_i" + std::to_string(interview_idx) + "_" +
                     std::to_string(k++);
            seg.participant_id = pid;
            if (!audio_path.empty()) {
                fs::path ap = fs::path(audio_path).is_absolute()
                                  ? fs::path(audio_path)
                                  : base / audio_path;
                seg.audio_path = ap.string();
            }
            corpus.segments.push_back(std::move(seg));
        }
        for (auto& drop : segmented.dropped) {
            drop.segment_id =
                pid + "_i" + std::to_string(interview_idx) + "_" + drop.segment_id;
            corpus.dropped.push_back(std::move(drop));
        }
        ++interview_idx;
    }
    return corpus;
}

void stage_ingest(const AuditConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    Corpus corpus = load_corpus(cfg);

    json segs = json::array();
    for (const auto& seg : corpus.segments) {
        json tokens = json::array();
        for (const auto& t : seg.ground_truth)
            tokens.push_back({{"s", t.surface},
                              {"c", token_class_name(t.cls)},
                              {"r", t.repetition_marked}});
        segs.push_back({{"id", seg.id},
                        {"participant_id", seg.participant_id},
                        {"audio_path", seg.audio_path},
                        {"duration_s", seg.duration_s},
                        {"word_count", seg.word_count},
                        {"tokens", tokens}});
    }
    std::ofstream out(art(cfg, "segments.json"), std::ios::binary);
    out << json{{"segments", segs}}.dump(2) << '\n';

    std::ofstream drop(art(cfg, "drop_log.csv"), std::ios::binary);
    drop << "segment_id,reason\n";
    for (const auto& d : corpus.dropped)
        drop << csv::join_row({d.segment_id, d.reason});
}

Corpus read_segments_artifact(const std::string& out_dir) {
    std::string path = (fs::path(out_dir) / "segments.json").string();
    std::ifstream in(path);
    if (!in) throw AuditError("io_error", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw AuditError("bad_artifact", e.what());
    }
    Corpus corpus;
    for (const auto& sj : j.at("segments")) {
        chat::Segment seg;
        seg.id = sj.at("id").get<std::string>();
        seg.participant_id = sj.at("participant_id").get<std::string>();
        seg.audio_path = sj.value("audio_path", std::string());
        seg.duration_s = sj.at("duration_s").get<double>();
        seg.word_count = sj.at("word_count").get<int>();
        for (const auto& tj : sj.at("tokens"))
            seg.ground_truth.push_back(
                {tj.at("s").get<std::string>(),
                 token_class_from_name(tj.at("c").get<std::string>()),
                 tj.value("r", false)});
        corpus.segments.push_back(std::move(seg));
    }
    return corpus;
}

void stage_transcribe(const AuditConfig& cfg) {
    Corpus corpus = read_segments_artifact(cfg.out_dir);
    auto people = load_participants(cfg);

    std::vector<providers::TranscriptRecord> all;
    for (const auto& spec : cfg.providers) {
        if (spec.mock) {
            // split segments by participant group so planted error rates differ
            std::map<std::string, std::vector<chat::Segment>> by_group;
            for (const auto& seg : corpus.segments) {
                auto it = people.find(seg.participant_id);
                if (it == people.end())
                    throw AuditError("bad_manifest",
                                     "segment references unknown participant " +
                                         seg.participant_id);
                const chat::Participant& p = it->second;
                std::string key;
                if (p.fluency &&
                    spec.mock_by_group.count(*p.fluency == chat::Fluency::fluent
                                                 ? "fluent"
                                                 : "non_fluent"))
                    key = *p.fluency == chat::Fluency::fluent ? "fluent" : "non_fluent";
                else
                    key = p.group == chat::Group::aphasia ? "aphasia" : "control";
                by_group[key].push_back(seg);
            }
            std::map<std::string, providers::TranscriptRecord> merged;
            for (const auto& [group, segs] : by_group) {
                auto it = spec.mock_by_group.find(group);
                providers::ErrorModel model =
                    it != spec.mock_by_group.end() ? it->second
                                                   : providers::ErrorModel{0, 0, 0, cfg.seed};
                // provider name keeps mocked providers' streams distinct
                providers::ErrorModel seeded = model;
                std::uint64_t h = 1469598103934665603ull;
                for (unsigned char c : spec.name) {
                    h ^= c;
                    h *= 1099511628211ull;
                }
                seeded.seed ^= h;
                for (auto& rec : providers::mock_asr(segs, spec.name, seeded))
                    merged[rec.segment_id] = std::move(rec);
            }
            for (const auto& seg : corpus.segments)
                all.push_back(merged.at(seg.id));
        } else {
            std::vector<std::string> manifest_ids;
            for (const auto& seg : corpus.segments) manifest_ids.push_back(seg.id);
            auto report = providers::ingest_transcripts(spec.path, spec.name,
                                                        spec.format, manifest_ids);
            for (auto& rec : report.records) all.push_back(std::move(rec));
        }
    }
    providers::write_jsonl(all, art(cfg, "transcripts.jsonl"));
}

void stage_metrics(const AuditConfig& cfg) {
    Corpus corpus = read_segments_artifact(cfg.out_dir);
    auto transcripts = read_transcripts(cfg);

    std::ofstream out(art(cfg, "metrics.csv"), std::ios::binary);
    out << "segment_id,participant_id,provider,level,wer,cer,wil,ril,bleu,rouge1,"
           "rouge2,rougeL,meteor,insertion_rate,n_ref,n_hyp,s,i,d\n";
    for (const auto& seg : corpus.segments) {
        for (const auto& spec : cfg.providers) {
            auto pit = transcripts.find(spec.name);
            if (pit == transcripts.end())
                throw AuditError("bad_artifact",
                                 "no transcripts for provider " + spec.name);
            auto sit = pit->second.find(seg.id);
            std::string raw = sit == pit->second.end() ? std::string() : sit->second;
            std::vector<std::string> hyp = normalize::standardize_asr_text(raw, cfg.rules);
            for (normalize::Level level : cfg.levels) {
                std::vector<std::string> ref = normalize::standardize_ground_truth(
                    seg.ground_truth, level, cfg.rules);
                metrics::MetricRecord rec = metrics::metric_suite(ref, hyp);
                out << csv::join_row(
                    {seg.id, seg.participant_id, spec.name,
                     normalize::level_name(level), csv::format_double(rec.wer),
                     csv::format_double(rec.cer), csv::format_double(rec.wil),
                     csv::format_double(rec.ril), csv::format_double(rec.bleu),
                     csv::format_double(rec.rouge1), csv::format_double(rec.rouge2),
                     csv::format_double(rec.rougeL), csv::format_double(rec.meteor),
                     csv::format_double(rec.insertion_rate),
                     std::to_string(rec.n_ref), std::to_string(rec.n_hyp),
                     std::to_string(rec.s), std::to_string(rec.i),
                     std::to_string(rec.d)});
            }
        }
    }
}

void stage_features(const AuditConfig& cfg) {
    Corpus corpus = read_segments_artifact(cfg.out_dir);

    struct Row {
        std::string id;
        acoustics::AudioFeatures features;
    };
    std::vector<Row> rows;
    std::vector<double> present_rms;
    for (const auto& seg : corpus.segments) {
        if (seg.audio_path.empty() || !fs::exists(seg.audio_path)) continue;
        audio::AudioBuffer buf = audio::read_wav(seg.audio_path);
        Row row{seg.id, acoustics::extract_features(buf)};
        if (row.features.noise_rms) present_rms.push_back(*row.features.noise_rms);
        rows.push_back(std::move(row));
    }
    double median_rms = 0.0;
    if (!present_rms.empty()) {
        std::sort(present_rms.begin(), present_rms.end());
        median_rms = present_rms[present_rms.size() / 2];
    }

    std::ofstream out(art(cfg, "features.csv"), std::ios::binary);
    out << "segment_id,total_duration_s,nonvocal_share,noise_rms,noise_db,imputed\n";
    for (const auto& row : rows) {
        // quiet-frame-free files take the corpus median with a flag
        double rms = row.features.noise_rms.value_or(median_rms);
        bool imputed = !row.features.noise_rms.has_value();
        std::string db = row.features.noise_db
                             ? csv::format_double(*row.features.noise_db)
                             : (rms > 0.0 ? csv::format_double(20.0 * std::log10(rms))
                                          : std::string());
        out << csv::join_row({row.id, csv::format_double(row.features.total_duration_s),
                              csv::format_double(row.features.nonvocal_share),
                              csv::format_double(rms), db, imputed ? "1" : "0"});
    }
}

void stage_stats(const AuditConfig& cfg) {
    auto rows = read_metrics_csv(art(cfg, "metrics.csv"));
    auto people = load_participants(cfg);

    struct Comparison {
        std::string id;
        stats::TestResult result;
    };
    std::vector<Comparison> comparisons;
    for (const auto& spec : cfg.providers) {
        for (normalize::Level level : cfg.levels) {
            std::vector<double> aphasia = wers_for(rows, spec.name,
                                                   normalize::level_name(level), people,
                                                   chat::Group::aphasia);
            std::vector<double> control = wers_for(rows, spec.name,
                                                   normalize::level_name(level), people,
                                                   chat::Group::control);
            if (aphasia.empty() || control.empty()) continue;
            Comparison cmp;
            cmp.id = spec.name + std::string(":") + normalize::level_name(level) +
                     ":aphasia_vs_control";
            cmp.result = stats::mann_whitney_u(aphasia, control);
            comparisons.push_back(std::move(cmp));
        }
    }

    std::vector<double> raw;
    for (const auto& c : comparisons) raw.push_back(c.result.p_value);
    std::vector<double> adjusted =
        raw.empty() ? raw
                    : stats::adjust_pvalues(raw, stats::AdjustMethod::benjamini_hochberg);

    std::ofstream out(art(cfg, "tests.csv"), std::ios::binary);
    out << "comparison_id,method,statistic,p_raw,p_adjusted,adjust_method,n1,n2,"
           "degenerate\n";
    for (std::size_t i = 0; i < comparisons.size(); ++i) {
        const auto& c = comparisons[i];
        out << csv::join_row(
            {c.id, stats::method_name(c.result.method),
             csv::format_double(c.result.statistic),
             csv::format_double(c.result.p_value), csv::format_double(adjusted[i]),
             "benjamini_hochberg", std::to_string(c.result.n[0]),
             std::to_string(c.result.n.size() > 1 ? c.result.n[1] : 0),
             c.result.degenerate ? "1" : "0"});
    }
}

void stage_match(const AuditConfig& cfg) {
    Corpus corpus = read_segments_artifact(cfg.out_dir);
    auto people = load_participants(cfg);
    auto features = read_features_csv(art(cfg, "features.csv"));

    std::vector<std::string> covariate_names = {"age", "word_count", "duration_s"};
    const bool with_audio = !features.empty();
    if (with_audio) {
        covariate_names.push_back("nonvocal_share");
        covariate_names.push_back("noise_rms");
    }

    std::vector<causal::Unit> units;
    for (const auto& seg : corpus.segments) {
        auto it = people.find(seg.participant_id);
        if (it == people.end()) continue;
        causal::Unit u;
        u.id = seg.id;
        u.treated = it->second.group == chat::Group::aphasia;
        u.covariates = {it->second.age, static_cast<double>(seg.word_count),
                        seg.duration_s};
        if (with_audio) {
            auto fit = features.find(seg.id);
            if (fit == features.end()) continue;
            u.covariates.push_back(fit->second.nonvocal_share);
            u.covariates.push_back(fit->second.noise_rms);
        }
        units.push_back(std::move(u));
    }

    causal::MatchConfig mc;
    mc.caliper = cfg.matching.caliper;
    mc.caliper_on_logit_sd = cfg.matching.caliper_on_logit_sd;
    causal::MatchResult result = causal::propensity_match(units, covariate_names, mc);

    std::ofstream out(art(cfg, "match.csv"), std::ios::binary);
    out << "treated_id,control_id,propensity_t,propensity_c\n";
    for (const auto& [t, c] : result.pairs)
        out << csv::join_row({t, c, csv::format_double(result.propensity.at(t)),
                              csv::format_double(result.propensity.at(c))});

    std::ofstream bal(art(cfg, "match_balance.csv"), std::ios::binary);
    bal << "covariate,smd_before,smd_after\n";
    for (const auto& [name, before] : result.smd_before) {
        auto it = result.smd_after.find(name);
        bal << csv::join_row({name, csv::format_double(before),
                              it != result.smd_after.end()
                                  ? csv::format_double(it->second)
                                  : std::string()});
    }
}

void stage_regress(const AuditConfig& cfg) {
    auto rows = read_metrics_csv(art(cfg, "metrics.csv"));
    auto people = load_participants(cfg);
    auto features = read_features_csv(art(cfg, "features.csv"));

    std::set<std::string> providers_sorted, genders;
    for (const auto& spec : cfg.providers) providers_sorted.insert(spec.name);
    for (const auto& [id, p] : people)
        if (!p.gender.empty()) genders.insert(p.gender);

    causal::DesignMatrix x;
    x.column_names = {"intercept", "aphasia", "age", "age_sq", "word_count",
                      "duration_s"};
    std::vector<std::string> provider_cols(std::next(providers_sorted.begin()),
                                           providers_sorted.end());
    for (const auto& name : provider_cols) x.column_names.push_back("provider_" + name);
    std::vector<std::string> gender_cols;
    if (genders.size() > 1)
        gender_cols.assign(std::next(genders.begin()), genders.end());
    for (const auto& g : gender_cols) x.column_names.push_back("gender_" + g);
    const bool with_audio = !features.empty();
    if (with_audio) {
        x.column_names.push_back("nonvocal_share");
        x.column_names.push_back("noise_rms");
        x.column_names.push_back("noise_imputed");
    }

    std::vector<double> y;
    for (const auto& row : rows) {
        if (row.level != cfg.regression.level) continue;
        auto it = people.find(row.participant_id);
        if (it == people.end()) continue;
        const chat::Participant& p = it->second;
        std::vector<double> r = {1.0,
                                 p.group == chat::Group::aphasia ? 1.0 : 0.0,
                                 p.age,
                                 p.age * p.age,
                                 static_cast<double>(row.rec.n_ref),
                                 0.0};
        for (const auto& name : provider_cols)
            r.push_back(row.provider == name ? 1.0 : 0.0);
        for (const auto& g : gender_cols) r.push_back(p.gender == g ? 1.0 : 0.0);
        if (with_audio) {
            auto fit = features.find(row.segment_id);
            if (fit == features.end()) continue;
            r[5] = fit->second.total_duration_s;
            r.push_back(fit->second.nonvocal_share);
            r.push_back(fit->second.noise_rms);
            r.push_back(fit->second.imputed ? 1.0 : 0.0);
        }
        x.rows.push_back(std::move(r));
        x.cluster_id.push_back(row.participant_id);
        y.push_back(row.rec.wer);
    }
    if (x.rows.empty())
        throw AuditError("no_data", "no metric rows at level " + cfg.regression.level);
    prune_constant_columns(x);

    std::ofstream out(art(cfg, "regression.csv"), std::ios::binary);
    out << "term,estimate,clustered_se,p_value,model_id\n";

    causal::RegressionResult ols = causal::ols_clustered(x, y);
    for (std::size_t j = 0; j < ols.terms.size(); ++j)
        out << csv::join_row({ols.terms[j], csv::format_double(ols.coefficients[j]),
                              csv::format_double(ols.se[j]),
                              csv::format_double(ols.p_values[j]), "wer_ols"});

    std::vector<double> clamped(y.size());
    std::transform(y.begin(), y.end(), clamped.begin(),
                   [](double v) { return std::clamp(v, 0.0, 1.0); });
    causal::RegressionResult probit = causal::fit_probit(x, clamped);
    for (std::size_t j = 0; j < probit.terms.size(); ++j)
        out << csv::join_row({probit.terms[j],
                              csv::format_double(probit.coefficients[j]),
                              csv::format_double(probit.se[j]),
                              csv::format_double(probit.p_values[j]), "wer_probit"});
}

void stage_halluc_flag(const AuditConfig& cfg) {
    auto rows = read_metrics_csv(art(cfg, "metrics.csv"));
    Corpus corpus = read_segments_artifact(cfg.out_dir);
    auto transcripts = read_transcripts(cfg);

    const std::string provider = cfg.hallucination.provider.empty()
                                     ? cfg.providers.front().name
                                     : cfg.hallucination.provider;
    std::vector<halluc::FlagInput> table;
    for (const auto& row : rows) {
        if (row.provider != provider || row.level != cfg.hallucination.level) continue;
        halluc::FlagInput input;
        input.segment_id = row.segment_id;
        input.record = row.rec;
        metrics::AlignmentResult a;
        a.S = row.rec.s;
        a.I = row.rec.i;
        a.D = row.rec.d;
        input.error_class = halluc::classify_error_type(a);
        table.push_back(std::move(input));
    }
    std::vector<std::string> flagged =
        halluc::flag_candidates(table, cfg.hallucination.rules);
    std::set<std::string> flagged_set(flagged.begin(), flagged.end());

    std::ofstream out(art(cfg, "candidates.csv"), std::ios::binary);
    out << "segment_id,provider,level,min_breaches\n";
    for (const auto& id : flagged)
        out << csv::join_row({id, provider, cfg.hallucination.level,
                              std::to_string(cfg.hallucination.rules.min_breaches)});

    std::vector<halluc::ReviewItem> items;
    for (const auto& seg : corpus.segments) {
        if (!flagged_set.count(seg.id)) continue;
        halluc::ReviewItem item;
        item.segment_id = seg.id;
        item.provider = provider;
        item.ref_text = normalize::join_words(normalize::standardize_ground_truth(
            seg.ground_truth,
            normalize::level_from_name(cfg.hallucination.level), cfg.rules));
        auto pit = transcripts.find(provider);
        if (pit != transcripts.end()) {
            auto sit = pit->second.find(seg.id);
            if (sit != pit->second.end())
                item.hyp_text = normalize::join_words(
                    normalize::standardize_asr_text(sit->second, cfg.rules));
        }
        item.audio_path = seg.audio_path;
        items.push_back(std::move(item));
    }
    halluc::export_review_sheet(items, art(cfg, "review_sheet.csv"));
}

void stage_report(const AuditConfig& cfg) {
    auto rows = read_metrics_csv(art(cfg, "metrics.csv"));
    auto people = load_participants(cfg);

    struct Cell {
        long long errors = 0, words = 0;
        double wer_sum = 0.0;
        int n = 0;
    };
    auto add = [](Cell& cell, const MetricRow& row) {
        cell.errors += row.rec.s + row.rec.i + row.rec.d;
        cell.words += row.rec.n_ref;
        cell.wer_sum += row.rec.wer;
        cell.n += 1;
    };

    // summary: provider x group x level
    std::map<std::tuple<std::string, std::string, std::string>, Cell> summary;
    for (const auto& row : rows) {
        auto it = people.find(row.participant_id);
        if (it == people.end()) continue;
        std::string group =
            it->second.group == chat::Group::aphasia ? "aphasia" : "control";
        add(summary[{row.provider, group, row.level}], row);
    }
    {
        std::ofstream out(art(cfg, "summary.csv"), std::ios::binary);
        out << "provider,group,level,n_segments,n_words,weighted_wer,unweighted_wer\n";
        for (const auto& [key, cell] : summary) {
            const auto& [provider, group, level] = key;
            out << csv::join_row(
                {provider, group, level, std::to_string(cell.n),
                 std::to_string(cell.words),
                 csv::format_double(static_cast<double>(cell.errors) / cell.words),
                 csv::format_double(cell.wer_sum / cell.n)});
        }
    }

    // disaggregation with per-cell provider leaderboard
    std::ofstream out(art(cfg, "disaggregate.csv"), std::ios::binary);
    out << "axis,cell,provider,level,n_segments,weighted_wer,unweighted_wer,"
           "suppressed,provider_rank\n";
    for (const auto& axis : cfg.axes) {
        std::map<std::tuple<std::string, std::string, std::string>, Cell> cells;
        for (const auto& row : rows) {
            auto it = people.find(row.participant_id);
            if (it == people.end()) continue;
            add(cells[{cell_value(it->second, axis), row.provider, row.level}], row);
        }
        // rank providers inside each (cell, level) by weighted WER
        std::map<std::pair<std::string, std::string>,
                 std::vector<std::pair<double, std::string>>> leaderboard;
        for (const auto& [key, cell] : cells) {
            const auto& [value, provider, level] = key;
            leaderboard[{value, level}].push_back(
                {static_cast<double>(cell.errors) / cell.words, provider});
        }
        for (auto& [key, entries] : leaderboard) std::sort(entries.begin(), entries.end());

        for (const auto& [key, cell] : cells) {
            const auto& [value, provider, level] = key;
            const auto& entries = leaderboard[{value, level}];
            int rank = 0;
            for (std::size_t i = 0; i < entries.size(); ++i)
                if (entries[i].second == provider) rank = static_cast<int>(i) + 1;
            out << csv::join_row(
                {axis, value, provider, level, std::to_string(cell.n),
                 csv::format_double(static_cast<double>(cell.errors) / cell.words),
                 csv::format_double(cell.wer_sum / cell.n),
                 cell.n < cfg.min_cell_segments ? "1" : "0", std::to_string(rank)});
        }
    }
}

bool RunReport::ok() const {
    return std::all_of(stages.begin(), stages.end(), [](const StageStatus& s) {
        return s.status != "failed";
    });
}

std::string RunReport::first_failed_stage() const {
    for (const auto& s : stages)
        if (s.status == "failed") return s.stage;
    return {};
}

RunReport run_pipeline(const AuditConfig& cfg) {
    fs::create_directories(cfg.out_dir);

    struct Stage {
        std::string name;
        std::vector<std::string> deps;
        bool enabled;
        void (*fn)(const AuditConfig&);
    };
    const std::vector<Stage> stages = {
        {"ingest", {}, true, stage_ingest},
        {"transcribe", {"ingest"}, true, stage_transcribe},
        {"features", {"ingest"}, true, stage_features},
        {"metrics", {"ingest", "transcribe"}, true, stage_metrics},
        {"stats", {"metrics"}, true, stage_stats},
        {"match", {"ingest", "features"}, cfg.matching.enabled, stage_match},
        {"regress", {"metrics", "features"}, cfg.regression.enabled, stage_regress},
        {"halluc_flag", {"metrics", "transcribe"}, cfg.hallucination.enabled,
         stage_halluc_flag},
        {"report", {"metrics"}, true, stage_report},
    };

    RunReport report;
    std::map<std::string, bool> succeeded;
    for (const auto& stage : stages) {
        StageStatus status{stage.name, "ok", ""};
        if (!stage.enabled) {
            status.status = "skipped";
            status.error = "disabled";
        } else {
            bool deps_ok = std::all_of(
                stage.deps.begin(), stage.deps.end(),
                [&](const std::string& dep) { return succeeded[dep]; });
            if (!deps_ok) {
                status.status = "skipped";
                status.error = "dependency failed";
            } else {
                try {
                    stage.fn(cfg);
                } catch (const std::exception& e) {
                    status.status = "failed";
                    status.error = e.what();
                }
            }
        }
        succeeded[stage.name] = status.status == "ok";
        report.stages.push_back(std::move(status));
    }

    json log = json::array();
    for (const auto& s : report.stages)
        log.push_back({{"stage", s.stage}, {"status", s.status}, {"error", s.error}});
    std::ofstream out(art(cfg, "stage_log.json"), std::ios::binary);
    out << log.dump(2) << '\n';
    return report;
}

}  // namespace audit::pipeline
