#include "audit/providers.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "audit/error.hpp"
#include "audit/normalize.hpp"

namespace audit::providers {

namespace {

const char* status_name(TranscriptStatus s) {
    switch (s) {
        case TranscriptStatus::ok: return "ok";
        case TranscriptStatus::failed: return "failed";
        case TranscriptStatus::empty: return "empty";
    }
    return "?";
}

TranscriptStatus status_from_name(const std::string& s) {
    if (s == "ok") return TranscriptStatus::ok;
    if (s == "failed") return TranscriptStatus::failed;
    if (s == "empty") return TranscriptStatus::empty;
    throw AuditError("bad_record", "unknown transcript status " + s);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

IngestReport assemble(const std::map<std::string, std::string>& by_id,
                      int duplicates, const std::string& provider,
                      const std::vector<std::string>& manifest_ids) {
    std::set<std::string> manifest(manifest_ids.begin(), manifest_ids.end());
    std::string unknown;
    for (const auto& [id, text] : by_id) {
        if (!manifest.count(id)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += id;
        }
    }
    if (!unknown.empty())
        throw AuditError("unresolvable_segment",
                         "ids not in manifest: " + unknown);

    IngestReport report;
    report.duplicate_warnings = duplicates;
    for (const auto& id : manifest_ids) {
        TranscriptRecord rec;
        rec.segment_id = id;
        rec.provider = provider;
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            rec.status = TranscriptStatus::failed;   // failed => empty text
        } else {
            rec.raw_text = it->second;
            rec.status = it->second.empty() ? TranscriptStatus::empty
                                            : TranscriptStatus::ok;
        }
        report.records.push_back(std::move(rec));
    }
    return report;
}

}  // namespace

IngestReport ingest_transcripts(const std::string& path, const std::string& provider,
                                TranscriptFormat format,
                                const std::vector<std::string>& manifest_segment_ids) {
    std::map<std::string, std::string> by_id;
    int duplicates = 0;
    auto insert = [&](const std::string& id, const std::string& text) {
        if (by_id.count(id)) ++duplicates;   // last wins
        by_id[id] = text;
    };

    if (format == TranscriptFormat::json_map) {
        std::ifstream in(path);
        if (!in) throw AuditError("io_error", "cannot open " + path);
        nlohmann::json j;
        in >> j;
        for (auto& [id, text] : j.items()) insert(id, text.get<std::string>());
    } else if (format == TranscriptFormat::jsonl) {
        std::ifstream in(path);
        if (!in) throw AuditError("io_error", "cannot open " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            insert(j.at("segment_id").get<std::string>(),
                   j.value("text", std::string()));
        }
    } else {
        namespace fs = std::filesystem;
        if (!fs::is_directory(path))
            throw AuditError("io_error", path + " is not a directory");
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.path().extension() == ".txt") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream in(file);
            std::stringstream buffer;
            buffer << in.rdbuf();
            std::string text = buffer.str();
            while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
                text.pop_back();
            insert(file.stem().string(), text);
        }
    }
    return assemble(by_id, duplicates, provider, manifest_segment_ids);
}

std::vector<TranscriptRecord> mock_asr(const std::vector<chat::Segment>& segments,
                                       const std::string& provider,
                                       const ErrorModel& model) {
    if (model.sub_rate < 0 || model.sub_rate > 1 || model.del_rate < 0 ||
        model.del_rate > 1 || model.ins_rate < 0 || model.ins_rate > 1)
        throw AuditError("bad_argument", "rates must lie in [0, 1]");

    std::vector<TranscriptRecord> records;
    for (const auto& seg : segments) {
        int junk_counter = 0;
        // per-segment stream: output is independent of corpus ordering
        std::mt19937_64 rng(model.seed ^ fnv1a(seg.id));
        auto uniform = [&rng]() {
            return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        };
        std::vector<std::string> words =
            normalize::standardize_ground_truth(seg.ground_truth,
                                                normalize::Level::RFFRR);
        std::vector<std::string> out;
        for (const auto& w : words) {
            double u = uniform();
            if (u < model.sub_rate) {
                out.push_back("xq" + std::to_string(junk_counter++));
            } else if (u < model.sub_rate + model.del_rate) {
                // deleted
            } else {
                out.push_back(w);
            }
            if (uniform() < model.ins_rate)
                out.push_back("xq" + std::to_string(junk_counter++));
        }
        TranscriptRecord rec;
        rec.segment_id = seg.id;
        rec.provider = provider;
        rec.raw_text = normalize::join_words(out);
        rec.status = rec.raw_text.empty() ? TranscriptStatus::empty
                                          : TranscriptStatus::ok;
        records.push_back(std::move(rec));
    }
    return records;
}

void write_jsonl(const std::vector<TranscriptRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw AuditError("io_error", "cannot write " + path);
    for (const auto& rec : records) {
        nlohmann::json j = {{"segment_id", rec.segment_id},
                            {"provider", rec.provider},
                            {"text", rec.raw_text},
                            {"status", status_name(rec.status)},
                            {"retrieved_at", rec.retrieved_at}};
        out << j.dump() << '\n';
    }
}

std::vector<TranscriptRecord> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AuditError("io_error", "cannot open " + path);
    std::vector<TranscriptRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        TranscriptRecord rec;
        rec.segment_id = j.at("segment_id").get<std::string>();
        rec.provider = j.at("provider").get<std::string>();
        rec.raw_text = j.value("text", std::string());
        rec.status = status_from_name(j.value("status", std::string("ok")));
        rec.retrieved_at = j.value("retrieved_at", std::string());
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace audit::providers
