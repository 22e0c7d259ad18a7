#ifndef AUDIT_PROVIDERS_HPP
#define AUDIT_PROVIDERS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "audit/chat.hpp"

namespace audit::providers {

enum class TranscriptStatus { ok, failed, empty };

struct TranscriptRecord {
    std::string segment_id;
    std::string provider;
    std::string raw_text;
    TranscriptStatus status = TranscriptStatus::ok;
    std::string retrieved_at;   // ISO-8601 or empty for synthetic records
};

enum class TranscriptFormat { json_map, jsonl, per_file_text };

struct IngestReport {
    std::vector<TranscriptRecord> records;
    int duplicate_warnings = 0;
};

// Reads provider output into one record per manifest segment. Segments the
// provider never produced become status=failed with empty text; duplicate
// ids resolve last-wins with a warning count.
IngestReport ingest_transcripts(const std::string& path, const std::string& provider,
                                TranscriptFormat format,
                                const std::vector<std::string>& manifest_segment_ids);

struct ErrorModel {
    double sub_rate = 0.0;
    double del_rate = 0.0;
    double ins_rate = 0.0;
    std::uint64_t seed = 0;
};

// Synthetic transcript generator: independent per-word corruptions of the
// ground truth, deterministic per seed.
std::vector<TranscriptRecord> mock_asr(const std::vector<chat::Segment>& segments,
                                       const std::string& provider,
                                       const ErrorModel& model);

void write_jsonl(const std::vector<TranscriptRecord>& records, const std::string& path);
std::vector<TranscriptRecord> read_jsonl(const std::string& path);

}  // namespace audit::providers

#endif
