#ifndef AUDIT_CHAT_HPP
#define AUDIT_CHAT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace audit::chat {

inline constexpr const char* kUnkSentinel = "xxx";

enum class TokenClass { word, filler, fragment, unintelligible, gesture, marker };

struct Token {
    std::string surface;
    TokenClass cls = TokenClass::word;
    bool repetition_marked = false;

    bool operator==(const Token&) const = default;
};

struct Utterance {
    std::string speaker_id;
    std::vector<Token> tokens;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
};

enum class Group { aphasia, control };
enum class Fluency { fluent, non_fluent };
enum class BostonType { anomic, broca, conduction, global, wernicke, other };

struct Participant {
    std::string id;
    Group group = Group::control;
    std::optional<Fluency> fluency;
    std::optional<BostonType> boston_type;
    double wab_score = 100.0;
    double age = 0.0;
    std::string gender;
    std::string race;
    std::string education;
    std::string primary_language = "eng";
};

struct Segment {
    std::string id;
    std::string participant_id;
    std::vector<Utterance> utterances;
    std::string audio_path;
    double duration_s = 0.0;
    int word_count = 0;          // post filler removal
    std::vector<Token> ground_truth;
};

struct ContaminationFlags {
    std::optional<bool> diarization_multi_speaker;
    bool wordcount_excess = false;
    bool interviewer_string_hit = false;
    std::optional<bool> manual_override;

    bool contaminated() const {
        if (manual_override) return *manual_override;
        return wordcount_excess || interviewer_string_hit ||
               diarization_multi_speaker.value_or(false);
    }
};

struct SegmentationConfig {
    double min_duration_s = 2.0;
    double max_duration_s = 240.0;
    int min_words = 4;
    double split_gap_s = 1.0;
    std::vector<std::string> interviewer_ids = {"INV", "IN1", "IN2"};
};

struct DropRecord {
    std::string segment_id;
    std::string reason;   // too_short | too_few_words | unintelligible | too_long_unsplittable
};

struct SegmentationResult {
    std::vector<Segment> segments;
    std::vector<DropRecord> dropped;
};

struct ContaminationConfig {
    int provider_threshold = 5;
    double excess_ratio = 1.5;
    std::vector<std::string> interviewer_patterns = {
        "tell me", "take a look at", "how to make a peanut butter sandwich"};
};

// Parses one speaker tier line ("*PAR:\t..." or bare content) with optional
// millisecond time stamps, classifying every spoken token.
Utterance parse_chat_utterance(const std::string& raw);

int spoken_word_count(const std::vector<Token>& tokens);

SegmentationResult segment_corpus(const std::vector<Utterance>& utterances,
                                  const SegmentationConfig& cfg);

ContaminationFlags flag_contamination(
    const Segment& seg,
    const std::vector<std::pair<std::string, int>>& provider_word_counts,
    const std::vector<std::string>& provider_texts,
    const ContaminationConfig& cfg,
    std::optional<bool> external_diarization = std::nullopt);

}  // namespace audit::chat

#endif
