#include "audit/chat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "audit/error.hpp"

namespace audit::chat {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Orthographic forms contain only letters, apostrophes, and hyphens.
// Anything else (phonetic codes, digits, '@' forms) maps to the UNK token.
bool is_orthographic(const std::string& w) {
    if (w.empty()) return false;
    for (unsigned char c : w) {
        if (!std::isalpha(c) && c != '\'' && c != '-') return false;
    }
    return true;
}

std::string strip_word_punct(const std::string& w) {
    std::size_t b = 0, e = w.size();
    auto droppable = [](char c) {
        return c == ',' || c == '.' || c == '?' || c == '!' || c == ';' || c == ':' ||
               c == '"' || c == '(' || c == ')';
    };
    while (b < e && droppable(w[b])) ++b;
    while (e > b && droppable(w[e - 1])) --e;
    return w.substr(b, e - b);
}

bool is_terminator(const std::string& w) {
    if (w.empty()) return true;
    if (w[0] == '+') return true;   // +..., +//, +/. and friends
    return std::all_of(w.begin(), w.end(), [](char c) {
        return c == '.' || c == '?' || c == '!' || c == ',' || c == ';';
    });
}

// CHAT stamps are milliseconds; fractional values are rounded half-up.
std::int64_t parse_stamp(const std::string& s) {
    return static_cast<std::int64_t>(std::floor(std::strtod(s.c_str(), nullptr) + 0.5));
}

bool looks_like_timestamp(const std::string& w, std::int64_t& start, std::int64_t& end) {
    auto us = w.find('_');
    if (us == std::string::npos || us == 0 || us + 1 >= w.size()) return false;
    auto numeric = [](const std::string& part) {
        bool digit = false;
        for (char c : part) {
            if (std::isdigit(static_cast<unsigned char>(c))) digit = true;
            else if (c != '.') return false;
        }
        return digit;
    };
    std::string a = w.substr(0, us), b = w.substr(us + 1);
    if (!numeric(a) || !numeric(b)) return false;
    start = parse_stamp(a);
    end = parse_stamp(b);
    return true;
}

void classify_and_append(const std::string& word, std::vector<Token>& out) {
    if (word.empty()) return;
    if (word.rfind("&-", 0) == 0) {
        std::string s = strip_word_punct(word.substr(2));
        if (!s.empty()) out.push_back({lower(s), TokenClass::filler, false});
        return;
    }
    if (word.rfind("&+", 0) == 0) {
        std::string s = strip_word_punct(word.substr(2));
        if (!s.empty()) out.push_back({lower(s), TokenClass::fragment, false});
        return;
    }
    if (word.rfind("&=", 0) == 0) return;   // gesture codes dropped
    std::string s = strip_word_punct(word);
    if (s.empty() || is_terminator(s)) return;
    if (lower(s) == kUnkSentinel) {
        out.push_back({kUnkSentinel, TokenClass::unintelligible, false});
        return;
    }
    if (!is_orthographic(s)) {
        out.push_back({kUnkSentinel, TokenClass::unintelligible, false});
        return;
    }
    out.push_back({lower(s), TokenClass::word, false});
}

}  // namespace

Utterance parse_chat_utterance(const std::string& raw) {
    Utterance utt;
    std::string content = raw;

    if (!raw.empty() && raw[0] == '*') {
        auto colon = raw.find(':');
        if (colon != std::string::npos) {
            utt.speaker_id = raw.substr(1, colon - 1);
            std::size_t body = colon + 1;
            while (body < raw.size() && is_space(raw[body])) ++body;
            content = raw.substr(body);
        }
    }

    std::vector<Token> tokens;
    std::size_t group_begin = std::string::npos;   // first token index inside <...>
    std::size_t last_group_begin = std::string::npos, last_group_end = std::string::npos;

    std::size_t i = 0;
    const std::size_t n = content.size();
    while (i < n) {
        if (is_space(content[i])) { ++i; continue; }
        char c = content[i];
        if (c == '\x15') {
            auto close = content.find('\x15', i + 1);
            if (close == std::string::npos)
                throw AuditError("parse_error",
                                 "unterminated time stamp at byte " + std::to_string(i));
            std::int64_t s, e;
            if (looks_like_timestamp(content.substr(i + 1, close - i - 1), s, e)) {
                utt.start_ms = s;
                utt.end_ms = e;
            }
            i = close + 1;
            continue;
        }
        if (c == '<') {
            if (group_begin != std::string::npos)
                throw AuditError("parse_error",
                                 "nested '<' at byte " + std::to_string(i));
            group_begin = tokens.size();
            ++i;
            continue;
        }
        if (c == '>') {
            if (group_begin == std::string::npos)
                throw AuditError("parse_error",
                                 "unmatched '>' at byte " + std::to_string(i));
            last_group_begin = group_begin;
            last_group_end = tokens.size();
            group_begin = std::string::npos;
            ++i;
            continue;
        }
        if (c == '[') {
            auto close = content.find(']', i + 1);
            if (close == std::string::npos)
                throw AuditError("parse_error",
                                 "unterminated '[' at byte " + std::to_string(i));
            std::string inner = content.substr(i + 1, close - i - 1);
            if (!inner.empty() && inner[0] == '/') {
                // repetition / retrace marker: repeated content is retained
                if (last_group_end == tokens.size() &&
                    last_group_begin != std::string::npos) {
                    for (std::size_t k = last_group_begin; k < last_group_end; ++k)
                        tokens[k].repetition_marked = true;
                } else if (!tokens.empty()) {
                    tokens.back().repetition_marked = true;
                }
            } else if (!inner.empty() && inner[0] == '+') {
                // utterance-level error code ([+ gram], [+ jar]): stripped
            } else {
                tokens.push_back({inner, TokenClass::marker, false});
            }
            i = close + 1;
            continue;
        }
        std::size_t start = i;
        while (i < n && !is_space(content[i]) && content[i] != '<' && content[i] != '>' &&
               content[i] != '[' && content[i] != '\x15')
            ++i;
        std::string word = content.substr(start, i - start);
        std::int64_t s, e;
        if (looks_like_timestamp(word, s, e)) {
            utt.start_ms = s;
            utt.end_ms = e;
            continue;
        }
        classify_and_append(word, tokens);
    }
    if (group_begin != std::string::npos)
        throw AuditError("parse_error", "unterminated '<' group");

    utt.tokens = std::move(tokens);
    return utt;
}

int spoken_word_count(const std::vector<Token>& tokens) {
    int n = 0;
    for (const auto& t : tokens)
        if (t.cls == TokenClass::word || t.cls == TokenClass::fragment) ++n;
    return n;
}

namespace {

struct Run {
    std::vector<Utterance> utts;
};

bool has_unintelligible(const std::vector<Token>& tokens) {
    return std::any_of(tokens.begin(), tokens.end(), [](const Token& t) {
        return t.cls == TokenClass::unintelligible;
    });
}

Segment make_segment(const std::string& id, std::vector<Utterance> utts) {
    Segment seg;
    seg.id = id;
    seg.participant_id = utts.front().speaker_id;
    seg.duration_s =
        static_cast<double>(utts.back().end_ms - utts.front().start_ms) / 1000.0;
    for (const auto& u : utts)
        seg.ground_truth.insert(seg.ground_truth.end(), u.tokens.begin(), u.tokens.end());
    seg.word_count = spoken_word_count(seg.ground_truth);
    seg.utterances = std::move(utts);
    return seg;
}

// Splits an over-long run at the inter-utterance gap (> split_gap_s) nearest
// to the duration cap, preferring split points at or before the cap.
void split_run(std::vector<Utterance> utts, const SegmentationConfig& cfg,
               std::vector<std::vector<Utterance>>& out,
               std::vector<std::vector<Utterance>>& unsplittable) {
    double duration =
        static_cast<double>(utts.back().end_ms - utts.front().start_ms) / 1000.0;
    if (duration <= cfg.max_duration_s) {
        out.push_back(std::move(utts));
        return;
    }
    const std::int64_t cap_ms = utts.front().start_ms +
        static_cast<std::int64_t>(cfg.max_duration_s * 1000.0);
    std::size_t best = 0;
    std::int64_t best_dist = -1;
    for (std::size_t k = 1; k < utts.size(); ++k) {
        std::int64_t gap = utts[k].start_ms - utts[k - 1].end_ms;
        if (gap <= static_cast<std::int64_t>(cfg.split_gap_s * 1000.0)) continue;
        std::int64_t dist = std::llabs(utts[k].start_ms - cap_ms);
        if (best_dist < 0 || dist < best_dist) {
            best_dist = dist;
            best = k;
        }
    }
    if (best_dist < 0) {
        unsplittable.push_back(std::move(utts));
        return;
    }
    std::vector<Utterance> head(utts.begin(), utts.begin() + best);
    std::vector<Utterance> tail(utts.begin() + best, utts.end());
    split_run(std::move(head), cfg, out, unsplittable);
    split_run(std::move(tail), cfg, out, unsplittable);
}

}  // namespace

SegmentationResult segment_corpus(const std::vector<Utterance>& utterances,
                                  const SegmentationConfig& cfg) {
    for (std::size_t i = 1; i < utterances.size(); ++i) {
        if (utterances[i].start_ms < utterances[i - 1].end_ms)
            throw AuditError("overlapping_timestamps",
                             "utterances " + std::to_string(i - 1) + " and " +
                                 std::to_string(i) + " overlap");
    }
    auto is_interviewer = [&](const Utterance& u) {
        if (u.speaker_id.empty()) return true;   // placeholder rows
        return std::find(cfg.interviewer_ids.begin(), cfg.interviewer_ids.end(),
                         u.speaker_id) != cfg.interviewer_ids.end();
    };

    SegmentationResult result;
    std::vector<Utterance> run;
    int counter = 0;

    auto flush = [&]() {
        if (run.empty()) return;
        std::vector<std::vector<Utterance>> pieces, unsplittable;
        split_run(std::move(run), cfg, pieces, unsplittable);
        run.clear();
        auto next_id = [&](const std::vector<Utterance>& u) {
            return u.front().speaker_id + "_" + std::to_string(counter++);
        };
        for (auto& u : unsplittable)
            result.dropped.push_back({next_id(u), "too_long_unsplittable"});
        for (auto& piece : pieces) {
            std::string id = next_id(piece);
            Segment seg = make_segment(id, std::move(piece));
            if (seg.duration_s < cfg.min_duration_s) {
                result.dropped.push_back({seg.id, "too_short"});
            } else if (has_unintelligible(seg.ground_truth)) {
                result.dropped.push_back({seg.id, "unintelligible"});
            } else if (seg.word_count < cfg.min_words) {
                result.dropped.push_back({seg.id, "too_few_words"});
            } else {
                result.segments.push_back(std::move(seg));
            }
        }
    };

    for (const auto& u : utterances) {
        if (is_interviewer(u)) {
            flush();
        } else {
            run.push_back(u);
        }
    }
    flush();
    return result;
}

ContaminationFlags flag_contamination(
    const Segment& seg,
    const std::vector<std::pair<std::string, int>>& provider_word_counts,
    const std::vector<std::string>& provider_texts,
    const ContaminationConfig& cfg,
    std::optional<bool> external_diarization) {
    if (provider_word_counts.empty() && provider_texts.empty())
        throw AuditError("no_transcripts", "at least one provider transcript required");

    ContaminationFlags flags;
    flags.diarization_multi_speaker = external_diarization;

    int excess = 0;
    const double limit = cfg.excess_ratio * seg.word_count;
    for (const auto& [provider, wc] : provider_word_counts)
        if (static_cast<double>(wc) >= limit) ++excess;
    flags.wordcount_excess = excess >= cfg.provider_threshold;

    for (const auto& text : provider_texts) {
        std::string lowered = lower(text);
        for (const auto& pattern : cfg.interviewer_patterns) {
            if (lowered.find(lower(pattern)) != std::string::npos) {
                flags.interviewer_string_hit = true;
                break;
            }
        }
        if (flags.interviewer_string_hit) break;
    }
    return flags;
}

}  // namespace audit::chat
