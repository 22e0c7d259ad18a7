#include "audit/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "audit/error.hpp"

namespace audit::normalize {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const std::map<std::string, std::string>& number_words() {
    static const std::map<std::string, std::string> m = {
        {"zero", "0"},     {"one", "1"},       {"two", "2"},      {"three", "3"},
        {"four", "4"},     {"five", "5"},      {"six", "6"},      {"seven", "7"},
        {"eight", "8"},    {"nine", "9"},      {"ten", "10"},     {"eleven", "11"},
        {"twelve", "12"},  {"thirteen", "13"}, {"fourteen", "14"},{"fifteen", "15"},
        {"sixteen", "16"}, {"seventeen", "17"},{"eighteen", "18"},{"nineteen", "19"},
        {"twenty", "20"},  {"thirty", "30"},   {"forty", "40"},   {"fifty", "50"},
        {"sixty", "60"},   {"seventy", "70"},  {"eighty", "80"},  {"ninety", "90"}};
    return m;
}

// Keeps letters, digits, and word-internal apostrophes. Punctuation between
// digits ("5.30") becomes a separator rather than vanishing.
void clean_word_into(const std::string& w, std::vector<std::string>& out) {
    std::string cur;
    auto flush = [&]() {
        if (!cur.empty()) {
            while (!cur.empty() && cur.back() == '\'') cur.pop_back();
            while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < w.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(w[i]);
        if (std::isalnum(c) || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            bool between_digits = !cur.empty() &&
                std::isdigit(static_cast<unsigned char>(cur.back())) &&
                i + 1 < w.size() && std::isdigit(static_cast<unsigned char>(w[i + 1]));
            if (between_digits) flush();
            // other punctuation is simply dropped
        }
    }
    flush();
}

bool all_digits(const std::string& w) {
    return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) {
        return std::isdigit(c);
    });
}

}  // namespace

const char* level_name(Level level) {
    switch (level) {
        case Level::O: return "O";
        case Level::RF: return "RF";
        case Level::RFF: return "RFF";
        case Level::RFFR: return "RFFR";
        case Level::RFFRR: return "RFFRR";
    }
    return "?";
}

Level level_from_name(const std::string& name) {
    for (Level l : all_levels())
        if (name == level_name(l)) return l;
    throw AuditError("unknown_level", "no standardization level named '" + name + "'");
}

std::vector<Level> all_levels() {
    return {Level::O, Level::RF, Level::RFF, Level::RFFR, Level::RFFRR};
}

NormalizationRules rules_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AuditError("io_error", "cannot open rules file " + path);
    nlohmann::json j;
    in >> j;
    NormalizationRules rules;
    if (j.contains("fillers"))
        for (const auto& f : j["fillers"]) rules.filler_lexicon.push_back(lower(f));
    if (j.contains("names"))
        for (auto& [k, v] : j["names"].items()) rules.name_map[lower(k)] = lower(v.get<std::string>());
    if (j.contains("contractions"))
        for (auto& [k, v] : j["contractions"].items())
            rules.contraction_map[lower(k)] = lower(v.get<std::string>());
    if (j.contains("interviewer_patterns"))
        for (const auto& p : j["interviewer_patterns"])
            rules.interviewer_patterns.push_back(p.get<std::string>());
    if (j.contains("max_phrase_len")) rules.max_phrase_len = j["max_phrase_len"].get<int>();
    if (rules.max_phrase_len < 2)
        throw AuditError("bad_rules", "max_phrase_len must be >= 2");
    return rules;
}

std::vector<std::string> collapse_repeats(std::vector<std::string> words, bool phrase,
                                          int max_phrase_len) {
    if (!phrase) {
        std::vector<std::string> out;
        for (auto& w : words) {
            if (out.empty() || out.back() != w) out.push_back(std::move(w));
        }
        return out;
    }
    // Phrase collapse runs to a fixed point so the result is idempotent.
    bool changed = true;
    while (changed) {
        changed = false;
        std::size_t i = 0;
        while (i < words.size()) {
            bool erased = false;
            const int longest =
                std::min<int>(max_phrase_len, static_cast<int>((words.size() - i) / 2));
            for (int n = longest; n >= 2 && !erased; --n) {
                // allow an abandoned run of fewer than n words between copies
                const std::size_t j_lo = i + n;
                const std::size_t j_hi = i + n + (n - 1);
                for (std::size_t j = j_lo; j <= j_hi; ++j) {
                    if (j + n > words.size()) break;
                    if (std::equal(words.begin() + static_cast<std::ptrdiff_t>(i),
                                   words.begin() + static_cast<std::ptrdiff_t>(i + n),
                                   words.begin() + static_cast<std::ptrdiff_t>(j))) {
                        words.erase(words.begin() + static_cast<std::ptrdiff_t>(i),
                                    words.begin() + static_cast<std::ptrdiff_t>(j));
                        changed = true;
                        erased = true;
                        break;
                    }
                }
            }
            if (!erased) ++i;
        }
    }
    return words;
}

std::vector<std::string> standardize_ground_truth(const std::vector<chat::Token>& tokens,
                                                  Level level,
                                                  const NormalizationRules& rules) {
    std::vector<std::string> words;
    for (const auto& t : tokens) {
        switch (t.cls) {
            case chat::TokenClass::gesture:
            case chat::TokenClass::marker:
                continue;
            case chat::TokenClass::filler:
                if (level >= Level::RF) continue;
                break;
            case chat::TokenClass::fragment:
                if (level >= Level::RFF) continue;
                break;
            default:
                break;
        }
        clean_word_into(t.surface, words);
    }
    if (level >= Level::RFFR) words = collapse_repeats(std::move(words), false);
    if (level >= Level::RFFRR)
        words = collapse_repeats(std::move(words), true, rules.max_phrase_len);
    if (words.empty())
        throw AuditError("empty_reference", "no words remain after standardization");
    return words;
}

std::vector<std::string> standardize_asr_text(const std::string& raw,
                                              const NormalizationRules& rules) {
    static const std::regex diarization(
        R"(\bSpeaker\s+\d+\s+\d{1,2}:\d{2}(:\d{2})?)", std::regex::icase);
    static const std::regex bracketed(R"(\[[^\]]*\])");
    static const std::regex oclock(R"((\d{1,2}):00\b)");

    std::string text = std::regex_replace(raw, diarization, " ");
    text = std::regex_replace(text, bracketed, " ");
    text = std::regex_replace(text, oclock, "$1 o'clock");

    std::vector<std::string> words;
    std::istringstream stream(text);
    std::string piece;
    while (stream >> piece) clean_word_into(piece, words);

    std::vector<std::string> mapped;
    for (auto& w : words) {
        if (auto it = rules.name_map.find(w); it != rules.name_map.end()) {
            mapped.push_back(it->second);
            continue;
        }
        if (auto it = rules.contraction_map.find(w); it != rules.contraction_map.end()) {
            std::istringstream expansion(it->second);
            std::string part;
            while (expansion >> part) mapped.push_back(part);
            continue;
        }
        if (auto it = number_words().find(w); it != number_words().end()) {
            mapped.push_back(it->second);
            continue;
        }
        mapped.push_back(std::move(w));
    }

    std::vector<std::string> out;
    for (auto& w : mapped) {
        if (all_digits(w)) {
            for (char d : w) out.emplace_back(1, d);
            continue;
        }
        if (std::find(rules.filler_lexicon.begin(), rules.filler_lexicon.end(), w) !=
            rules.filler_lexicon.end())
            continue;
        out.push_back(std::move(w));
    }
    return out;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

}  // namespace audit::normalize
