#ifndef AUDIT_NORMALIZE_HPP
#define AUDIT_NORMALIZE_HPP

#include <map>
#include <string>
#include <vector>

#include "audit/chat.hpp"

namespace audit::normalize {

// Cumulative standardization ladder. Each level applies everything the
// previous level does.
enum class Level { O, RF, RFF, RFFR, RFFRR };

const char* level_name(Level level);
Level level_from_name(const std::string& name);
std::vector<Level> all_levels();

struct NormalizationRules {
    std::vector<std::string> filler_lexicon = {
        "hmhm", "uhhuh", "emmm", "huh", "umm", "ugh",
        "hm",   "uhuh",  "eh",   "uhh", "mmhmm"};
    std::map<std::string, std::string> name_map;        // name -> firstname|lastname
    std::map<std::string, std::string> contraction_map; // colloquial -> formal
    std::vector<std::string> interviewer_patterns;
    int max_phrase_len = 5;
};

NormalizationRules rules_from_json_file(const std::string& path);

// Collapses immediately repeated words (phrase=false) or repeated phrases of
// length 2..max_phrase_len (phrase=true). Phrase collapse also removes an
// abandoned restart: a phrase that recurs after fewer than phrase-length
// intervening words drops its first occurrence plus the abandoned tail
// ("they were ball they were having a ball" -> "they were having a ball").
std::vector<std::string> collapse_repeats(std::vector<std::string> words, bool phrase,
                                          int max_phrase_len = 5);

std::vector<std::string> standardize_ground_truth(
    const std::vector<chat::Token>& tokens, Level level,
    const NormalizationRules& rules = {});

std::vector<std::string> standardize_asr_text(const std::string& raw,
                                              const NormalizationRules& rules = {});

std::string join_words(const std::vector<std::string>& words);

}  // namespace audit::normalize

#endif
