#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "audit/chat.hpp"
#include "audit/error.hpp"

using namespace audit;
using chat::Token;
using chat::TokenClass;

namespace {

chat::Utterance utt(const std::string& speaker, const std::string& words,
                    std::int64_t start_ms, std::int64_t end_ms) {
    chat::Utterance u = chat::parse_chat_utterance(words);
    u.speaker_id = speaker;
    u.start_ms = start_ms;
    u.end_ms = end_ms;
    return u;
}

}  // namespace

TEST_CASE("filler and word classification") {
    chat::Utterance u = chat::parse_chat_utterance("&-um he went");
    REQUIRE(u.tokens.size() == 3);
    CHECK(u.tokens[0] == Token{"um", TokenClass::filler, false});
    CHECK(u.tokens[1] == Token{"he", TokenClass::word, false});
    CHECK(u.tokens[2] == Token{"went", TokenClass::word, false});
}

TEST_CASE("xxx becomes the unintelligible sentinel") {
    chat::Utterance u = chat::parse_chat_utterance("xxx");
    REQUIRE(u.tokens.size() == 1);
    CHECK(u.tokens[0].cls == TokenClass::unintelligible);
    CHECK(u.tokens[0].surface == chat::kUnkSentinel);
}

TEST_CASE("repetition markers keep the repeated content") {
    chat::Utterance u =
        chat::parse_chat_utterance("<they were> [/] they were done &=laughs .");
    std::vector<std::string> surfaces;
    for (const auto& t : u.tokens) surfaces.push_back(t.surface);
    CHECK(surfaces == std::vector<std::string>{"they", "were", "they", "were", "done"});
    CHECK(u.tokens[0].repetition_marked);
    CHECK(u.tokens[1].repetition_marked);
    CHECK_FALSE(u.tokens[2].repetition_marked);
    for (const auto& t : u.tokens) CHECK(t.cls == TokenClass::word);
}

TEST_CASE("fragments, gestures, speaker tier, and timestamps") {
    chat::Utterance u =
        chat::parse_chat_utterance("*PAR:\t&+h he &=coughs went . 1000_2500");
    REQUIRE(u.tokens.size() == 3);
    CHECK(u.speaker_id == "PAR");
    CHECK(u.tokens[0] == Token{"h", TokenClass::fragment, false});
    CHECK(u.tokens[1].surface == "he");
    CHECK(u.tokens[2].surface == "went");
    CHECK(u.start_ms == 1000);
    CHECK(u.end_ms == 2500);
}

TEST_CASE("unknown bracket classes survive as marker tokens") {
    chat::Utterance u = chat::parse_chat_utterance("he [% odd] went");
    bool saw_marker = false;
    for (const auto& t : u.tokens)
        if (t.cls == TokenClass::marker) saw_marker = true;
    CHECK(saw_marker);
}

TEST_CASE("malformed nesting is a parse error with a byte offset") {
    CHECK_THROWS_AS(chat::parse_chat_utterance("<they were done"), AuditError);
    try {
        chat::parse_chat_utterance("he <went <deep> home");
    } catch (const AuditError& e) {
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("plain word round-trip") {
    std::string line = "the quick brown fox jumps";
    chat::Utterance u = chat::parse_chat_utterance(line);
    std::string joined;
    for (const auto& t : u.tokens) {
        if (!joined.empty()) joined += " ";
        joined += t.surface;
    }
    CHECK(joined == line);
}

TEST_CASE("word count excludes fillers but keeps fragments") {
    chat::Utterance u = chat::parse_chat_utterance("&-um &+h he went home xxx");
    // filler excluded; fragment, words count; unintelligible does not
    CHECK(chat::spoken_word_count(u.tokens) == 4);
}

TEST_CASE("participant turns between interviewer turns merge") {
    std::vector<chat::Utterance> utts = {
        utt("INV", "tell me a story", 0, 2000),
        utt("PAR", "once upon a", 3000, 6000),
        utt("PAR", "time there was", 6500, 9000),
        utt("PAR", "a small dog", 9200, 12000),
        utt("INV", "go on", 13000, 14000),
    };
    chat::SegmentationResult r = chat::segment_corpus(utts, {});
    REQUIRE(r.segments.size() == 1);
    CHECK(r.segments[0].utterances.size() == 3);
    CHECK(r.segments[0].word_count == 9);
    CHECK(r.segments[0].duration_s == doctest::Approx(9.0));
}

TEST_CASE("overlong turn splits at the widest-eligible gap") {
    // one 300 s turn with a 1.5 s gap at t=200 s
    std::vector<chat::Utterance> utts;
    utts.push_back(utt("PAR", "alpha beta gamma delta epsilon", 0, 200000));
    utts.push_back(utt("PAR", "zeta eta theta iota kappa", 201500, 300000));
    chat::SegmentationResult r = chat::segment_corpus(utts, {});
    REQUIRE(r.segments.size() == 2);
    CHECK(r.segments[0].duration_s == doctest::Approx(200.0));
    CHECK(r.segments[1].duration_s <= 240.0);
}

TEST_CASE("drop reasons") {
    chat::SegmentationResult short_seg =
        chat::segment_corpus({utt("PAR", "hello there my friend", 0, 1200)}, {});
    REQUIRE(short_seg.dropped.size() == 1);
    CHECK(short_seg.dropped[0].reason == "too_short");
    CHECK(short_seg.segments.empty());

    chat::SegmentationResult few =
        chat::segment_corpus({utt("PAR", "hello there", 0, 5000)}, {});
    REQUIRE(few.dropped.size() == 1);
    CHECK(few.dropped[0].reason == "too_few_words");

    chat::SegmentationResult unk = chat::segment_corpus(
        {utt("PAR", "he went xxx home today", 0, 5000)}, {});
    REQUIRE(unk.dropped.size() == 1);
    CHECK(unk.dropped[0].reason == "unintelligible");
}

TEST_CASE("overlapping timestamps are an error") {
    std::vector<chat::Utterance> utts = {
        utt("PAR", "one two three four", 0, 5000),
        utt("PAR", "five six seven eight", 4000, 9000),
    };
    CHECK_THROWS_AS(chat::segment_corpus(utts, {}), AuditError);
}

TEST_CASE("emitted segments always satisfy their invariants") {
    std::mt19937_64 rng(2024);
    const std::vector<std::string> vocab = {"he",  "went", "home", "xxx",
                                            "dog", "ran",  "fast", "today"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<chat::Utterance> utts;
        std::int64_t t = 0;
        int n_utts = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < n_utts; ++i) {
            std::string speaker = rng() % 4 == 0 ? "INV" : "PAR";
            std::string line;
            int n_words = 1 + static_cast<int>(rng() % 8);
            for (int w = 0; w < n_words; ++w) {
                if (!line.empty()) line += " ";
                line += vocab[rng() % vocab.size()];
            }
            std::int64_t dur = 500 + static_cast<std::int64_t>(rng() % 300000);
            utts.push_back(utt(speaker, line, t, t + dur));
            t += dur + static_cast<std::int64_t>(rng() % 5000);
        }
        chat::SegmentationResult r1 = chat::segment_corpus(utts, {});
        for (const auto& seg : r1.segments) {
            CHECK(seg.duration_s >= 2.0);
            CHECK(seg.duration_s <= 240.0);
            CHECK(seg.word_count >= 4);
            CHECK(seg.word_count == chat::spoken_word_count(seg.ground_truth));
            for (const auto& tok : seg.ground_truth)
                CHECK(tok.cls != TokenClass::unintelligible);
        }
        // determinism
        chat::SegmentationResult r2 = chat::segment_corpus(utts, {});
        REQUIRE(r1.segments.size() == r2.segments.size());
        for (std::size_t i = 0; i < r1.segments.size(); ++i) {
            CHECK(r1.segments[i].duration_s == r2.segments[i].duration_s);
            CHECK(r1.segments[i].word_count == r2.segments[i].word_count);
        }
    }
}

TEST_CASE("contamination flags") {
    chat::Segment seg;
    seg.ground_truth.clear();
    for (int i = 0; i < 10; ++i)
        seg.ground_truth.push_back({"word", TokenClass::word, false});

    SUBCASE("five providers exceeding 1.5x trips wordcount_excess") {
        std::vector<std::pair<std::string, int>> counts = {
            {"p1", 15}, {"p2", 16}, {"p3", 20}, {"p4", 15}, {"p5", 17}, {"p6", 9}};
        chat::ContaminationFlags f =
            chat::flag_contamination(seg, counts, {}, {});
        CHECK(f.wordcount_excess);
    }
    SUBCASE("interviewer pattern hit") {
        chat::ContaminationFlags f = chat::flag_contamination(
            seg, {{"p1", 10}}, {"well take a look at this"}, {});
        CHECK(f.interviewer_string_hit);
    }
    SUBCASE("identity transcripts raise nothing") {
        chat::ContaminationFlags f = chat::flag_contamination(
            seg, {{"p1", 10}, {"p2", 10}}, {"word word"}, {});
        CHECK_FALSE(f.contaminated());
    }
    SUBCASE("manual override wins") {
        chat::ContaminationFlags f = chat::flag_contamination(
            seg, {{"p1", 100}, {"p2", 100}, {"p3", 100}, {"p4", 100}, {"p5", 100}},
            {}, {}, std::nullopt);
        f.manual_override = false;
        CHECK_FALSE(f.contaminated());
    }
}
