#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "audit/chat.hpp"
#include "audit/error.hpp"
#include "audit/providers.hpp"

using namespace audit;
namespace fs = std::filesystem;

namespace {

chat::Segment make_segment(const std::string& id, const std::string& words) {
    chat::Segment seg;
    seg.id = id;
    seg.ground_truth = chat::parse_chat_utterance(words).tokens;
    return seg;
}

fs::path tmp_dir() {
    fs::path p = fs::temp_directory_path() / "audit_providers_test";
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("json_map ingest with missing and duplicate ids") {
    fs::path dir = tmp_dir();
    fs::path file = dir / "map.json";
    {
        std::ofstream out(file);
        out << R"({"s1": "hello world", "s2": ""})";
    }
    providers::IngestReport r = providers::ingest_transcripts(
        file.string(), "prov", providers::TranscriptFormat::json_map,
        {"s1", "s2", "s3"});
    REQUIRE(r.records.size() == 3);
    CHECK(r.records[0].status == providers::TranscriptStatus::ok);
    CHECK(r.records[0].raw_text == "hello world");
    CHECK(r.records[1].status == providers::TranscriptStatus::empty);
    CHECK(r.records[2].status == providers::TranscriptStatus::failed);
    CHECK(r.records[2].raw_text.empty());
}

TEST_CASE("jsonl ingest resolves duplicates last-wins") {
    fs::path dir = tmp_dir();
    fs::path file = dir / "lines.jsonl";
    {
        std::ofstream out(file);
        out << R"({"segment_id": "s1", "text": "first"})" << "\n";
        out << R"({"segment_id": "s1", "text": "second"})" << "\n";
    }
    providers::IngestReport r = providers::ingest_transcripts(
        file.string(), "prov", providers::TranscriptFormat::jsonl, {"s1"});
    CHECK(r.duplicate_warnings == 1);
    CHECK(r.records[0].raw_text == "second");
}

TEST_CASE("per-file text ingest") {
    fs::path dir = tmp_dir() / "texts";
    fs::create_directories(dir);
    {
        std::ofstream(dir / "s1.txt") << "alpha beta\n";
        std::ofstream(dir / "s2.txt") << "gamma";
        std::ofstream(dir / "notes.md") << "ignored";
    }
    providers::IngestReport r = providers::ingest_transcripts(
        dir.string(), "prov", providers::TranscriptFormat::per_file_text,
        {"s1", "s2"});
    CHECK(r.records[0].raw_text == "alpha beta");
    CHECK(r.records[1].raw_text == "gamma");
    fs::remove_all(dir);
}

TEST_CASE("ids outside the manifest are an error") {
    fs::path dir = tmp_dir();
    fs::path file = dir / "bad.json";
    std::ofstream(file) << R"({"mystery": "text"})";
    CHECK_THROWS_AS(
        providers::ingest_transcripts(file.string(), "prov",
                                      providers::TranscriptFormat::json_map, {"s1"}),
        AuditError);
}

TEST_CASE("mock asr is deterministic and order independent") {
    std::vector<chat::Segment> segs = {
        make_segment("a", "the quick brown fox jumps over the lazy dog"),
        make_segment("b", "pack my box with five dozen jugs"),
    };
    providers::ErrorModel model{0.2, 0.1, 0.1, 42};
    auto r1 = providers::mock_asr(segs, "mock", model);
    auto r2 = providers::mock_asr(segs, "mock", model);
    REQUIRE(r1.size() == 2);
    CHECK(r1[0].raw_text == r2[0].raw_text);
    CHECK(r1[1].raw_text == r2[1].raw_text);

    std::vector<chat::Segment> reversed = {segs[1], segs[0]};
    auto r3 = providers::mock_asr(reversed, "mock", model);
    CHECK(r3[1].raw_text == r1[0].raw_text);
    CHECK(r3[0].raw_text == r1[1].raw_text);

    providers::ErrorModel other{0.2, 0.1, 0.1, 43};
    auto r4 = providers::mock_asr(segs, "mock", other);
    CHECK(r4[0].raw_text != r1[0].raw_text);
}

TEST_CASE("zero rates reproduce the standardized ground truth") {
    std::vector<chat::Segment> segs = {
        make_segment("a", "he he wanted to go home today")};
    providers::ErrorModel clean{0.0, 0.0, 0.0, 1};
    auto r = providers::mock_asr(segs, "mock", clean);
    CHECK(r[0].raw_text == "he wanted to go home today");
    CHECK(r[0].status == providers::TranscriptStatus::ok);
}

TEST_CASE("planted substitution rate shows up at scale") {
    std::vector<chat::Segment> segs;
    std::string words;
    for (int i = 0; i < 30; ++i) words += "w" + std::to_string(i) + " ";
    for (int i = 0; i < 200; ++i)
        segs.push_back(make_segment("s" + std::to_string(i), words));
    providers::ErrorModel model{0.15, 0.0, 0.0, 7};
    auto recs = providers::mock_asr(segs, "mock", model);
    int junk = 0, total = 0;
    for (const auto& rec : recs) {
        std::istringstream in(rec.raw_text);
        std::string w;
        while (in >> w) {
            ++total;
            if (w.rfind("xq", 0) == 0) ++junk;
        }
    }
    double rate = static_cast<double>(junk) / total;
    CHECK(rate == doctest::Approx(0.15).epsilon(0.1));
    CHECK_THROWS_AS(providers::mock_asr(segs, "mock", {1.5, 0, 0, 1}), AuditError);
}

TEST_CASE("jsonl store round trip") {
    std::vector<providers::TranscriptRecord> records(2);
    records[0] = {"s1", "prov", "hello \"quoted\" text",
                  providers::TranscriptStatus::ok, "2024-01-01T00:00:00Z"};
    records[1] = {"s2", "prov", "", providers::TranscriptStatus::failed, ""};
    fs::path file = tmp_dir() / "store.jsonl";
    providers::write_jsonl(records, file.string());
    auto back = providers::read_jsonl(file.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].segment_id == records[0].segment_id);
    CHECK(back[0].raw_text == records[0].raw_text);
    CHECK(back[0].status == records[0].status);
    CHECK(back[0].retrieved_at == records[0].retrieved_at);
    CHECK(back[1].status == providers::TranscriptStatus::failed);
}
