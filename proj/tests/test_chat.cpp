#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "adnet/chat.hpp"
#include "adnet/error.hpp"
#include "test_support.hpp"

using namespace adnet;
using adnet::testing::fixture;
using adnet::testing::temp_dir;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Normalize, RetracingKeepsWords) {
  EXPECT_EQ(normalize_utterance("&uh the boy [//] the boy fell ."), "uh the boy the boy fell .");
}

TEST(Normalize, EventsUnintelligibleAndIncompleteWords) {
  EXPECT_EQ(normalize_utterance("(be)cause xxx he laughed &=laughs ."), "because he laughed .");
}

TEST(Normalize, PlainTextUnchanged) { EXPECT_EQ(normalize_utterance("the window is open ."), "the window is open ."); }

TEST(Normalize, MarkupVariants) {
  EXPECT_EQ(normalize_utterance("&-um the <boy is> [/] boy is (.) here ."), "um the boy is boy is here .");
  EXPECT_EQ(normalize_utterance("the mother [: woman] dries [x 3] dishes ."), "the woman dries dishes .");
  EXPECT_EQ(normalize_utterance("yyy it fell (..) down (...) [+ exc] ."), "it fell down .");
  EXPECT_EQ(normalize_utterance("oh   my\tgoodness ?"), "oh my goodness ?");
}

TEST(Normalize, UnknownCodesAreCounted) {
  NormalizationStats stats;
  EXPECT_EQ(normalize_utterance("the boy [~ odd code] fell .", &stats), "the boy fell .");
  EXPECT_EQ(stats.unknown_codes, 1u);
}

TEST(Normalize, IdempotentOnRandomMarkup) {
  const std::vector<std::string> pieces = {"the", "boy", "&uh", "&-um", "[//]", "[/]", "<", ">", "xxx", "(.)",
                                           "(be)cause", "&=laughs", "[: cookie]", "[x 2]", "[+ gram]", ".", "?",
                                           "yyy", "&oh", "that's", "+...", "[*]", "0is", "dog@o", "(..)"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(1, 12);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string raw;
    for (std::size_t n = len(rng); n > 0; --n) raw += pieces[pick(rng)] + " ";
    const std::string once = normalize_utterance(raw);
    EXPECT_EQ(normalize_utterance(once), once) << raw;
  }
}

TEST(Normalize, FillerAlwaysSurvives) {
  std::mt19937_64 rng(9);
  // A replacement code rewrites the word before it, so it only appears ahead of the filler.
  const std::vector<std::string> noise = {"[//]", "(.)", "xxx", "the", "&=coughs", "<", ">", "[: x]"};
  std::uniform_int_distribution<std::size_t> before(0, noise.size() - 1), after(0, noise.size() - 2);
  for (int trial = 0; trial < 500; ++trial) {
    std::string raw = noise[before(rng)] + " &uh " + noise[after(rng)] + " .";
    const std::string out = " " + normalize_utterance(raw) + " ";
    EXPECT_NE(out.find(" uh "), std::string::npos) << raw;
  }
}

TEST(Parse, MinimalFile) {
  const auto rec = parse_chat_file("@Begin\n*PAR:\tthe boy fell .\n*INV:\tokay .\n@End\n", Label::AD, "x-1");
  ASSERT_EQ(rec.utterances.size(), 2u);
  EXPECT_EQ(rec.utterances[0].speaker.kind(), SpeakerCode::Kind::Participant);
  EXPECT_EQ(rec.utterances[1].speaker.kind(), SpeakerCode::Kind::Interviewer);
  EXPECT_EQ(rec.utterances[0].index, 0u);
  EXPECT_EQ(rec.utterances[1].index, 1u);
  EXPECT_EQ(rec.participant_id, "x");
}

TEST(Parse, IdLineDemographics) {
  const auto rec = parse_chat_file(
      "@ID:\teng|Pitt|PAR|74;|female|ProbableAD||Participant|||\n*PAR:\tthe boy fell .\n", Label::AD);
  ASSERT_TRUE(rec.demographics.age.has_value());
  EXPECT_EQ(*rec.demographics.age, 74);
  EXPECT_EQ(rec.demographics.gender, Gender::Female);
}

TEST(Parse, OtherSpeakersAndContinuations) {
  const auto rec = parse_chat_file("*PAR:\tthe boy\n\tfell down .\n*DOC:\thm .\n", Label::CT);
  ASSERT_EQ(rec.utterances.size(), 2u);
  EXPECT_EQ(rec.utterances[0].clean_text, "the boy fell down .");
  EXPECT_EQ(rec.utterances[1].speaker.kind(), SpeakerCode::Kind::Other);
  EXPECT_EQ(rec.utterances[1].speaker.tag(), "DOC");
}

TEST(Parse, Errors) {
  EXPECT_EQ(code_of([] { parse_chat_file("*INV:\tokay .\n", Label::AD); }), ErrorCode::MissingParticipantTier);
  EXPECT_EQ(code_of([] { parse_chat_file("*PAR the boy fell .\n", Label::AD); }), ErrorCode::MalformedTier);
  EXPECT_EQ(code_of([] { parse_chat_file("@ID:\teng|Pitt|PAR|old;|male|||\n*PAR:\thi .\n", Label::AD); }),
            ErrorCode::BadDemographics);
  EXPECT_EQ(code_of([] { parse_label("maybe"); }), ErrorCode::MissingLabel);
}

TEST(Parse, FixtureRoundTrip) {
  for (const char* rel : {"chat/ad/s001-0.cha", "chat/ad/s002-1.cha", "chat/ct/s101-0.cha", "chat/ct/s102-0.cha"}) {
    const std::string id = std::filesystem::path(rel).stem().string();
    const auto first = parse_chat_file(read(fixture(rel)), Label::AD, id);
    const auto second = parse_chat_file(serialize_chat(first), Label::AD, id);
    EXPECT_EQ(first, second) << rel;
  }
}

TEST(Extract, ParticipantOnly) {
  const auto rec = parse_chat_file("*PAR:\tthe boy fell .\n*INV:\tokay .\n*PAR:\tthat's it .\n", Label::AD);
  EXPECT_EQ(extract_participant_text(rec), "the boy fell . that's it .");
  const auto other = parse_chat_file("*PAR:\tthe boy fell .\n*DOC:\tgood .\n", Label::AD);
  EXPECT_EQ(extract_participant_text(other), "the boy fell .");
  EXPECT_EQ(participant_word_count(rec), 5u);
}

TEST(Extract, NoInterviewerTokensLeak) {
  const auto rec = parse_chat_file(read(fixture("chat/ad/s001-0.cha")), Label::AD, "s001-0");
  const std::string text = " " + extract_participant_text(rec) + " ";
  for (const char* w : {" tell ", " picture ", " okay "}) EXPECT_EQ(text.find(w), std::string::npos) << w;
}

TEST(Corpus, LoadsFixtureDirectories) {
  const Corpus c = load_corpus(fixture("chat"));
  ASSERT_EQ(c.records.size(), 4u);
  EXPECT_EQ(c.records[0].label, Label::AD);
  EXPECT_EQ(c.records[3].label, Label::CT);
  EXPECT_EQ(c.records[1].transcript_id, "s002-1");
  EXPECT_EQ(c.records[1].participant_id, "s002");
  EXPECT_EQ(c.source_manifest.size(), 4u);
  for (const auto& r : c.records) EXPECT_EQ(r.warnings, 0u) << r.transcript_id;
}

TEST(Corpus, LabelsFileAndErrors) {
  const auto dir = temp_dir("labels");
  std::filesystem::create_directories(dir / "files");
  std::ofstream(dir / "files" / "a-1.cha") << "*PAR:\tthe boy fell .\n";
  std::ofstream(dir / "files" / "b-1.cha") << "*PAR:\tthe girl laughed .\n";
  std::ofstream(dir / "labels.tsv") << "files/a-1.cha\tAD\tsubjectA\nfiles/b-1.cha\tCT\n";
  const Corpus c = load_corpus(dir);
  ASSERT_EQ(c.records.size(), 2u);
  EXPECT_EQ(c.records[0].participant_id, "subjectA");
  EXPECT_EQ(c.records[1].label, Label::CT);

  std::ofstream(dir / "labels.tsv") << "files/a-1.cha\tunknown\n";
  EXPECT_EQ(code_of([&] { load_corpus(dir); }), ErrorCode::MissingLabel);
  EXPECT_EQ(code_of([&] { load_corpus(temp_dir("empty")); }), ErrorCode::EmptyCorpus);
}

TEST(Stats, LowerMedian) {
  EXPECT_EQ(lower_median({65, 73, 97}), 73u);
  EXPECT_EQ(lower_median({20, 10}), 10u);
  const StatsReport s = corpus_stats(load_corpus(fixture("chat")));
  EXPECT_EQ(s.total.transcripts, 4u);
  EXPECT_EQ(s.ad.participants, 2u);
  EXPECT_EQ(s.ct.transcripts, 2u);
  EXPECT_EQ(code_of([] { corpus_stats(Corpus{}); }), ErrorCode::EmptyCorpus);
}

TEST(Manifest, OneObjectPerRecord) {
  const std::string m = manifest_jsonl(load_corpus(fixture("chat")));
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), 4);
  EXPECT_NE(m.find("\"transcript_id\":\"s001-0\",\"participant_id\":\"s001\",\"label\":\"AD\",\"age\":74"),
            std::string::npos);
}
