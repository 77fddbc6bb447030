#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "adnet/error.hpp"
#include "adnet/synthgen.hpp"
#include "test_support.hpp"

using namespace adnet;
using adnet::testing::temp_dir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ClassCounts {
  std::size_t fillers = 0;
  std::size_t tokens = 0;
  double rate() const { return static_cast<double>(fillers) / static_cast<double>(tokens); }
};

}  // namespace

TEST(Synth, SameSeedSameCorpus) {
  SynthConfig sc;
  sc.n_participants = 40;
  sc.embed_dim = 8;
  const auto a = generate(sc);
  const auto b = generate(sc);
  EXPECT_EQ(a.corpus.records, b.corpus.records);
  EXPECT_EQ(a.gold_tags, b.gold_tags);

  const auto da = temp_dir("synth_a"), db = temp_dir("synth_b");
  write_synth(sc, a, da);
  write_synth(sc, b, db);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(da)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), da);
    EXPECT_EQ(slurp(entry.path()), slurp(db / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 80u);

  sc.seed = 43;
  EXPECT_NE(generate(sc).corpus.records, a.corpus.records);
}

TEST(Synth, LabelsIdsAndLengths) {
  SynthConfig sc;
  sc.n_participants = 100;
  sc.transcripts_per_participant = 3;
  sc.embed_dim = 8;
  const auto s = generate(sc);
  ASSERT_EQ(s.corpus.records.size(), 300u);
  ASSERT_EQ(s.gold_tags.size(), 300u);
  std::size_t ad = 0;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.corpus.records.size(); ++i) {
    const auto& r = s.corpus.records[i];
    ad += r.label == Label::AD;
    ids.insert(r.transcript_id);
    EXPECT_GE(participant_word_count(r), 5u);
    EXPECT_EQ(s.gold_tags[i].size(), participant_word_count(r)) << r.transcript_id;
    EXPECT_TRUE(r.demographics.age.has_value());
  }
  EXPECT_EQ(ids.size(), 300u);
  // Labels are assigned per participant.
  EXPECT_EQ(ad % 3, 0u);
  EXPECT_EQ(ad / 3, static_cast<std::size_t>(std::llround(sc.ad_fraction * 100)));
}

TEST(Synth, WrittenFilesReparseWithoutWarnings) {
  SynthConfig sc;
  sc.n_participants = 30;
  sc.embed_dim = 8;
  const auto s = generate(sc);
  const auto dir = temp_dir("synth_reparse");
  write_synth(sc, s, dir);
  const Corpus c = load_corpus(dir);
  ASSERT_EQ(c.records.size(), s.corpus.records.size());
  for (const auto& r : c.records) EXPECT_EQ(r.warnings, 0u) << r.transcript_id;

  const auto table = EmbeddingTable::load(dir / "embeddings.txt");
  EXPECT_EQ(table.dim(), 8u);
  EXPECT_TRUE(table.contains("uh"));
  // A word may appear under several tags but is scored once.
  std::set<std::string> words;
  for (const auto& e : sc.vocab) words.insert(e.word);
  for (LexiconKind k : kAllLexicons) {
    const auto lex = Lexicon::load(dir / "lexicons" / (std::string(to_string(k)) + ".tsv"), k);
    EXPECT_EQ(lex.entries.size(), words.size());
  }
  const auto tagged = read_tagged(dir / "tagged.tsv");
  EXPECT_FALSE(tagged.empty());
  const auto pretagged = read_tagged(dir / "pretagged.tsv");
  EXPECT_EQ(pretagged.size(), c.records.size());
}

TEST(Synth, FillerRatesMatchConfiguration) {
  SynthConfig sc;
  sc.n_participants = 300;
  sc.embed_dim = 8;
  sc.filler_rate_ad = 0.15;
  sc.filler_rate_ct = 0.02;
  const auto s = generate(sc);
  ClassCounts ad, ct;
  for (std::size_t i = 0; i < s.corpus.records.size(); ++i) {
    auto& counts = s.corpus.records[i].label == Label::AD ? ad : ct;
    for (const auto& [word, tag] : s.gold_tags[i]) {
      ++counts.tokens;
      counts.fillers += word == "uh" || word == "um" || word == "oh";
    }
  }
  ASSERT_GE(ad.tokens, 10000u);
  ASSERT_GE(ct.tokens, 2000u);
  EXPECT_NEAR(ad.rate(), 0.15, 0.02);
  EXPECT_NEAR(ct.rate(), 0.02, 0.02);
}

TEST(Synth, ClassMeansFollowConfiguration) {
  SynthConfig sc;
  sc.n_participants = 300;
  sc.embed_dim = 8;
  const auto s = generate(sc);
  double len[2] = {0, 0}, age[2] = {0, 0}, n[2] = {0, 0};
  for (const auto& r : s.corpus.records) {
    const int k = r.label == Label::AD ? 0 : 1;
    len[k] += static_cast<double>(participant_word_count(r));
    age[k] += *r.demographics.age;
    n[k] += 1;
  }
  EXPECT_NEAR(len[0] / n[0], 65.0, 4.0);
  EXPECT_NEAR(len[1] / n[1], 97.0, 6.0);
  EXPECT_NEAR(age[0] / n[0], 72.0, 2.0);
  EXPECT_NEAR(age[1] / n[1], 64.0, 3.0);
}

TEST(Synth, RejectsBadConfig) {
  SynthConfig sc;
  sc.filler_rate_ad = 1.5;
  EXPECT_THROW(sc.validate(), Error);
  sc = SynthConfig{};
  sc.ad_fraction = 1.0;
  EXPECT_THROW(sc.validate(), Error);
  sc = SynthConfig{};
  sc.vocab.clear();
  EXPECT_THROW(sc.validate(), Error);
}

TEST(Synth, EmbeddingsAreDeterministicPerWord) {
  const auto& vocab = default_vocab();
  const auto a = synthetic_embeddings(vocab, 12, 42);
  const auto b = synthetic_embeddings(vocab, 12, 42);
  const auto c = synthetic_embeddings(vocab, 12, 7);
  for (const auto& e : vocab) {
    const auto va = a.lookup(e.word), vb = b.lookup(e.word);
    EXPECT_TRUE(std::equal(va.begin(), va.end(), vb.begin()));
  }
  const auto va = a.lookup(vocab[0].word), vc = c.lookup(vocab[0].word);
  EXPECT_FALSE(std::equal(va.begin(), va.end(), vc.begin()));
}
