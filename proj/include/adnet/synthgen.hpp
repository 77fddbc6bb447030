#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adnet/chat.hpp"
#include "adnet/lexical.hpp"
#include "adnet/text.hpp"

namespace adnet {

/// A vocabulary word with its part of speech and one score per lexicon, in
/// kAllLexicons order.
struct VocabEntry {
  std::string word;
  std::string tag;
  std::array<double, 5> scores{};
};

/// Picture-description vocabulary used by the sentence templates. Scores are
/// stable across runs and platforms that share the standard library.
const std::vector<VocabEntry>& default_vocab();

/// Declared (lo, hi) range of each synthetic lexicon.
std::pair<double, double> synthetic_lexicon_range(LexiconKind kind);

/// Builds the five lexicons from `vocab` scores.
LexiconSet synthetic_lexicons(const std::vector<VocabEntry>& vocab);

struct SynthConfig {
  std::size_t n_participants = 300;
  std::size_t transcripts_per_participant = 2;
  double ad_fraction = 1049.0 / 1292.0;
  double filler_rate_ad = 0.15;
  double filler_rate_ct = 0.02;
  double mean_length_ad = 65.0;
  double mean_length_ct = 97.0;
  double length_sd = 15.0;
  double mean_age_ad = 72.0;
  double mean_age_ct = 64.0;
  double age_sd = 7.0;
  std::size_t embed_dim = 300;
  std::vector<VocabEntry> vocab = default_vocab();
  std::uint64_t seed = 42;

  void validate() const;
};

struct SynthCorpus {
  Corpus corpus;
  /// Gold (word, tag) pairs of each record's participant speech, aligned with
  /// corpus.records.
  std::vector<TaggedSentence> gold_tags;
};

/// Generates transcripts: lengths drawn around the class mean (minimum 5
/// words), words from template sentences over the vocabulary, each word slot
/// replaced by a filler (&uh, &um, &oh) with the class filler rate, ages drawn
/// around the class mean. Identical configs give identical corpora.
SynthCorpus generate(const SynthConfig& config);

/// Deterministic Gaussian vectors for every vocabulary word and filler.
EmbeddingTable synthetic_embeddings(const std::vector<VocabEntry>& vocab, std::size_t dim, std::uint64_t seed);

/// Template sentences with gold tags, usable as tagger training data.
std::vector<TaggedSentence> synthetic_tagged_sentences(const std::vector<VocabEntry>& vocab, std::size_t count,
                                                       std::uint64_t seed);

/// Writes ad/ and ct/ CHAT files, manifest.jsonl, embeddings.txt,
/// lexicons/<name>.tsv and tagged.tsv under `dir`.
void write_synth(const SynthConfig& config, const SynthCorpus& synth, const std::filesystem::path& dir);

}  // namespace adnet
