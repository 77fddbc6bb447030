#include "adnet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>

#include "adnet/error.hpp"

namespace adnet {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

const std::vector<std::pair<const char*, std::vector<const char*>>>& word_lists() {
  static const std::vector<std::pair<const char*, std::vector<const char*>>> lists = {
      {"NN",
       {"boy", "girl", "mother", "woman", "cookie", "jar", "stool", "sink", "water", "window", "kitchen", "plate",
        "dish", "curtain", "floor", "cupboard", "counter", "lid", "faucet", "apron", "towel", "picture", "garden",
        "shelf", "mess", "lady", "sister", "brother"}},
      {"NNS", {"cookies", "dishes", "cups", "curtains", "children", "kids", "plates", "shoes", "bushes"}},
      {"VBZ", {"is", "has", "looks", "seems", "wants"}},
      {"VBP", {"are", "have", "see", "think"}},
      {"VBG",
       {"taking", "reaching", "falling", "washing", "drying", "standing", "running", "stealing", "overflowing",
        "holding", "laughing", "getting", "tipping", "looking", "spilling", "climbing"}},
      {"VBD", {"fell", "spilled", "took", "saw", "was", "dropped"}},
      {"VB", {"take", "get", "fall", "see", "reach", "catch"}},
      {"JJ", {"big", "little", "wet", "open", "full", "dirty", "tall", "young", "careless", "busy"}},
      {"RB", {"almost", "really", "just", "now", "probably", "too"}},
      {"IN", {"on", "in", "from", "at", "of", "with", "near", "by", "into"}},
      {"DT", {"the", "a", "this", "that"}},
      {"PRP", {"she", "he", "it", "i", "they", "we"}},
      {"PRP$", {"her", "his", "their"}},
      {"CC", {"and", "but"}},
      {"EX", {"there"}},
      {"MD", {"might", "will", "can"}},
      {"TO", {"to"}},
      {"CD", {"two", "three"}},
  };
  return lists;
}

const std::vector<std::vector<const char*>>& templates() {
  static const std::vector<std::vector<const char*>> t = {
      {"DT", "NN", "VBZ", "VBG", "DT", "NN"},
      {"DT", "NN", "VBZ", "VBG", "IN", "DT", "NN"},
      {"PRP", "VBZ", "VBG", "DT", "NNS"},
      {"EX", "VBZ", "DT", "NN", "IN", "DT", "NN"},
      {"DT", "NN", "VBZ", "JJ"},
      {"DT", "JJ", "NN", "VBD", "IN", "DT", "NN"},
      {"PRP", "VBP", "DT", "NN", "CC", "DT", "NN"},
      {"DT", "NNS", "VBP", "VBG"},
      {"DT", "NN", "MD", "VB"},
      {"PRP$", "NN", "VBZ", "JJ"},
      {"DT", "NN", "VBZ", "RB", "VBG", "IN", "DT", "NN"},
      {"PRP", "VBZ", "TO", "VB", "DT", "NN"},
      {"EX", "VBP", "CD", "NNS", "IN", "DT", "NN"},
      {"PRP", "VBD", "DT", "NN"},
  };
  return t;
}

constexpr const char* kFillers[] = {"uh", "um", "oh"};

const char* const kInterviewerLines[] = {"mhm .", "okay .", "anything else ?", "what else do you see ?"};

class SentenceSource {
 public:
  explicit SentenceSource(const std::vector<VocabEntry>& vocab) {
    for (std::size_t i = 0; i < vocab.size(); ++i) by_tag_[vocab[i].tag].push_back(i);
    for (const auto& t : templates()) {
      if (std::all_of(t.begin(), t.end(), [&](const char* tag) { return by_tag_.count(tag) != 0; }))
        usable_.push_back(&t);
    }
    if (usable_.empty()) {
      // Vocabularies without template coverage fall back to a flat word stream.
      for (const auto& [tag, ids] : by_tag_) flat_.insert(flat_.end(), ids.begin(), ids.end());
      std::sort(flat_.begin(), flat_.end());
    }
  }

  TaggedSentence next(const std::vector<VocabEntry>& vocab, std::mt19937_64& rng) const {
    TaggedSentence out;
    if (usable_.empty()) {
      std::uniform_int_distribution<std::size_t> len(3, 7), pick(0, flat_.size() - 1);
      for (std::size_t n = len(rng); n > 0; --n) {
        const auto& v = vocab[flat_[pick(rng)]];
        out.emplace_back(v.word, v.tag);
      }
      return out;
    }
    std::uniform_int_distribution<std::size_t> which(0, usable_.size() - 1);
    for (const char* tag : *usable_[which(rng)]) {
      const auto& ids = by_tag_.at(tag);
      std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
      const auto& v = vocab[ids[pick(rng)]];
      out.emplace_back(v.word, v.tag);
    }
    return out;
  }

 private:
  std::map<std::string, std::vector<std::size_t>> by_tag_;
  std::vector<const std::vector<const char*>*> usable_;
  std::vector<std::size_t> flat_;
};

}  // namespace

const std::vector<VocabEntry>& default_vocab() {
  static const std::vector<VocabEntry> vocab = [] {
    std::vector<VocabEntry> out;
    for (const auto& [tag, words] : word_lists()) {
      for (const char* w : words) {
        VocabEntry e{w, tag, {}};
        std::mt19937_64 rng(fnv1a(w));
        std::uniform_real_distribution<double> unit(0.1, 0.9), valence(-0.5, 0.5);
        for (std::size_t k = 0; k < 4; ++k) e.scores[k] = round3(unit(rng));
        e.scores[4] = round3(valence(rng));
        out.push_back(std::move(e));
      }
    }
    return out;
  }();
  return vocab;
}

std::pair<double, double> synthetic_lexicon_range(LexiconKind kind) {
  return kind == LexiconKind::Sentiment ? std::pair{-1.0, 1.0} : std::pair{0.0, 1.0};
}

LexiconSet synthetic_lexicons(const std::vector<VocabEntry>& vocab) {
  LexiconSet set;
  for (std::size_t k = 0; k < kAllLexicons.size(); ++k) {
    Lexicon lex;
    lex.kind = kAllLexicons[k];
    std::tie(lex.lo, lex.hi) = synthetic_lexicon_range(lex.kind);
    for (const auto& v : vocab) lex.entries.emplace(v.word, v.scores[k]);
    set[k] = std::move(lex);
  }
  return set;
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::BadConfig, "synth: " + what); };
  if (n_participants == 0 || transcripts_per_participant == 0) fail("participant and transcript counts must be >= 1");
  if (!(ad_fraction > 0.0 && ad_fraction < 1.0)) fail("ad_fraction must lie in (0, 1)");
  for (double r : {filler_rate_ad, filler_rate_ct})
    if (!(r >= 0.0 && r <= 1.0)) fail("filler rates must lie in [0, 1]");
  if (!(mean_length_ad >= 5.0 && mean_length_ct >= 5.0)) fail("mean lengths must be >= 5");
  if (!(length_sd >= 0.0 && age_sd >= 0.0)) fail("standard deviations must be >= 0");
  if (!(mean_age_ad > 0.0 && mean_age_ad <= 130.0 && mean_age_ct > 0.0 && mean_age_ct <= 130.0))
    fail("mean ages must lie in (0, 130]");
  if (embed_dim == 0) fail("embed_dim must be >= 1");
  if (vocab.empty()) fail("vocab must not be empty");
  for (const auto& v : vocab) {
    if (v.word.empty() || v.word.find_first_of(" \t\n&[]<>()@") != std::string::npos)
      fail("vocab word '" + v.word + "' is not a plain token");
    if (!TagSet::penn().contains(v.tag) || v.tag == "PAD") fail("vocab tag '" + v.tag + "' is not a Penn tag");
  }
}

SynthCorpus generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const SentenceSource source(config.vocab);
  const std::size_t n = config.n_participants;

  std::size_t n_ad = static_cast<std::size_t>(std::llround(config.ad_fraction * static_cast<double>(n)));
  if (n >= 2) n_ad = std::clamp<std::size_t>(n_ad, 1, n - 1);
  std::vector<Label> labels(n, Label::CT);
  std::fill_n(labels.begin(), n_ad, Label::AD);
  std::shuffle(labels.begin(), labels.end(), rng);

  SynthCorpus out;
  std::bernoulli_distribution coin(0.5), pause(0.05), interject(0.2);
  std::uniform_int_distribution<std::size_t> filler_pick(0, std::size(kFillers) - 1);
  std::uniform_int_distribution<std::size_t> inv_pick(0, std::size(kInterviewerLines) - 1);
  const SpeakerCode par = SpeakerCode::from_tag("PAR"), inv = SpeakerCode::from_tag("INV");

  for (std::size_t p = 0; p < n; ++p) {
    const Label label = labels[p];
    const bool ad = label == Label::AD;
    char pid[32];
    std::snprintf(pid, sizeof pid, "p%04zu", p + 1);
    std::normal_distribution<double> age_dist(ad ? config.mean_age_ad : config.mean_age_ct, config.age_sd);
    const int base_age = static_cast<int>(std::clamp(std::lround(age_dist(rng)), 40L, 99L));
    const Gender gender = coin(rng) ? Gender::Female : Gender::Male;
    std::normal_distribution<double> length_dist(ad ? config.mean_length_ad : config.mean_length_ct, config.length_sd);
    std::bernoulli_distribution filler(ad ? config.filler_rate_ad : config.filler_rate_ct);

    for (std::size_t k = 0; k < config.transcripts_per_participant; ++k) {
      TranscriptRecord rec;
      rec.participant_id = pid;
      rec.transcript_id = std::string(pid) + "-" + std::to_string(k + 1);
      rec.label = label;
      rec.demographics.age = std::min(base_age + static_cast<int>(k), 130);
      rec.demographics.gender = gender;
      auto push = [&](const SpeakerCode& who, std::string raw) {
        Utterance u;
        u.speaker = who;
        u.clean_text = normalize_utterance(raw);
        u.raw_text = std::move(raw);
        u.index = rec.utterances.size();
        rec.utterances.push_back(std::move(u));
      };
      push(inv, "just tell me everything that you see happening in that picture .");

      const auto length = static_cast<std::size_t>(std::max(5L, std::lround(length_dist(rng))));
      TaggedSentence gold;
      TaggedSentence pending;
      std::size_t cursor = 0;
      std::string utterance;
      auto append = [&](const std::string& piece) {
        if (!utterance.empty()) utterance += ' ';
        utterance += piece;
      };
      auto close = [&] {
        if (utterance.empty()) return;
        push(par, utterance + " .");
        utterance.clear();
        if (interject(rng)) push(inv, kInterviewerLines[inv_pick(rng)]);
      };
      for (std::size_t slot = 0; slot < length; ++slot) {
        if (filler(rng)) {
          const std::string f = kFillers[filler_pick(rng)];
          append("&" + f);
          gold.emplace_back(f, "UH");
          continue;
        }
        if (cursor == pending.size()) {
          pending = source.next(config.vocab, rng);
          cursor = 0;
        }
        append(pending[cursor].first);
        gold.push_back(pending[cursor]);
        ++cursor;
        if (pause(rng)) append("(.)");
        if (cursor == pending.size()) close();
      }
      close();
      out.corpus.records.push_back(std::move(rec));
      out.gold_tags.push_back(std::move(gold));
    }
  }
  return out;
}

EmbeddingTable synthetic_embeddings(const std::vector<VocabEntry>& vocab, std::size_t dim, std::uint64_t seed) {
  EmbeddingTable table(dim);
  std::normal_distribution<double> gauss(0.0, 0.3);
  auto add = [&](const std::string& word) {
    if (table.contains(word)) return;
    std::mt19937_64 rng(fnv1a(word) ^ seed);
    std::vector<double> v(dim);
    // Rounded so the text file reproduces the in-memory table exactly.
    for (double& x : v) x = std::round(gauss(rng) * 1e6) / 1e6;
    table.insert(word, std::move(v));
  };
  for (const auto& v : vocab) add(v.word);
  for (const char* f : kFillers) add(f);
  return table;
}

std::vector<TaggedSentence> synthetic_tagged_sentences(const std::vector<VocabEntry>& vocab, std::size_t count,
                                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const SentenceSource source(vocab);
  std::bernoulli_distribution filler(0.1);
  std::uniform_int_distribution<std::size_t> filler_pick(0, std::size(kFillers) - 1);
  std::vector<TaggedSentence> out;
  for (std::size_t i = 0; i < count; ++i) {
    TaggedSentence s;
    for (auto& wt : source.next(vocab, rng)) {
      if (filler(rng)) s.emplace_back(kFillers[filler_pick(rng)], "UH");
      s.push_back(std::move(wt));
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

std::string tagged_text(const TaggedSentence& s) {
  std::string out;
  for (const auto& [w, t] : s) out += w + '\t' + t + '\n';
  return out;
}

}  // namespace

void write_synth(const SynthConfig& config, const SynthCorpus& synth, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "ad", ec);
  fs::create_directories(dir / "ct", ec);
  fs::create_directories(dir / "lexicons", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  // Records in the order load_corpus will return them (sorted by path), so
  // pretagged.tsv lines up block for block.
  std::vector<std::size_t> order(synth.corpus.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rel = [&](std::size_t i) {
    const auto& r = synth.corpus.records[i];
    return std::string(r.label == Label::AD ? "ad/" : "ct/") + r.transcript_id + ".cha";
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rel(a) < rel(b); });

  Corpus sorted;
  std::string pretagged;
  for (std::size_t i : order) {
    const auto& r = synth.corpus.records[i];
    write_text(dir / rel(i), serialize_chat(r));
    sorted.records.push_back(r);
    pretagged += "# " + r.transcript_id + "\n" + tagged_text(synth.gold_tags[i]) + "\n";
  }
  write_text(dir / "manifest.jsonl", manifest_jsonl(sorted));
  write_text(dir / "pretagged.tsv", pretagged);

  std::string tagged;
  for (const auto& s : synthetic_tagged_sentences(config.vocab, 400, config.seed)) tagged += tagged_text(s) + "\n";
  write_text(dir / "tagged.tsv", tagged);

  const EmbeddingTable table = synthetic_embeddings(config.vocab, config.embed_dim, config.seed);
  std::vector<std::string> words;
  for (const auto& v : config.vocab) words.push_back(v.word);
  for (const char* f : kFillers) words.push_back(f);
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  std::string emb;
  char buf[32];
  for (const auto& w : words) {
    emb += w;
    for (double x : table.lookup(w)) {
      std::snprintf(buf, sizeof buf, " %.6f", x);
      emb += buf;
    }
    emb += '\n';
  }
  write_text(dir / "embeddings.txt", emb);

  const LexiconSet lexicons = synthetic_lexicons(config.vocab);
  for (const auto& lex : lexicons) {
    std::ofstream out(dir / "lexicons" / (std::string(to_string(lex->kind)) + ".tsv"));
    lex->save(out);
    if (!out) throw Error(ErrorCode::Io, "cannot write lexicon under " + dir.string());
  }
}

}  // namespace adnet
