#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "adnet/error.hpp"
#include "adnet/text.hpp"

namespace adnet {

namespace {

constexpr std::string_view kHeader = "PTAG v1";

std::string normalize_word(const std::string& word) {
  if (word.find('-') != std::string::npos && word.front() != '-') return "!HYPHEN";
  const bool digits = std::all_of(word.begin(), word.end(), [](unsigned char c) { return std::isdigit(c); });
  if (digits && word.size() == 4) return "!YEAR";
  if (!word.empty() && std::isdigit(static_cast<unsigned char>(word.front()))) return "!DIGITS";
  std::string out = word;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string suffix3(const std::string& w) { return w.size() <= 3 ? w : w.substr(w.size() - 3); }

// `context` holds two start markers, the normalized words, and two end markers.
std::vector<std::string> features(std::size_t i, const std::string& word, const std::vector<std::string>& context,
                                  const std::string& prev, const std::string& prev2) {
  i += 2;
  return {
      "bias",
      "i suffix " + suffix3(word),
      "i pref1 " + word.substr(0, 1),
      "i-1 tag " + prev,
      "i-2 tag " + prev2,
      "i tag+i-2 tag " + prev + " " + prev2,
      "i word " + context[i],
      "i-1 tag+i word " + prev + " " + context[i],
      "i-1 word " + context[i - 1],
      "i-1 suffix " + suffix3(context[i - 1]),
      "i-2 word " + context[i - 2],
      "i+1 word " + context[i + 1],
      "i+1 suffix " + suffix3(context[i + 1]),
      "i+2 word " + context[i + 2],
  };
}

std::vector<std::string> make_context(const std::vector<std::string>& words) {
  std::vector<std::string> ctx = {"-START-", "-START2-"};
  for (const auto& w : words) ctx.push_back(normalize_word(w));
  ctx.emplace_back("-END-");
  ctx.emplace_back("-END2-");
  return ctx;
}

}  // namespace

std::size_t PerceptronTagger::predict(const std::vector<std::string>& feats) const {
  if (classes_.empty()) return TagSet::penn().index("NN");
  std::array<double, TagSet::kSize> scores{};
  for (const auto& f : feats) {
    auto it = weights_.find(f);
    if (it == weights_.end()) continue;
    for (const auto& [cls, w] : it->second) scores[cls] += w;
  }
  std::size_t best = classes_.front();
  for (std::size_t cls : classes_)
    if (scores[cls] > scores[best]) best = cls;
  return best;
}

PerceptronTagger PerceptronTagger::train(const std::vector<TaggedSentence>& corpus, const TrainOptions& options) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "tagger training corpus is empty");
  if (options.epochs == 0) throw Error(ErrorCode::BadConfig, "tagger epochs must be at least 1");
  const TagSet& tagset = TagSet::penn();

  PerceptronTagger model;
  std::map<std::string, std::map<std::size_t, std::size_t>> counts;
  std::vector<char> seen(tagset.size(), 0);
  for (const auto& sentence : corpus)
    for (const auto& [word, tag] : sentence) {
      const std::size_t idx = tagset.index(tag);
      if (idx == TagSet::kPad) throw Error(ErrorCode::UnknownTag, "PAD is reserved and cannot be a gold tag");
      ++counts[word][idx];
      seen[idx] = 1;
    }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) model.classes_.push_back(i);
  for (const auto& [word, tag_counts] : counts) {
    std::size_t total = 0, best = 0, best_tag = 0;
    for (const auto& [tag, n] : tag_counts) {
      total += n;
      if (n > best) best = n, best_tag = tag;
    }
    if (total >= options.dict_min_count && static_cast<double>(best) / total >= options.dict_min_ratio)
      model.tagdict_[word] = best_tag;
  }

  struct Accum {
    double weight = 0.0;
    double total = 0.0;
    std::size_t stamp = 0;
  };
  std::map<std::string, std::map<std::size_t, Accum>> acc;
  std::size_t instances = 0;
  auto bump = [&](const std::string& f, std::size_t cls, double delta) {
    Accum& a = acc[f][cls];
    a.total += static_cast<double>(instances - a.stamp) * a.weight;
    a.stamp = instances;
    a.weight += delta;
    model.weights_[f][cls] = a.weight;
  };

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937 rng(options.seed);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t s : order) {
      const auto& sentence = corpus[s];
      std::vector<std::string> words;
      for (const auto& wt : sentence) words.push_back(wt.first);
      const auto context = make_context(words);
      std::string prev = "-START-", prev2 = "-START2-";
      for (std::size_t i = 0; i < words.size(); ++i) {
        const std::size_t truth = tagset.index(sentence[i].second);
        std::size_t guess;
        if (auto it = model.tagdict_.find(words[i]); it != model.tagdict_.end()) {
          guess = it->second;
        } else {
          const auto feats = features(i, words[i], context, prev, prev2);
          guess = model.predict(feats);
          if (guess != truth)
            for (const auto& f : feats) {
              bump(f, truth, 1.0);
              bump(f, guess, -1.0);
            }
        }
        ++instances;
        prev2 = prev;
        prev = tagset.name(guess);
      }
    }
    std::shuffle(order.begin(), order.end(), rng);
  }

  model.weights_.clear();
  for (auto& [f, per_class] : acc)
    for (auto& [cls, a] : per_class) {
      const double total = a.total + static_cast<double>(instances - a.stamp) * a.weight;
      const double averaged = total / static_cast<double>(instances);
      if (averaged != 0.0) model.weights_[f][cls] = averaged;
    }
  return model;
}

std::vector<std::string> PerceptronTagger::tag_words(const std::vector<std::string>& words) const {
  const TagSet& tagset = TagSet::penn();
  if (std::find(words.begin(), words.end(), kPadToken) != words.end()) {
    std::vector<std::string> real;
    for (const auto& w : words)
      if (w != kPadToken) real.push_back(w);
    const auto names = tag_words(real);
    std::vector<std::string> out;
    std::size_t k = 0;
    for (const auto& w : words) out.push_back(w == kPadToken ? tagset.name(TagSet::kPad) : names[k++]);
    return out;
  }
  const auto context = make_context(words);
  std::vector<std::string> out;
  std::string prev = "-START-", prev2 = "-START2-";
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::size_t tag;
    if (auto it = tagdict_.find(words[i]); it != tagdict_.end())
      tag = it->second;
    else
      tag = predict(features(i, words[i], context, prev, prev2));
    out.push_back(tagset.name(tag));
    prev2 = prev;
    prev = out.back();
  }
  return out;
}

PosTagSequence PerceptronTagger::tag(const TokenSequence& seq) const {
  const TagSet& tagset = TagSet::penn();
  PosTagSequence out;
  for (const auto& name : tag_words(seq.tokens)) out.tags.push_back(tagset.index(name));
  return out;
}

void PerceptronTagger::save(std::ostream& out) const {
  const TagSet& tagset = TagSet::penn();
  out << kHeader << '\n' << std::setprecision(17);
  for (std::size_t cls : classes_) out << "@class\t" << tagset.name(cls) << "\t1\n";
  for (const auto& [word, cls] : tagdict_) out << "@dict " << word << '\t' << tagset.name(cls) << "\t1\n";
  for (const auto& [f, per_class] : weights_)
    for (const auto& [cls, w] : per_class) out << f << '\t' << tagset.name(cls) << '\t' << w << '\n';
}

PerceptronTagger PerceptronTagger::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::CorruptFile, "empty tagger model");
  if (line != kHeader) {
    if (line.starts_with("PTAG")) throw Error(ErrorCode::VersionMismatch, "unsupported tagger model header '" + line + "'");
    throw Error(ErrorCode::CorruptFile, "tagger model must start with '" + std::string(kHeader) + "'");
  }
  const TagSet& tagset = TagSet::penn();
  PerceptronTagger model;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw Error(ErrorCode::CorruptFile, "malformed tagger line '" + line + "'");
    const std::string feature = line.substr(0, t1);
    const std::size_t cls = tagset.index(line.substr(t1 + 1, t2 - t1 - 1));
    double w = 0.0;
    std::istringstream ws(line.substr(t2 + 1));
    if (!(ws >> w)) throw Error(ErrorCode::CorruptFile, "bad weight in '" + line + "'");
    if (feature == "@class")
      model.classes_.push_back(cls);
    else if (feature.starts_with("@dict "))
      model.tagdict_[feature.substr(6)] = cls;
    else
      model.weights_[feature][cls] = w;
  }
  std::sort(model.classes_.begin(), model.classes_.end());
  return model;
}

void PerceptronTagger::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  save(out);
}

PerceptronTagger PerceptronTagger::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return load(in);
}

std::vector<TaggedSentence> read_tagged(std::istream& in) {
  std::vector<TaggedSentence> out;
  TaggedSentence current;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw Error(ErrorCode::CorruptFile, "tagged line " + std::to_string(line_no) + " is not token<TAB>TAG");
    std::string tag = line.substr(tab + 1);
    TagSet::penn().index(tag);
    current.emplace_back(line.substr(0, tab), std::move(tag));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<TaggedSentence> read_tagged(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return read_tagged(in);
}

double tagging_accuracy(const PerceptronTagger& tagger, const std::vector<TaggedSentence>& gold) {
  std::size_t right = 0, total = 0;
  for (const auto& sentence : gold) {
    std::vector<std::string> words;
    for (const auto& wt : sentence) words.push_back(wt.first);
    const auto predicted = tagger.tag_words(words);
    for (std::size_t i = 0; i < sentence.size(); ++i, ++total) right += predicted[i] == sentence[i].second;
  }
  return total ? static_cast<double>(right) / static_cast<double>(total) : 0.0;
}

double majority_tag_accuracy(const std::vector<TaggedSentence>& gold) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& sentence : gold)
    for (const auto& wt : sentence) ++counts[wt.second], ++total;
  std::size_t best = 0;
  for (const auto& [tag, n] : counts) best = std::max(best, n);
  return total ? static_cast<double>(best) / static_cast<double>(total) : 0.0;
}

}  // namespace adnet
