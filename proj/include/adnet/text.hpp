#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adnet/tensor.hpp"

namespace adnet {

inline constexpr std::size_t kSequenceLength = 73;
inline constexpr std::string_view kPadToken = "<pad>";

struct TokenSequence {
  std::vector<std::string> tokens;
  /// Token count before truncation or padding.
  std::size_t original_length = 0;

  /// Number of leading non-pad tokens.
  std::size_t real_length() const noexcept { return std::min(original_length, tokens.size()); }
};

/// Whitespace split, lowercased, sentence-final `.`/`?`/`!` dropped.
/// Throws EmptyText when no word token remains.
TokenSequence tokenize(std::string_view text);

/// Truncates to the first `budget` tokens or right-pads with "<pad>".
TokenSequence fix_length(TokenSequence seq, std::size_t budget = kSequenceLength);

/// 36 Penn Treebank tags plus PAD at index 0.
class TagSet {
 public:
  static constexpr std::size_t kSize = 37;
  static constexpr std::size_t kPad = 0;

  static const TagSet& penn();

  std::size_t size() const noexcept { return tags_.size(); }
  const std::string& name(std::size_t index) const { return tags_.at(index); }
  /// Throws UnknownTag.
  std::size_t index(std::string_view tag) const;
  bool contains(std::string_view tag) const { return lookup_.count(std::string(tag)) != 0; }

 private:
  TagSet();
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Tag indices into TagSet::penn(), aligned with a TokenSequence.
struct PosTagSequence {
  std::vector<std::size_t> tags;
};

/// [tags x |tagset|] matrix with a single 1.0 per row.
Tensor one_hot(const PosTagSequence& tags, const TagSet& tagset = TagSet::penn());

using TaggedSentence = std::vector<std::pair<std::string, std::string>>;

/// Averaged perceptron over the usual word/suffix/context-tag features, with
/// a dictionary short-circuit for words whose training tag is unambiguous.
class PerceptronTagger {
 public:
  struct TrainOptions {
    std::size_t epochs = 5;
    unsigned seed = 1;
    std::size_t dict_min_count = 1;
    double dict_min_ratio = 0.97;
  };

  static PerceptronTagger train(const std::vector<TaggedSentence>& corpus, const TrainOptions& options);
  static PerceptronTagger train(const std::vector<TaggedSentence>& corpus) { return train(corpus, TrainOptions{}); }

  /// Tags a (possibly padded) sequence; "<pad>" always gets PAD. An untrained
  /// model predicts NN everywhere.
  PosTagSequence tag(const TokenSequence& seq) const;
  std::vector<std::string> tag_words(const std::vector<std::string>& words) const;

  bool trained() const noexcept { return !classes_.empty(); }

  void save(std::ostream& out) const;
  static PerceptronTagger load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static PerceptronTagger load(const std::filesystem::path& path);

  friend bool operator==(const PerceptronTagger&, const PerceptronTagger&) = default;

 private:
  std::size_t predict(const std::vector<std::string>& features) const;

  // feature -> (tag index -> weight); ordered maps keep serialization stable
  std::map<std::string, std::map<std::size_t, double>> weights_;
  std::map<std::string, std::size_t> tagdict_;
  std::vector<std::size_t> classes_;
};

/// Reads `token<TAB>TAG` lines; a blank line separates sentences/transcripts.
std::vector<TaggedSentence> read_tagged(std::istream& in);
std::vector<TaggedSentence> read_tagged(const std::filesystem::path& path);

double tagging_accuracy(const PerceptronTagger& tagger, const std::vector<TaggedSentence>& gold);
double majority_tag_accuracy(const std::vector<TaggedSentence>& gold);

}  // namespace adnet
