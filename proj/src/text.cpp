#include "adnet/text.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "adnet/error.hpp"

namespace adnet {

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::istringstream in{std::string(text)};
  for (std::string tok; in >> tok;) {
    if (tok == "." || tok == "?" || tok == "!") continue;
    std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return std::tolower(c); });
    seq.tokens.push_back(std::move(tok));
  }
  if (seq.tokens.empty()) throw Error(ErrorCode::EmptyText, "no word tokens in text");
  seq.original_length = seq.tokens.size();
  return seq;
}

TokenSequence fix_length(TokenSequence seq, std::size_t budget) {
  if (budget == 0) throw Error(ErrorCode::ShapeMismatch, "sequence budget must be at least 1");
  seq.tokens.resize(std::min(seq.tokens.size(), budget));
  while (seq.tokens.size() < budget) seq.tokens.emplace_back(kPadToken);
  return seq;
}

TagSet::TagSet() {
  tags_ = {"PAD", "CC",  "CD",  "DT",  "EX",  "FW",   "IN",  "JJ",  "JJR", "JJS", "LS",  "MD", "NN",
           "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP",  "SYM", "TO",
           "UH",  "VB",  "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB"};
  for (std::size_t i = 0; i < tags_.size(); ++i) lookup_.emplace(tags_[i], i);
}

const TagSet& TagSet::penn() {
  static const TagSet instance;
  return instance;
}

std::size_t TagSet::index(std::string_view tag) const {
  auto it = lookup_.find(std::string(tag));
  if (it == lookup_.end()) throw Error(ErrorCode::UnknownTag, "tag '" + std::string(tag) + "' is not in the tagset");
  return it->second;
}

Tensor one_hot(const PosTagSequence& tags, const TagSet& tagset) {
  if (tags.tags.empty()) throw Error(ErrorCode::ShapeMismatch, "one_hot of an empty tag sequence");
  Tensor m({tags.tags.size(), tagset.size()});
  for (std::size_t t = 0; t < tags.tags.size(); ++t) {
    const std::size_t idx = tags.tags[t];
    if (idx >= tagset.size()) throw Error(ErrorCode::UnknownTag, "tag index " + std::to_string(idx) + " outside the tagset");
    m.at(t, idx) = 1.0;
  }
  return m;
}

}  // namespace adnet
