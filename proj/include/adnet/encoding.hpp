#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "adnet/chat.hpp"
#include "adnet/lexical.hpp"
#include "adnet/tensor.hpp"
#include "adnet/text.hpp"

namespace adnet {

/// One model input: the fixed-length embedding and POS matrices for the
/// participant's speech, the targeted feature vector, and the label.
struct EncodedInstance {
  std::string transcript_id;
  std::string participant_id;
  TokenSequence tokens;
  Tensor embeddings;  // [seq_len x embed_dim]
  Tensor pos;         // [seq_len x |tagset|]
  TargetedFeatureVector features;
  CoverageReport coverage;
  Label label = Label::CT;

  std::size_t length() const noexcept { return tokens.real_length(); }
  /// 1.0 at real token positions, 0.0 at padding.
  std::vector<double> mask() const;
};

struct EncoderResources {
  const EmbeddingTable* embeddings = nullptr;
  const LexiconSet* lexicons = nullptr;
  const PerceptronTagger* tagger = nullptr;
  std::size_t seq_len = kSequenceLength;
};

/// `pretagged`, when non-null, supplies one (token, tag) pair per participant
/// word and replaces the bundled tagger; LengthMismatch if the tokens differ.
EncodedInstance encode(const TranscriptRecord& record, const EncoderResources& resources,
                       const TaggedSentence* pretagged = nullptr);

std::vector<EncodedInstance> encode_corpus(const Corpus& corpus, const EncoderResources& resources,
                                           const std::vector<TaggedSentence>* pretagged = nullptr);

}  // namespace adnet
