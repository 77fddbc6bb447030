#include "adnet/encoding.hpp"

#include "adnet/error.hpp"

namespace adnet {

std::vector<double> EncodedInstance::mask() const {
  std::vector<double> m(tokens.tokens.size(), 0.0);
  for (std::size_t t = 0; t < length(); ++t) m[t] = 1.0;
  return m;
}

EncodedInstance encode(const TranscriptRecord& record, const EncoderResources& resources,
                       const TaggedSentence* pretagged) {
  if (!resources.embeddings || !resources.lexicons || (!resources.tagger && !pretagged))
    throw Error(ErrorCode::BadConfig, "encoder resources are incomplete");
  EncodedInstance inst;
  inst.transcript_id = record.transcript_id;
  inst.participant_id = record.participant_id;
  inst.label = record.label;
  const TokenSequence full = tokenize(extract_participant_text(record));
  inst.tokens = fix_length(full, resources.seq_len);

  PosTagSequence tags;
  if (pretagged) {
    if (pretagged->size() != full.tokens.size())
      throw Error(ErrorCode::LengthMismatch, record.transcript_id + ": " + std::to_string(pretagged->size()) +
                                                 " pre-tagged tokens for " + std::to_string(full.tokens.size()) + " words");
    for (std::size_t t = 0; t < full.tokens.size(); ++t)
      if (tokenize((*pretagged)[t].first).tokens.front() != full.tokens[t])
        throw Error(ErrorCode::LengthMismatch, record.transcript_id + ": pre-tagged token '" + (*pretagged)[t].first +
                                                   "' does not match '" + full.tokens[t] + "'");
    const TagSet& tagset = TagSet::penn();
    for (std::size_t t = 0; t < inst.tokens.tokens.size(); ++t)
      tags.tags.push_back(t < inst.length() ? tagset.index((*pretagged)[t].second) : TagSet::kPad);
  } else {
    tags = resources.tagger->tag(inst.tokens);
  }
  inst.embeddings = embed(inst.tokens, *resources.embeddings);
  inst.pos = one_hot(tags);
  inst.features = build_feature_vector(inst.tokens, *resources.lexicons, record.demographics, &inst.coverage);
  return inst;
}

std::vector<EncodedInstance> encode_corpus(const Corpus& corpus, const EncoderResources& resources,
                                           const std::vector<TaggedSentence>* pretagged) {
  if (pretagged && pretagged->size() != corpus.records.size())
    throw Error(ErrorCode::LengthMismatch, "pre-tagged file has " + std::to_string(pretagged->size()) +
                                               " blocks for " + std::to_string(corpus.records.size()) + " transcripts");
  std::vector<EncodedInstance> out;
  out.reserve(corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    out.push_back(encode(corpus.records[i], resources, pretagged ? &(*pretagged)[i] : nullptr));
  }
  return out;
}

}  // namespace adnet
