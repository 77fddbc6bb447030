#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "adnet/autodiff.hpp"
#include "adnet/encoding.hpp"
#include "adnet/model.hpp"
#include "adnet/synthgen.hpp"

namespace adnet::testing {

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

/// Builds a scalar loss on a fresh tape from the given parameter leaves.
using LossFn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Largest relative error between backward() and central differences over
/// every entry of every parameter.
inline double max_gradient_error(std::vector<Parameter>& params, const LossFn& loss_fn, double step = 1e-5) {
  auto evaluate = [&](bool with_grad) {
    Tape tape;
    std::vector<Var> leaves;
    for (auto& p : params) leaves.push_back(tape.parameter(p));
    Var loss = loss_fn(tape, leaves);
    if (with_grad) tape.backward(loss);
    return loss.value().item();
  };
  for (auto& p : params) p.zero_grad();
  evaluate(true);
  double worst = 0.0;
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double up = evaluate(false);
      p.value[i] = saved - step;
      const double down = evaluate(false);
      p.value[i] = saved;
      worst = std::max(worst, relative_error(p.grad[i], (up - down) / (2 * step)));
    }
  }
  return worst;
}

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

/// An encoded instance with random embeddings, random POS one-hots and
/// random features; the first `length` positions are real tokens.
inline EncodedInstance random_instance(const ModelConfig& c, std::size_t length, Label label, std::mt19937_64& rng) {
  EncodedInstance inst;
  inst.transcript_id = "t";
  inst.participant_id = "p";
  inst.label = label;
  inst.tokens.original_length = length;
  for (std::size_t t = 0; t < c.seq_len; ++t) inst.tokens.tokens.push_back(t < length ? "w" : "<pad>");
  inst.embeddings = Tensor({c.seq_len, c.embed_dim});
  inst.pos = Tensor({c.seq_len, c.pos_dim});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> tag(1, c.pos_dim - 1);
  for (std::size_t t = 0; t < c.seq_len; ++t) {
    if (t < length) {
      for (std::size_t d = 0; d < c.embed_dim; ++d) inst.embeddings.at(t, d) = u(rng);
      inst.pos.at(t, tag(rng)) = 1.0;
    } else {
      inst.pos.at(t, 0) = 1.0;
    }
  }
  for (double& f : inst.features.values) f = u(rng);
  return inst;
}

inline ModelConfig tiny_config() {
  ModelConfig c;
  c.seq_len = 5;
  c.embed_dim = 4;
  c.pos_dim = 3;
  c.conv_filters = 2;
  c.conv_kernel = 3;
  c.lstm_hidden = 3;
  c.attention_dim = 3;
  c.dense_units = 3;
  c.dropout_rate = 0.0;
  return c;
}

/// Encodes a freshly generated synthetic corpus in memory, using the gold
/// tags in place of the tagger.
inline std::vector<EncodedInstance> synth_instances(const SynthConfig& sc, std::size_t seq_len = kSequenceLength) {
  const SynthCorpus synth = generate(sc);
  const EmbeddingTable table = synthetic_embeddings(sc.vocab, sc.embed_dim, sc.seed);
  const LexiconSet lexicons = synthetic_lexicons(sc.vocab);
  const PerceptronTagger unused;
  EncoderResources res;
  res.embeddings = &table;
  res.lexicons = &lexicons;
  res.tagger = &unused;
  res.seq_len = seq_len;
  return encode_corpus(synth.corpus, res, &synth.gold_tags);
}

/// Small network that trains in seconds per epoch on a few hundred instances.
inline ModelConfig desk_config(std::size_t embed_dim) {
  ModelConfig c;
  c.embed_dim = embed_dim;
  c.conv_filters = 16;
  c.lstm_hidden = 16;
  c.attention_dim = 16;
  c.dense_units = 16;
  c.learning_rate = 3e-3;
  c.batch_size = 16;
  c.max_epochs = 10;
  c.patience = 3;
  return c;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("adnet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(ADNET_FIXTURE_DIR) / rel;
}

}  // namespace adnet::testing
