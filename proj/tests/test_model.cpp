#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adnet/error.hpp"
#include "adnet/model.hpp"
#include "test_support.hpp"

using namespace adnet;
using adnet::testing::max_gradient_error;
using adnet::testing::random_instance;
using adnet::testing::tiny_config;

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

void fill(Parameter& p, double v) {
  for (double& x : p.value.data()) x = v;
}

std::vector<EncodedInstance> random_set(const ModelConfig& c, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, c.seq_len);
  std::vector<EncodedInstance> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_instance(c, len(rng), i % 3 ? Label::AD : Label::CT, rng));
  return out;
}

// Small separable corpus from the generator, encoded in memory.
const std::vector<EncodedInstance>& small_synth() {
  static const auto instances = [] {
    SynthConfig sc;
    sc.n_participants = 60;
    sc.embed_dim = 20;
    sc.seed = 5;
    return adnet::testing::synth_instances(sc);
  }();
  return instances;
}

ModelConfig small_model() {
  ModelConfig c = adnet::testing::desk_config(20);
  c.conv_filters = 8;
  c.lstm_hidden = 8;
  c.attention_dim = 8;
  c.dense_units = 8;
  return c;
}

}  // namespace

TEST(Forward, OutputStrictlyInsideUnitInterval) {
  for (std::string_view variant : kVariantNames) {
    const ModelConfig c = variant_config(tiny_config(), variant);
    const ModelParams params = ModelParams::init(c, 3);
    for (const auto& inst : random_set(c, 20, 8)) {
      const double p = predict_probability(params, c, inst);
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
    }
  }
}

TEST(Forward, ZeroOutputWeightsGiveHalf) {
  ModelConfig c = tiny_config();
  ModelParams params = ModelParams::init(c, 1);
  EXPECT_EQ(params.get("output.b").value.item(), 0.0);
  fill(params.get("output.w"), 0.0);
  std::mt19937_64 rng(2);
  EncodedInstance inst = random_instance(c, 1, Label::AD, rng);
  EXPECT_EQ(predict_probability(params, c, inst), 0.5);
}

TEST(Forward, IdenticalHiddenStatesGiveUniformAttention) {
  ModelConfig c = tiny_config();
  ModelParams params = ModelParams::init(c, 4);
  for (const char* name : {"lstm_fwd.wx", "lstm_fwd.wh", "lstm_fwd.b", "lstm_bwd.wx", "lstm_bwd.wh", "lstm_bwd.b"})
    fill(params.get(name), 0.0);
  std::mt19937_64 rng(6);
  for (std::size_t length : {1u, 3u, 5u}) {
    std::vector<double> alpha;
    predict_probability(params, c, random_instance(c, length, Label::CT, rng), &alpha);
    ASSERT_EQ(alpha.size(), c.seq_len);
    for (std::size_t t = 0; t < c.seq_len; ++t) {
      if (t < length) EXPECT_NEAR(alpha[t], 1.0 / static_cast<double>(length), 1e-15);
      else EXPECT_EQ(alpha[t], 0.0);
    }
  }
}

TEST(Forward, AttentionSumsToOneWithExactPadZeros) {
  ModelConfig c = tiny_config();
  c.seq_len = kSequenceLength;
  const ModelParams params = ModelParams::init(c, 12);
  std::mt19937_64 rng(13);
  for (std::size_t length : {1u, 10u, 40u, 72u, 73u}) {
    std::vector<double> alpha;
    predict_probability(params, c, random_instance(c, length, Label::AD, rng), &alpha);
    EXPECT_NEAR(std::accumulate(alpha.begin(), alpha.end(), 0.0), 1.0, 1e-9);
    for (std::size_t t = length; t < c.seq_len; ++t) EXPECT_EQ(alpha[t], 0.0);
  }
}

TEST(Forward, RejectsMisshapedInstance) {
  const ModelConfig c = tiny_config();
  const ModelParams params = ModelParams::init(c, 1);
  std::mt19937_64 rng(1);
  EncodedInstance inst = random_instance(c, 3, Label::AD, rng);
  inst.embeddings = Tensor({c.seq_len, c.embed_dim + 1});
  EXPECT_EQ(code_of([&] { predict_probability(params, c, inst); }), ErrorCode::ShapeMismatch);
}

// Finite differences against backward() through the whole network and loss.
TEST(Forward, GradientCheckEveryVariant) {
  std::mt19937_64 rng(31);
  for (std::string_view variant : kVariantNames) {
    const ModelConfig c = variant_config(tiny_config(), variant);
    for (int draw = 0; draw < 3; ++draw) {
      ModelParams params = ModelParams::init(c, rng());
      const auto inst = random_instance(c, 1 + draw * 2, draw % 2 ? Label::AD : Label::CT, rng);
      const ClassWeights w{0.7, 1.9};
      auto loss = [&](Tape& tape, const std::vector<Var>& leaves) {
        return weighted_bce(forward(tape, leaves, c, inst), inst.label == Label::AD ? 1 : 0, w);
      };
      EXPECT_LT(max_gradient_error(params.all(), loss), 1e-4) << variant << " draw " << draw;
    }
  }
}

TEST(ClassWeightsTest, BalancedHeuristic) {
  const auto w = compute_class_weights(1049, 243);
  EXPECT_NEAR(w.ad, 1292.0 / 2098.0, 1e-12);
  EXPECT_NEAR(w.ct, 1292.0 / 486.0, 1e-12);
  EXPECT_NEAR(w.ad, 0.6158, 5e-5);
  EXPECT_NEAR(w.ct, 2.6584, 5e-5);
  const auto eq = compute_class_weights(50, 50);
  EXPECT_EQ(eq.ad, 1.0);
  EXPECT_EQ(eq.ct, 1.0);
  EXPECT_EQ(code_of([] { compute_class_weights(10, 0); }), ErrorCode::ZeroClass);
  EXPECT_EQ(code_of([] { compute_class_weights(0, 10); }), ErrorCode::ZeroClass);
}

TEST(Loss, WeightedBceValues) {
  EXPECT_NEAR(weighted_bce(0.5, 1, {2.0, 1.0}), 2.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(weighted_bce(0.5, 0, {}), std::log(2.0), 1e-12);
  EXPECT_LT(weighted_bce(1.0, 1, {}), 1e-6);
  EXPECT_TRUE(std::isfinite(weighted_bce(0.0, 1, {})));
  double prev = -1.0;
  for (double w_ct = 0.25; w_ct < 5.0; w_ct += 0.25) {
    const double l = weighted_bce(0.3, 0, {1.0, w_ct});
    EXPECT_GT(l, prev);
    prev = l;
  }
  Tape tape;
  for (double p : {0.1, 0.5, 0.93})
    for (int y : {0, 1})
      EXPECT_DOUBLE_EQ(weighted_bce(tape.constant(Tensor::scalar(p)), y, {1.3, 0.4}).value().item(),
                       weighted_bce(p, y, {1.3, 0.4}));
}

TEST(Predict, InclusiveThreshold) {
  EXPECT_EQ(classify(0.5), Label::AD);
  EXPECT_EQ(classify(0.49), Label::CT);
}

TEST(Predict, OrderDoesNotMatter) {
  const ModelConfig c = tiny_config();
  const ModelParams params = ModelParams::init(c, 17);
  auto set = random_set(c, 12, 18);
  const auto forward_order = predict(params, c, set);
  std::reverse(set.begin(), set.end());
  auto reversed = predict(params, c, set);
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(forward_order, reversed);
}

TEST(Variants, FlagsAndParameterSets) {
  const ModelConfig base = tiny_config();
  const auto c = variant_config(base, "C-LSTM");
  EXPECT_FALSE(c.bidirectional || c.use_attention || c.use_targeted_features || c.use_class_weights);
  const auto a = variant_config(base, "C-LSTM-Att");
  EXPECT_TRUE(a.bidirectional && a.use_attention);
  EXPECT_FALSE(a.use_targeted_features || a.use_class_weights);
  EXPECT_TRUE(variant_config(base, "C-LSTM-Att-w").use_class_weights);
  const auto ours = variant_config(base, "OURS");
  EXPECT_TRUE(ours.use_targeted_features);
  EXPECT_FALSE(ours.use_attention || ours.use_class_weights);
  const auto full = variant_config(base, "OURS-Att-w");
  EXPECT_TRUE(full.bidirectional && full.use_attention && full.use_targeted_features && full.use_class_weights);
  EXPECT_EQ(code_of([&] { variant_config(base, "LSTM"); }), ErrorCode::BadConfig);

  EXPECT_FALSE(ModelParams::init(c, 1).has("lstm_bwd.wx"));
  EXPECT_TRUE(ModelParams::init(a, 1).has("lstm_bwd.wx"));
}

TEST(Variants, BaselineAttentionGetsZeroGradient) {
  const ModelConfig c = variant_config(tiny_config(), "C-LSTM");
  ModelParams params = ModelParams::init(c, 9);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 5; ++i) {
    const auto inst = random_instance(c, 4, Label::AD, rng);
    Tape tape;
    std::vector<Var> leaves;
    for (auto& p : params.all()) leaves.push_back(tape.parameter(p));
    tape.backward(weighted_bce(forward(tape, leaves, c, inst), 1, {}));
  }
  for (const char* name : {"attention.w", "attention.b", "attention.u"})
    for (double g : params.get(name).grad.data()) EXPECT_EQ(g, 0.0) << name;
  double lstm_grad = 0.0;
  for (double g : params.get("lstm_fwd.wx").grad.data()) lstm_grad += std::abs(g);
  EXPECT_GT(lstm_grad, 0.0);
}

TEST(Variants, DisabledFeaturesLeaveOutputBitIdentical) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (const char* variant : {"C-LSTM", "C-LSTM-Att", "C-LSTM-Att-w"}) {
    const ModelConfig c = variant_config(tiny_config(), variant);
    const ModelParams params = ModelParams::init(c, 15);
    for (auto inst : random_set(c, 10, 16)) {
      const double before = predict_probability(params, c, inst);
      for (double& f : inst.features.values) f = u(rng);
      EXPECT_EQ(predict_probability(params, c, inst), before);
    }
  }
  // Masked groups behave the same way for the slots they cover.
  ModelConfig c = tiny_config();
  c.feature_mask.psych = false;
  c.feature_mask.demo = false;
  EXPECT_EQ(c.active_feature_slots(), (std::vector<std::size_t>{4}));
  const ModelParams params = ModelParams::init(c, 19);
  for (auto inst : random_set(c, 10, 20)) {
    const double before = predict_probability(params, c, inst);
    for (std::size_t k : {0u, 1u, 2u, 3u, 5u, 6u}) inst.features.values[k] = u(rng);
    EXPECT_EQ(predict_probability(params, c, inst), before);
    inst.features.values[4] += 1.0;
    EXPECT_NE(predict_probability(params, c, inst), before);
  }
}

TEST(Fit, TrainingLossFallsOverFirstThreeEpochs) {
  SynthConfig sc;
  sc.n_participants = 150;
  sc.embed_dim = 20;
  sc.seed = 5;
  const auto data = adnet::testing::synth_instances(sc);
  const std::span<const EncodedInstance> all(data);
  ModelConfig c = variant_config(adnet::testing::desk_config(20), "OURS-Att-w");
  c.max_epochs = 3;
  c.patience = 10;
  const auto result = fit(c, all.subspan(0, 240), all.subspan(240));
  ASSERT_EQ(result.log.size(), 3u);
  EXPECT_LT(result.log[1].train_loss, result.log[0].train_loss);
  EXPECT_LT(result.log[2].train_loss, result.log[1].train_loss);
}

TEST(Fit, EarlyStoppingFollowsPatience) {
  const auto& data = small_synth();
  const std::span<const EncodedInstance> all(data);
  for (std::size_t patience : {0u, 1u, 2u}) {
    ModelConfig c = variant_config(small_model(), "C-LSTM");
    c.learning_rate = 0.05;
    c.max_epochs = 12;
    c.patience = patience;
    const auto result = fit(c, all.subspan(0, 90), all.subspan(90));
    // Replay the log: count consecutive epochs without a new best.
    double best = std::numeric_limits<double>::infinity();
    std::size_t stale = 0, best_epoch = 0, stop = 0;
    for (const auto& e : result.log) {
      if (e.val_loss < best) best = e.val_loss, best_epoch = e.epoch, stale = 0;
      else if (++stale > patience) {
        stop = e.epoch;
        break;
      }
    }
    EXPECT_EQ(result.best_epoch, best_epoch);
    if (stop) EXPECT_EQ(result.log.size(), stop) << "patience " << patience;
    else EXPECT_EQ(result.log.size(), c.max_epochs);
    if (stop) EXPECT_EQ(stop, best_epoch + patience + 1);
  }
}

TEST(Fit, SameSeedSameLog) {
  const auto& data = small_synth();
  const std::span<const EncodedInstance> all(data);
  ModelConfig c = variant_config(small_model(), "OURS-Att-w");
  c.max_epochs = 2;
  const auto a = fit(c, all.subspan(0, 90), all.subspan(90));
  const auto b = fit(c, all.subspan(0, 90), all.subspan(90));
  std::stringstream la, lb;
  write_training_log(a.log, la);
  write_training_log(b.log, lb);
  EXPECT_EQ(la.str(), lb.str());
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(la.str().rfind("epoch,train_loss,val_loss,val_auc\n", 0), 0u);
}

TEST(Fit, NonFiniteInputDiverges) {
  const ModelConfig c = tiny_config();
  auto set = random_set(c, 6, 21);
  set[0].embeddings.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
  set[0].embeddings.at(1, 0) = std::numeric_limits<double>::infinity();
  const std::span<const EncodedInstance> all(set);
  EXPECT_EQ(code_of([&] { fit(c, all.subspan(0, 4), all.subspan(4)); }), ErrorCode::Diverged);
}

TEST(ModelFile, RoundTripIsExact) {
  ModelConfig c = variant_config(tiny_config(), "OURS-Att-w");
  c.feature_mask.sent = false;
  c.optimizer = OptimizerKind::Sgd;
  const ModelParams params = ModelParams::init(c, 23);
  std::stringstream ss;
  save_model(params, c, ss);
  const auto loaded = load_model(ss);
  EXPECT_EQ(loaded.config, c);
  EXPECT_TRUE(loaded.params == params);
  const auto set = random_set(c, 8, 24);
  EXPECT_EQ(predict(loaded.params, loaded.config, set), predict(params, c, set));
}

TEST(ModelFile, CorruptAndVersionErrors) {
  const ModelConfig c = tiny_config();
  std::stringstream ss;
  save_model(ModelParams::init(c, 1), c, ss);
  const std::string bytes = ss.str();
  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    std::stringstream t(bytes.substr(0, cut));
    EXPECT_EQ(code_of([&] { load_model(t); }), ErrorCode::CorruptFile) << cut;
  }
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::stringstream m(bad_magic);
  EXPECT_EQ(code_of([&] { load_model(m); }), ErrorCode::CorruptFile);
  std::string bad_version = bytes;
  bad_version[4] = 7;
  std::stringstream v(bad_version);
  EXPECT_EQ(code_of([&] { load_model(v); }), ErrorCode::VersionMismatch);
}

TEST(ModelConfigJson, StrictKeys) {
  ModelConfig c;
  c.conv_filters = 7;
  c.feature_mask.demo = false;
  nlohmann::json j;
  to_json(j, c);
  ModelConfig back;
  from_json(j, back);
  EXPECT_EQ(back, c);
  j["conv_filterz"] = 3;
  EXPECT_EQ(code_of([&] { from_json(j, back); }), ErrorCode::BadConfig);
  ModelConfig even;
  even.conv_kernel = 4;
  EXPECT_EQ(code_of([&] { even.validate(); }), ErrorCode::BadConfig);
}
