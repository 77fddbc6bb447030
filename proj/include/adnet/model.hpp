#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adnet/autodiff.hpp"
#include "adnet/encoding.hpp"
#include "adnet/optimizer.hpp"

namespace adnet {

/// Targeted-feature groups that can be switched off for ablation.
struct FeatureMask {
  bool psych = true;  // aoa, concreteness, familiarity, imageability
  bool sent = true;   // sentiment
  bool demo = true;   // age, gender

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;
};

struct ModelConfig {
  std::size_t seq_len = kSequenceLength;
  std::size_t embed_dim = 300;
  std::size_t pos_dim = TagSet::kSize;
  std::size_t conv_filters = 100;
  std::size_t conv_kernel = 3;
  std::size_t lstm_hidden = 128;
  std::size_t attention_dim = 128;
  std::size_t dense_units = 64;
  double dropout_rate = 0.5;
  bool bidirectional = true;
  bool use_attention = true;
  bool use_targeted_features = true;
  bool use_class_weights = true;
  FeatureMask feature_mask;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 42;

  void validate() const;
  /// Indices into the 7-slot feature vector that reach the dense layer.
  std::vector<std::size_t> active_feature_slots() const;
  std::size_t recurrent_width() const { return bidirectional ? 2 * lstm_hidden : lstm_hidden; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
/// Missing keys keep their defaults; unknown keys throw BadConfig.
void from_json(const nlohmann::json& j, ModelConfig& c);

inline constexpr std::array<std::string_view, 6> kVariantNames = {"C-LSTM", "C-LSTM-Att", "C-LSTM-Att-w",
                                                                  "OURS",   "OURS-Att",   "OURS-Att-w"};

/// Sets the bidirectional/attention/targeted/class-weight flags for one of
/// the six compared architectures; other fields are taken from `base`.
ModelConfig variant_config(ModelConfig base, std::string_view variant);

/// Learned weights, stored in a fixed order so serialization and optimizer
/// state line up.
class ModelParams {
 public:
  static ModelParams init(const ModelConfig& config, std::uint64_t seed);

  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  bool has(std::string_view name) const;

  std::vector<Parameter>& all() noexcept { return params_; }
  const std::vector<Parameter>& all() const noexcept { return params_; }
  std::vector<Parameter*> pointers();
  void zero_grad();
  std::size_t count() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);

 private:
  std::vector<Parameter> params_;
};

struct ClassWeights {
  double ad = 1.0;
  double ct = 1.0;
};

/// w_c = (n_ad + n_ct) / (2 n_c). ZeroClass if either count is 0.
ClassWeights compute_class_weights(std::size_t n_ad, std::size_t n_ct);

inline constexpr double kProbabilityEpsilon = 1e-7;

/// -[w_ad y log p + w_ct (1-y) log(1-p)] with p clamped to [eps, 1-eps].
double weighted_bce(double p, int y, const ClassWeights& weights);
Var weighted_bce(Var p, int y, const ClassWeights& weights);

struct ForwardOptions {
  /// Dropout is applied only when a generator is supplied.
  std::mt19937_64* dropout_rng = nullptr;
  /// Receives the attention weights over all seq_len positions.
  std::vector<double>* attention = nullptr;
};

/// Records the full network on `tape` and returns the sigmoid output [1 x 1].
/// `leaves` are the parameters bound to the tape, in ModelParams order.
Var forward(Tape& tape, std::span<const Var> leaves, const ModelConfig& config, const EncodedInstance& instance,
            const ForwardOptions& options = {});

/// Inference convenience: probability of AD with dropout disabled.
double predict_probability(const ModelParams& params, const ModelConfig& config, const EncodedInstance& instance,
                           std::vector<double>* attention = nullptr);

std::vector<double> predict(const ModelParams& params, const ModelConfig& config,
                            std::span<const EncodedInstance> instances);

inline constexpr double kDecisionThreshold = 0.5;
inline Label classify(double probability) { return probability >= kDecisionThreshold ? Label::AD : Label::CT; }

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_auc = 0.0;
};

struct FitResult {
  ModelParams params;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  ClassWeights weights;
};

/// Mini-batch training with early stopping on validation loss; returns the
/// parameters of the best validation epoch. Throws Diverged on NaN/Inf.
FitResult fit(const ModelConfig& config, std::span<const EncodedInstance> train,
              std::span<const EncodedInstance> validation);

/// Mean unweighted BCE over `instances`.
double mean_loss(const ModelParams& params, const ModelConfig& config, std::span<const EncodedInstance> instances);

void write_training_log(const std::vector<EpochLog>& log, std::ostream& out);

void save_model(const ModelParams& params, const ModelConfig& config, std::ostream& out);
void save_model(const ModelParams& params, const ModelConfig& config, const std::filesystem::path& path);

struct LoadedModel {
  ModelParams params;
  ModelConfig config;
};

LoadedModel load_model(std::istream& in);
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace adnet
