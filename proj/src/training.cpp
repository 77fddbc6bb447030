#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "adnet/error.hpp"
#include "adnet/evaluation.hpp"
#include "adnet/model.hpp"

namespace adnet {

namespace {

int target(Label label) { return label == Label::AD ? 1 : 0; }

double train_batch(ModelParams& params, const ModelConfig& config, std::span<const EncodedInstance> train,
                   std::span<const std::size_t> batch, const ClassWeights& weights, std::mt19937_64& dropout_rng) {
  params.zero_grad();
  double total = 0.0;
  ForwardOptions options;
  options.dropout_rng = &dropout_rng;
  for (std::size_t index : batch) {
    const EncodedInstance& inst = train[index];
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.all().size());
    for (auto& p : params.all()) leaves.push_back(tape.parameter(p));
    Var p = forward(tape, leaves, config, inst, options);
    Var loss = weighted_bce(p, target(inst.label), weights);
    tape.backward(loss);
    total += loss.value().item();
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (auto& p : params.all())
    for (double& g : p.grad.data()) g *= scale;
  return total;
}

}  // namespace

double mean_loss(const ModelParams& params, const ModelConfig& config, std::span<const EncodedInstance> instances) {
  if (instances.empty()) throw Error(ErrorCode::TooSmall, "mean_loss needs at least one instance");
  const ClassWeights unweighted;
  double total = 0.0;
  for (const auto& inst : instances)
    total += weighted_bce(predict_probability(params, config, inst), target(inst.label), unweighted);
  return total / static_cast<double>(instances.size());
}

FitResult fit(const ModelConfig& config, std::span<const EncodedInstance> train,
              std::span<const EncodedInstance> validation) {
  config.validate();
  if (train.empty() || validation.empty()) throw Error(ErrorCode::TooSmall, "fit needs non-empty train and validation sets");

  FitResult result;
  if (config.use_class_weights) {
    const auto n_ad = static_cast<std::size_t>(
        std::count_if(train.begin(), train.end(), [](const EncodedInstance& i) { return i.label == Label::AD; }));
    result.weights = compute_class_weights(n_ad, train.size() - n_ad);
  }

  ModelParams params = ModelParams::init(config, config.seed);
  Optimizer optimizer({config.optimizer, config.learning_rate});
  std::mt19937_64 shuffle_rng(config.seed + 1);
  std::mt19937_64 dropout_rng(config.seed + 2);
  const auto pointers = params.pointers();

  std::vector<Label> val_labels;
  for (const auto& inst : validation) val_labels.push_back(inst.label);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  result.params = params;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    try {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      double total = 0.0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t len = std::min(config.batch_size, order.size() - start);
        total += train_batch(params, config, train, std::span(order).subspan(start, len), result.weights, dropout_rng);
        optimizer.step(pointers);
      }
      entry.train_loss = total / static_cast<double>(train.size());
      const std::vector<double> scores = predict(params, config, validation);
      double val = 0.0;
      for (std::size_t i = 0; i < scores.size(); ++i) val += weighted_bce(scores[i], target(val_labels[i]), {});
      entry.val_loss = val / static_cast<double>(scores.size());
      entry.val_auc = auc_pairwise(scores, val_labels).value_or(std::numeric_limits<double>::quiet_NaN());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonFiniteValue)
        throw Error(ErrorCode::Diverged, "training diverged in epoch " + std::to_string(epoch) + ": " + e.what());
      throw;
    }
    if (!std::isfinite(entry.train_loss) || !std::isfinite(entry.val_loss))
      throw Error(ErrorCode::Diverged, "non-finite loss in epoch " + std::to_string(epoch));
    result.log.push_back(entry);

    if (entry.val_loss < best_val) {
      best_val = entry.val_loss;
      result.best_epoch = epoch;
      result.params = params;
      stale = 0;
    } else if (++stale > config.patience) {
      break;
    }
  }
  result.params.zero_grad();
  return result;
}

void write_training_log(const std::vector<EpochLog>& log, std::ostream& out) {
  out << "epoch,train_loss,val_loss,val_auc\n";
  char buf[160];
  for (const auto& e : log) {
    const std::string auc = std::isnan(e.val_auc) ? "nan" : [&] {
      char a[32];
      std::snprintf(a, sizeof a, "%.9g", e.val_auc);
      return std::string(a);
    }();
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,", e.epoch, e.train_loss, e.val_loss);
    out << buf << auc << '\n';
  }
}

}  // namespace adnet
