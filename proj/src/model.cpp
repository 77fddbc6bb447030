#include "adnet/model.hpp"

#include <algorithm>
#include <cmath>

#include "adnet/error.hpp"

namespace adnet {

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::BadConfig, what); };
  if (seq_len == 0 || embed_dim == 0 || pos_dim == 0) fail("seq_len, embed_dim and pos_dim must be positive");
  if (conv_filters == 0 || lstm_hidden == 0 || attention_dim == 0 || dense_units == 0)
    fail("layer widths must be positive");
  if (conv_kernel % 2 == 0) fail("conv_kernel must be odd");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (batch_size == 0 || max_epochs == 0) fail("batch_size and max_epochs must be positive");
}

std::vector<std::size_t> ModelConfig::active_feature_slots() const {
  std::vector<std::size_t> slots;
  if (!use_targeted_features) return slots;
  if (feature_mask.psych) slots.insert(slots.end(), {0, 1, 2, 3});
  if (feature_mask.sent) slots.push_back(4);
  if (feature_mask.demo) slots.insert(slots.end(), {5, 6});
  return slots;
}

ModelConfig variant_config(ModelConfig base, std::string_view variant) {
  const bool ours = variant.starts_with("OURS");
  const bool att = variant.find("-Att") != std::string_view::npos;
  const bool weighted = variant.ends_with("-w");
  if (std::find(kVariantNames.begin(), kVariantNames.end(), variant) == kVariantNames.end())
    throw Error(ErrorCode::BadConfig, "unknown variant '" + std::string(variant) + "'");
  base.use_targeted_features = ours;
  base.bidirectional = att;
  base.use_attention = att;
  base.use_class_weights = weighted;
  return base;
}

namespace {

struct Layout {
  static constexpr std::size_t conv_embed_kernel = 0, conv_embed_bias = 1, conv_pos_kernel = 2, conv_pos_bias = 3;
  static constexpr std::size_t lstm_fwd = 4;
  std::size_t lstm_bwd = 0;
  std::size_t attention = 0;
  std::size_t dense = 0;
  std::size_t output = 0;
  std::size_t total = 0;

  explicit Layout(const ModelConfig& c) {
    std::size_t next = lstm_fwd + 3;
    if (c.bidirectional) {
      lstm_bwd = next;
      next += 3;
    }
    attention = next;
    dense = attention + 3;
    output = dense + 2;
    total = output + 2;
  }
};

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& c, std::uint64_t seed) {
  c.validate();
  std::mt19937_64 rng(seed);
  const std::size_t F = c.conv_filters, w = c.conv_kernel, H = c.lstm_hidden, R = c.recurrent_width();
  const std::size_t A = c.attention_dim, U = c.dense_units;
  ModelParams p;
  auto& v = p.params_;
  v.emplace_back("conv_embed.kernel", glorot({F, w, c.embed_dim}, w * c.embed_dim, w * F, rng));
  v.emplace_back("conv_embed.bias", Tensor({1, F}));
  v.emplace_back("conv_pos.kernel", glorot({F, w, c.pos_dim}, w * c.pos_dim, w * F, rng));
  v.emplace_back("conv_pos.bias", Tensor({1, F}));
  auto lstm = [&](const std::string& prefix) {
    v.emplace_back(prefix + ".wx", glorot({2 * F, 4 * H}, 2 * F, 4 * H, rng));
    v.emplace_back(prefix + ".wh", glorot({H, 4 * H}, H, 4 * H, rng));
    Tensor bias({1, 4 * H});
    for (std::size_t j = H; j < 2 * H; ++j) bias[j] = 1.0;  // forget gate
    v.emplace_back(prefix + ".b", std::move(bias));
  };
  lstm("lstm_fwd");
  if (c.bidirectional) lstm("lstm_bwd");
  v.emplace_back("attention.w", glorot({R, A}, R, A, rng));
  v.emplace_back("attention.b", Tensor({1, A}));
  v.emplace_back("attention.u", glorot({A, 1}, A, 1, rng));
  const std::size_t in = R + c.active_feature_slots().size();
  v.emplace_back("dense.w", glorot({in, U}, in, U, rng));
  v.emplace_back("dense.b", Tensor({1, U}));
  v.emplace_back("output.w", glorot({U, 1}, U, 1, rng));
  v.emplace_back("output.b", Tensor({1, 1}));
  return p;
}

Parameter& ModelParams::get(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw Error(ErrorCode::ShapeMismatch, "no parameter named '" + std::string(name) + "'");
}

const Parameter& ModelParams::get(std::string_view name) const { return const_cast<ModelParams*>(this)->get(name); }

bool ModelParams::has(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(), [name](const Parameter& p) { return p.name == name; });
}

std::vector<Parameter*> ModelParams::pointers() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

void ModelParams::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (a.params_.size() != b.params_.size()) return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i)
    if (a.params_[i].name != b.params_[i].name || a.params_[i].value != b.params_[i].value) return false;
  return true;
}

ClassWeights compute_class_weights(std::size_t n_ad, std::size_t n_ct) {
  if (n_ad == 0 || n_ct == 0) throw Error(ErrorCode::ZeroClass, "class weights need both classes present");
  const double total = static_cast<double>(n_ad + n_ct);
  return {total / (2.0 * static_cast<double>(n_ad)), total / (2.0 * static_cast<double>(n_ct))};
}

double weighted_bce(double p, int y, const ClassWeights& weights) {
  const double q = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return -(weights.ad * y * std::log(q) + weights.ct * (1 - y) * std::log(1.0 - q));
}

Var weighted_bce(Var p, int y, const ClassWeights& weights) {
  Var q = clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  if (y == 1) return affine(log(q), -weights.ad);
  return affine(log(affine(q, -1.0, 1.0)), -weights.ct);
}

namespace {

std::vector<Var> run_lstm(Var inputs, Var wx, Var wh, Var bias, std::size_t hidden, bool reverse) {
  Var gates_in = add(matmul(inputs, wx), bias);
  const std::size_t L = inputs.value().rows();
  std::vector<Var> hs(L);
  Var h, c;
  for (std::size_t step = 0; step < L; ++step) {
    const std::size_t t = reverse ? L - 1 - step : step;
    Var g = slice(gates_in, 0, t, 1);
    if (step > 0) g = add(g, matmul(h, wh));
    Var sg = sigmoid(g);
    Var in_gate = slice(sg, 1, 0, hidden);
    Var candidate = tanh(slice(g, 1, 2 * hidden, hidden));
    Var out_gate = slice(sg, 1, 3 * hidden, hidden);
    if (step == 0) {
      c = mul(in_gate, candidate);
    } else {
      Var forget = slice(sg, 1, hidden, hidden);
      c = add(mul(forget, c), mul(in_gate, candidate));
    }
    h = mul(out_gate, tanh(c));
    hs[t] = h;
  }
  return hs;
}

}  // namespace

Var forward(Tape& tape, std::span<const Var> leaves, const ModelConfig& c, const EncodedInstance& inst,
            const ForwardOptions& options) {
  const Layout layout(c);
  if (leaves.size() != layout.total)
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(layout.total) + " parameters, got " +
                                              std::to_string(leaves.size()));
  if (inst.embeddings.shape() != Shape{c.seq_len, c.embed_dim} || inst.pos.shape() != Shape{c.seq_len, c.pos_dim})
    throw Error(ErrorCode::ShapeMismatch, "instance " + inst.transcript_id + " has embeddings " +
                                              shape_string(inst.embeddings.shape()) + " and POS " +
                                              shape_string(inst.pos.shape()));
  const std::size_t T = c.seq_len, H = c.lstm_hidden, R = c.recurrent_width();
  const std::size_t L = std::min(inst.length(), T);

  Var emb = tape.view(inst.embeddings);
  Var pos = tape.view(inst.pos);
  Var conv_e = relu(add(conv1d(emb, leaves[Layout::conv_embed_kernel]), leaves[Layout::conv_embed_bias]));
  Var conv_p = relu(add(conv1d(pos, leaves[Layout::conv_pos_kernel]), leaves[Layout::conv_pos_bias]));
  const Var branches[] = {conv_e, conv_p};
  Var merged = concat(branches, 1);

  std::vector<Var> fwd, bwd;
  if (L > 0) {
    Var seq = L == T ? merged : slice(merged, 0, 0, L);
    fwd = run_lstm(seq, leaves[Layout::lstm_fwd], leaves[Layout::lstm_fwd + 1], leaves[Layout::lstm_fwd + 2], H, false);
    if (c.bidirectional)
      bwd = run_lstm(seq, leaves[layout.lstm_bwd], leaves[layout.lstm_bwd + 1], leaves[layout.lstm_bwd + 2], H, true);
  }

  Var summary;
  if (L == 0) {
    summary = tape.constant(Tensor({1, R}));
    if (options.attention) options.attention->assign(T, 0.0);
  } else if (c.use_attention) {
    Var states = concat(fwd, 0);
    if (c.bidirectional) {
      const Var both[] = {states, concat(bwd, 0)};
      states = concat(both, 1);
    }
    if (L < T) {
      const Var padded[] = {states, tape.constant(Tensor({T - L, R}))};
      states = concat(padded, 0);
    }
    Var projected = tanh(add(matmul(states, leaves[layout.attention]), leaves[layout.attention + 1]));
    Var scores = matmul(projected, leaves[layout.attention + 2]);
    const std::vector<double> mask = inst.mask();
    Var alpha = softmax(scores, 0, std::span<const double>(mask));
    if (options.attention) {
      const Tensor& a = alpha.value();
      options.attention->assign(a.data().begin(), a.data().end());
    }
    summary = matmul(transpose(alpha), states);
  } else {
    if (c.bidirectional) {
      const Var ends[] = {fwd.back(), bwd.front()};
      summary = concat(ends, 1);
    } else {
      summary = fwd.back();
    }
  }

  const auto slots = c.active_feature_slots();
  if (!slots.empty()) {
    Tensor feats({1, slots.size()});
    for (std::size_t k = 0; k < slots.size(); ++k) feats[k] = inst.features.values[slots[k]];
    const Var parts[] = {summary, tape.constant(std::move(feats))};
    summary = concat(parts, 1);
  }

  Var hidden = relu(add(matmul(summary, leaves[layout.dense]), leaves[layout.dense + 1]));
  if (options.dropout_rng && c.dropout_rate > 0.0) {
    std::bernoulli_distribution keep(1.0 - c.dropout_rate);
    Tensor mask(hidden.shape());
    for (double& m : mask.data()) m = keep(*options.dropout_rng) ? 1.0 / (1.0 - c.dropout_rate) : 0.0;
    hidden = mul(hidden, tape.constant(std::move(mask)));
  }
  return sigmoid(add(matmul(hidden, leaves[layout.output]), leaves[layout.output + 1]));
}

double predict_probability(const ModelParams& params, const ModelConfig& config, const EncodedInstance& instance,
                           std::vector<double>* attention) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& p : params.all()) leaves.push_back(tape.view(p.value));
  ForwardOptions options;
  options.attention = attention;
  return forward(tape, leaves, config, instance, options).value().item();
}

std::vector<double> predict(const ModelParams& params, const ModelConfig& config,
                            std::span<const EncodedInstance> instances) {
  std::vector<double> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(predict_probability(params, config, inst));
  return out;
}

}  // namespace adnet
