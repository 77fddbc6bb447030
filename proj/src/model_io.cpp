#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "adnet/error.hpp"
#include "adnet/model.hpp"

namespace adnet {

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{
      {"seq_len", c.seq_len},
      {"embed_dim", c.embed_dim},
      {"pos_dim", c.pos_dim},
      {"conv_filters", c.conv_filters},
      {"conv_kernel", c.conv_kernel},
      {"lstm_hidden", c.lstm_hidden},
      {"attention_dim", c.attention_dim},
      {"dense_units", c.dense_units},
      {"dropout_rate", c.dropout_rate},
      {"bidirectional", c.bidirectional},
      {"use_attention", c.use_attention},
      {"use_targeted_features", c.use_targeted_features},
      {"use_class_weights", c.use_class_weights},
      {"feature_mask", {{"psych", c.feature_mask.psych}, {"sent", c.feature_mask.sent}, {"demo", c.feature_mask.demo}}},
      {"optimizer", c.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"max_epochs", c.max_epochs},
      {"patience", c.patience},
      {"seed", c.seed},
  };
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("model.") + key + ": " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::BadConfig, where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw Error(ErrorCode::BadConfig, "unknown key '" + key + "' in " + where);
}

}  // namespace

void from_json(const nlohmann::json& j, ModelConfig& c) {
  reject_unknown(j,
                 {"seq_len", "embed_dim", "pos_dim", "conv_filters", "conv_kernel", "lstm_hidden", "attention_dim",
                  "dense_units", "dropout_rate", "bidirectional", "use_attention", "use_targeted_features",
                  "use_class_weights", "feature_mask", "optimizer", "learning_rate", "batch_size", "max_epochs",
                  "patience", "seed"},
                 "model");
  read_field(j, "seq_len", c.seq_len);
  read_field(j, "embed_dim", c.embed_dim);
  read_field(j, "pos_dim", c.pos_dim);
  read_field(j, "conv_filters", c.conv_filters);
  read_field(j, "conv_kernel", c.conv_kernel);
  read_field(j, "lstm_hidden", c.lstm_hidden);
  read_field(j, "attention_dim", c.attention_dim);
  read_field(j, "dense_units", c.dense_units);
  read_field(j, "dropout_rate", c.dropout_rate);
  read_field(j, "bidirectional", c.bidirectional);
  read_field(j, "use_attention", c.use_attention);
  read_field(j, "use_targeted_features", c.use_targeted_features);
  read_field(j, "use_class_weights", c.use_class_weights);
  if (j.contains("feature_mask")) {
    const auto& m = j.at("feature_mask");
    reject_unknown(m, {"psych", "sent", "demo"}, "model.feature_mask");
    read_field(m, "psych", c.feature_mask.psych);
    read_field(m, "sent", c.feature_mask.sent);
    read_field(m, "demo", c.feature_mask.demo);
  }
  if (j.contains("optimizer")) {
    std::string name;
    read_field(j, "optimizer", name);
    if (name == "adam") c.optimizer = OptimizerKind::Adam;
    else if (name == "sgd") c.optimizer = OptimizerKind::Sgd;
    else throw Error(ErrorCode::BadConfig, "model.optimizer must be 'adam' or 'sgd', got '" + name + "'");
  }
  read_field(j, "learning_rate", c.learning_rate);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "max_epochs", c.max_epochs);
  read_field(j, "patience", c.patience);
  read_field(j, "seed", c.seed);
}

namespace {

constexpr char kMagic[4] = {'A', 'D', 'N', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T take(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) throw Error(ErrorCode::CorruptFile, "model file truncated");
  return value;
}

std::string take_string(std::istream& in, std::uint64_t limit) {
  const auto n = take<std::uint64_t>(in);
  if (n > limit) throw Error(ErrorCode::CorruptFile, "implausible string length in model file");
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n)))
    throw Error(ErrorCode::CorruptFile, "model file truncated");
  return s;
}

}  // namespace

void save_model(const ModelParams& params, const ModelConfig& config, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put(out, kFormatVersion);
  const std::string cfg = nlohmann::json(config).dump();
  put<std::uint64_t>(out, cfg.size());
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  put<std::uint64_t>(out, params.all().size());
  for (const auto& p : params.all()) {
    put<std::uint64_t>(out, p.name.size());
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(p.value.data().data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing model");
}

void save_model(const ModelParams& params, const ModelConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  save_model(params, config, out);
}

LoadedModel load_model(std::istream& in) {
  char magic[4];
  if (!in.read(magic, sizeof magic)) throw Error(ErrorCode::CorruptFile, "model file truncated");
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw Error(ErrorCode::CorruptFile, "not a model file");
  const auto version = take<std::uint32_t>(in);
  if (version != kFormatVersion)
    throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) + ", expected " +
                                                std::to_string(kFormatVersion));
  LoadedModel loaded;
  try {
    nlohmann::json::parse(take_string(in, 1 << 20)).get_to(loaded.config);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("bad config block: ") + e.what());
  }
  try {
    loaded.config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptFile, e.what());
  }
  loaded.params = ModelParams::init(loaded.config, 0);
  const auto count = take<std::uint64_t>(in);
  if (count != loaded.params.all().size())
    throw Error(ErrorCode::CorruptFile, "model file has " + std::to_string(count) + " tensors, config implies " +
                                            std::to_string(loaded.params.all().size()));
  for (auto& p : loaded.params.all()) {
    const std::string name = take_string(in, 256);
    if (name != p.name) throw Error(ErrorCode::CorruptFile, "expected tensor '" + p.name + "', found '" + name + "'");
    const auto rank = take<std::uint32_t>(in);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(take<std::uint64_t>(in));
    if (shape != p.value.shape())
      throw Error(ErrorCode::CorruptFile, "tensor '" + name + "' has shape " + shape_string(shape) + ", expected " +
                                              shape_string(p.value.shape()));
    auto data = p.value.data();
    if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double))))
      throw Error(ErrorCode::CorruptFile, "model file truncated");
  }
  return loaded;
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return load_model(in);
}

}  // namespace adnet
