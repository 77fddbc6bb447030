#include "adnet/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adnet/error.hpp"

namespace adnet {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void only_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::BadConfig, where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw Error(ErrorCode::BadConfig, "unknown key '" + key + "' in " + where);
}

template <typename T>
void take(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, where + "." + key + ": " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

void take_path(const json& j, const char* key, fs::path& out, const fs::path& base, const std::string& where) {
  std::string s;
  take(j, key, s, where);
  if (!s.empty()) out = resolve(base, s);
}

void take_path(const json& j, const char* key, std::optional<fs::path>& out, const fs::path& base,
               const std::string& where) {
  std::string s;
  take(j, key, s, where);
  if (!s.empty()) out = resolve(base, s);
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, {"corpus_dir", "embeddings", "lexicons", "tagger", "output_dir", "model", "split", "synth"}, "config");
  RunConfig c;
  take_path(j, "corpus_dir", c.corpus_dir, base_dir, "config");
  take_path(j, "embeddings", c.embeddings, base_dir, "config");
  take_path(j, "output_dir", c.output_dir, base_dir, "config");

  if (j.contains("lexicons")) {
    const auto& lj = j.at("lexicons");
    only_keys(lj, {"aoa", "concreteness", "familiarity", "imageability", "sentiment"}, "lexicons");
    for (std::size_t k = 0; k < kAllLexicons.size(); ++k)
      take_path(lj, std::string(to_string(kAllLexicons[k])).c_str(), c.lexicons[k], base_dir, "lexicons");
  }
  if (j.contains("tagger")) {
    const auto& tj = j.at("tagger");
    only_keys(tj, {"model", "training_corpus", "epochs", "pretagged"}, "tagger");
    take_path(tj, "model", c.tagger.model, base_dir, "tagger");
    take_path(tj, "training_corpus", c.tagger.training_corpus, base_dir, "tagger");
    take_path(tj, "pretagged", c.tagger.pretagged, base_dir, "tagger");
    take(tj, "epochs", c.tagger.epochs, "tagger");
  }
  if (j.contains("model")) from_json(j.at("model"), c.model);
  c.model.validate();

  if (j.contains("split")) {
    const auto& sj = j.at("split");
    only_keys(sj, {"train_fraction", "val_fraction", "test_fraction", "unit", "seeds"}, "split");
    take(sj, "train_fraction", c.split.train_fraction, "split");
    take(sj, "val_fraction", c.split.val_fraction, "split");
    take(sj, "test_fraction", c.split.test_fraction, "split");
    std::string unit = "transcript";
    take(sj, "unit", unit, "split");
    if (unit == "transcript") c.split.unit = SplitUnit::Transcript;
    else if (unit == "participant") c.split.unit = SplitUnit::Participant;
    else throw Error(ErrorCode::BadConfig, "split.unit must be 'transcript' or 'participant'");
    take(sj, "seeds", c.seeds, "split");
  }
  c.split.validate();
  if (c.seeds.empty()) throw Error(ErrorCode::BadConfig, "split.seeds must list at least one seed");
  c.split.seed = c.seeds.front();

  if (j.contains("synth")) {
    const auto& yj = j.at("synth");
    only_keys(yj,
              {"n_participants", "transcripts_per_participant", "ad_fraction", "filler_rate_ad", "filler_rate_ct",
               "mean_length_ad", "mean_length_ct", "length_sd", "mean_age_ad", "mean_age_ct", "age_sd", "embed_dim",
               "seed"},
              "synth");
    auto& s = c.synth;
    take(yj, "n_participants", s.n_participants, "synth");
    take(yj, "transcripts_per_participant", s.transcripts_per_participant, "synth");
    take(yj, "ad_fraction", s.ad_fraction, "synth");
    take(yj, "filler_rate_ad", s.filler_rate_ad, "synth");
    take(yj, "filler_rate_ct", s.filler_rate_ct, "synth");
    take(yj, "mean_length_ad", s.mean_length_ad, "synth");
    take(yj, "mean_length_ct", s.mean_length_ct, "synth");
    take(yj, "length_sd", s.length_sd, "synth");
    take(yj, "mean_age_ad", s.mean_age_ad, "synth");
    take(yj, "mean_age_ct", s.mean_age_ct, "synth");
    take(yj, "age_sd", s.age_sd, "synth");
    take(yj, "embed_dim", s.embed_dim, "synth");
    take(yj, "seed", s.seed, "synth");
    s.validate();
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

void apply_output_default(RunConfig& config) {
  if (!config.output_dir.empty()) return;
  const char* env = std::getenv(kOutputDirEnv);
  config.output_dir = env && *env ? fs::path(env) : fs::path("adnet_out");
}

void validate_inputs(const RunConfig& c) {
  auto need = [](const fs::path& p, const std::string& what, bool dir) {
    if (p.empty()) throw Error(ErrorCode::BadConfig, what + " is not set");
    std::error_code ec;
    const bool ok = dir ? fs::is_directory(p, ec) : fs::is_regular_file(p, ec);
    if (!ok) throw Error(ErrorCode::Io, what + " not found: " + p.string());
  };
  need(c.corpus_dir, "corpus_dir", true);
  need(c.embeddings, "embeddings", false);
  for (std::size_t k = 0; k < kAllLexicons.size(); ++k)
    need(c.lexicons[k], "lexicons." + std::string(to_string(kAllLexicons[k])), false);
  if (c.tagger.pretagged) need(*c.tagger.pretagged, "tagger.pretagged", false);
  else if (c.tagger.model) need(*c.tagger.model, "tagger.model", false);
  else if (c.tagger.training_corpus) need(*c.tagger.training_corpus, "tagger.training_corpus", false);
  else throw Error(ErrorCode::BadConfig, "tagger needs one of model, training_corpus or pretagged");
}

}  // namespace adnet
