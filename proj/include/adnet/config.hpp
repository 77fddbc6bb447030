#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adnet/evaluation.hpp"
#include "adnet/model.hpp"
#include "adnet/synthgen.hpp"

namespace adnet {

/// Environment variable supplying the output directory when neither the
/// config file nor --output-dir names one.
inline constexpr const char* kOutputDirEnv = "ADNET_OUTPUT_DIR";

struct TaggerSettings {
  /// Saved tagger; wins over training_corpus.
  std::optional<std::filesystem::path> model;
  /// Tagged sentences to train a tagger from at startup.
  std::optional<std::filesystem::path> training_corpus;
  std::size_t epochs = 5;
  /// Gold (token, tag) blocks, one per transcript in corpus order; bypasses
  /// the tagger entirely.
  std::optional<std::filesystem::path> pretagged;
};

struct RunConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path embeddings;
  /// Indexed like kAllLexicons.
  std::array<std::filesystem::path, 5> lexicons;
  TaggerSettings tagger;
  std::filesystem::path output_dir;
  ModelConfig model;
  SplitSpec split;
  std::vector<std::uint64_t> seeds = {42, 43, 44};
  SynthConfig synth;
};

/// Parses a JSON run config. Relative paths are resolved against
/// `base_dir`; unknown keys throw BadConfig.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Fills output_dir from the environment (or "adnet_out") when unset.
void apply_output_default(RunConfig& config);

/// Checks that every input needed for encoding exists; throws Io naming the
/// first missing path.
void validate_inputs(const RunConfig& config);

}  // namespace adnet
