#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adnet/chat.hpp"
#include "adnet/tensor.hpp"
#include "adnet/text.hpp"

namespace adnet {

/// Word vectors in the standard text distribution format. Missing words and
/// "<pad>" map to the zero vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim), zeros_(dim, 0.0) {}

  static EmbeddingTable load(std::istream& in);
  static EmbeddingTable load(const std::filesystem::path& path);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(const std::string& word) const { return entries_.count(word) != 0; }
  /// Returns false if `word` already had a vector (first occurrence wins).
  bool insert(const std::string& word, std::vector<double> vec);
  /// Zero vector for pad and OOV words.
  std::span<const double> lookup(const std::string& word) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> entries_;
  std::vector<double> zeros_;
};

/// [tokens x dim] matrix of looked-up vectors.
Tensor embed(const TokenSequence& seq, const EmbeddingTable& table);

enum class LexiconKind { AgeOfAcquisition, Concreteness, Familiarity, Imageability, Sentiment };

inline constexpr std::array<LexiconKind, 5> kAllLexicons = {
    LexiconKind::AgeOfAcquisition, LexiconKind::Concreteness, LexiconKind::Familiarity, LexiconKind::Imageability,
    LexiconKind::Sentiment};

std::string_view to_string(LexiconKind kind) noexcept;
LexiconKind parse_lexicon_kind(std::string_view name);

struct Lexicon {
  LexiconKind kind = LexiconKind::AgeOfAcquisition;
  double lo = 0.0;
  double hi = 0.0;
  std::unordered_map<std::string, double> entries;

  /// `# range lo hi` header followed by `word<TAB>score` lines.
  static Lexicon load(std::istream& in, LexiconKind kind);
  static Lexicon load(const std::filesystem::path& path, LexiconKind kind);
  void save(std::ostream& out) const;
};

struct LexiconScore {
  double mean = 0.0;
  double coverage = 0.0;
};

/// Mean over non-pad tokens found in the lexicon; misses are excluded from
/// both numerator and denominator.
LexiconScore mean_lexicon_score(const TokenSequence& seq, const Lexicon& lexicon);

/// One slot per LexiconKind; build_feature_vector requires all five.
using LexiconSet = std::array<std::optional<Lexicon>, 5>;

LexiconSet load_lexicons(const std::array<std::filesystem::path, 5>& paths);

inline constexpr std::size_t kFeatureCount = 7;

/// [aoa, concreteness, familiarity, imageability, sentiment, age/100, gender]
struct TargetedFeatureVector {
  std::array<double, kFeatureCount> values{};

  double aoa() const { return values[0]; }
  double concreteness() const { return values[1]; }
  double familiarity() const { return values[2]; }
  double imageability() const { return values[3]; }
  double sentiment() const { return values[4]; }
  double age() const { return values[5]; }
  double gender() const { return values[6]; }
};

struct CoverageReport {
  std::array<double, 5> fraction{};
};

TargetedFeatureVector build_feature_vector(const TokenSequence& seq, const LexiconSet& lexicons,
                                           const Demographics& demographics, CoverageReport* coverage = nullptr);

}  // namespace adnet
