#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adnet {

enum class Label { AD, CT };

std::string_view to_string(Label label) noexcept;
Label parse_label(std::string_view text);

/// Tier tag of a main speech line. PAR and INV are distinguished; any other
/// three-character uppercase tag is kept verbatim as Other.
class SpeakerCode {
 public:
  enum class Kind { Participant, Interviewer, Other };

  static SpeakerCode from_tag(std::string_view tag);

  Kind kind() const noexcept { return kind_; }
  const std::string& tag() const noexcept { return tag_; }
  bool is_participant() const noexcept { return kind_ == Kind::Participant; }

  friend bool operator==(const SpeakerCode&, const SpeakerCode&) = default;

 private:
  Kind kind_ = Kind::Other;
  std::string tag_;
};

struct Utterance {
  SpeakerCode speaker;
  std::string raw_text;
  std::string clean_text;
  std::size_t index = 0;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

enum class Gender { Female, Male, Unknown };

std::string_view to_string(Gender gender) noexcept;

struct Demographics {
  std::optional<int> age;
  Gender gender = Gender::Unknown;

  friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct TranscriptRecord {
  std::string transcript_id;
  std::string participant_id;
  std::vector<Utterance> utterances;
  Demographics demographics;
  Label label = Label::CT;
  /// Unknown bracket codes dropped during normalization.
  std::size_t warnings = 0;

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

struct Corpus {
  std::vector<TranscriptRecord> records;
  std::vector<std::pair<std::filesystem::path, std::string>> source_manifest;
};

struct NormalizationStats {
  std::size_t unknown_codes = 0;
};

/// Rewrites one CHAT main-tier body into plain words plus sentence-final
/// punctuation. Fillers (`&uh`, `&-um`) survive as words; retracing markers,
/// events, pauses and unintelligible tokens are removed; `[: x]` replaces the
/// preceding word with x; `(be)cause` expands to `because`.
std::string normalize_utterance(std::string_view raw, NormalizationStats* stats = nullptr);

/// Participant id derived from a transcript id: the part before the first
/// '-' (DementiaBank names its files `<participant>-<visit>.cha`).
std::string participant_from_transcript_id(std::string_view transcript_id);

TranscriptRecord parse_chat_file(std::string_view content, Label label, std::string transcript_id = "transcript");

/// Renders the record back into the CHAT subset accepted by parse_chat_file.
std::string serialize_chat(const TranscriptRecord& record);

/// Participant speech only, single-space joined, in file order.
std::string extract_participant_text(const TranscriptRecord& record);

/// Number of word tokens (punctuation excluded) in the participant text.
std::size_t participant_word_count(const TranscriptRecord& record);

/// Reads `<dir>/ad/*.cha` and `<dir>/ct/*.cha`, or, when present, the files
/// listed in `<dir>/labels.tsv` (`path<TAB>AD|CT[<TAB>participant_id]`).
/// Records are ordered by path.
Corpus load_corpus(const std::filesystem::path& dir);

struct LabelStats {
  std::size_t participants = 0;
  std::size_t transcripts = 0;
  std::size_t median_words = 0;
};

struct StatsReport {
  LabelStats total;
  LabelStats ad;
  LabelStats ct;
};

/// Lower median for even-sized lists.
std::size_t lower_median(std::vector<std::size_t> values);

StatsReport corpus_stats(const Corpus& corpus);

/// One JSON object per line: transcript_id, participant_id, label, age,
/// gender, word_count.
std::string manifest_jsonl(const Corpus& corpus);

}  // namespace adnet
