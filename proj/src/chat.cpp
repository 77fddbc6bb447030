#include "adnet/chat.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adnet/error.hpp"

namespace adnet {

std::string_view to_string(Label label) noexcept { return label == Label::AD ? "AD" : "CT"; }

Label parse_label(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "AD") return Label::AD;
  if (up == "CT") return Label::CT;
  throw Error(ErrorCode::MissingLabel, "label must be AD or CT, got '" + std::string(text) + "'");
}

std::string_view to_string(Gender gender) noexcept {
  switch (gender) {
    case Gender::Female: return "female";
    case Gender::Male: return "male";
    case Gender::Unknown: break;
  }
  return "unknown";
}

SpeakerCode SpeakerCode::from_tag(std::string_view tag) {
  SpeakerCode code;
  code.tag_ = std::string(tag);
  if (tag == "PAR")
    code.kind_ = Kind::Participant;
  else if (tag == "INV")
    code.kind_ = Kind::Interviewer;
  else
    code.kind_ = Kind::Other;
  return code;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool is_terminal(std::string_view t) { return t == "." || t == "?" || t == "!"; }

bool is_pause(std::string_view t) {
  if (t.size() < 3 || t.front() != '(' || t.back() != ')') return false;
  const std::string_view inner = t.substr(1, t.size() - 2);
  if (inner.find_first_not_of('.') == std::string_view::npos) return inner.size() <= 3;
  // timed pauses such as (1.5) or (2:03.5)
  bool digit = false;
  for (char c : inner) {
    if (std::isdigit(static_cast<unsigned char>(c)))
      digit = true;
    else if (c != '.' && c != ':')
      return false;
  }
  return digit;
}

// Bracketed code handling. Returns false for codes not in the known set.
bool apply_code(std::string_view code, std::vector<std::string>& words) {
  code = trim(code);
  if (code == "/" || code == "//" || code == "///" || code == "/-" || code == "/?") return true;
  if (code.starts_with("x ") || code.starts_with("x")) {
    std::string_view n = trim(code.substr(1));
    if (!n.empty() && std::all_of(n.begin(), n.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return true;
  }
  if (code.starts_with("::") || code.starts_with(":")) {
    std::string_view repl = trim(code.substr(code.starts_with("::") ? 2 : 1));
    if (!words.empty() && !is_terminal(words.back())) words.pop_back();
    for (auto& w : split_ws(repl)) words.push_back(w);
    return true;
  }
  static constexpr std::string_view known_prefixes[] = {"+", "*", "=!", "=", "%", "!!", "!", "?", "^", "- ", "#"};
  return std::any_of(std::begin(known_prefixes), std::end(known_prefixes),
                     [code](std::string_view p) { return code.starts_with(p); });
}

// One cleanup pass over a token. Empty result means "drop".
std::vector<std::string> clean_token(std::string t) {
  if (t.empty() || is_pause(t)) return {};
  if (is_terminal(t)) return {t};
  if (t.front() == '+') {
    const char last = t.back();
    if (last == '.' || last == '?' || last == '!') return {std::string(1, last)};
    return {};
  }
  if (t.starts_with("&=") || t.starts_with("&+") || t.starts_with("&{") || t.starts_with("&}") || t.starts_with("&*"))
    return {};
  if (t.starts_with("&-"))
    t.erase(0, 2);
  else if (t.front() == '&')
    t.erase(0, 1);
  if (!t.empty() && t.front() == '0') return {};
  if (auto at = t.find('@'); at != std::string::npos) t.erase(at);
  static constexpr std::string_view strip = "()&+:^,;\"<>[]\x15";
  std::erase_if(t, [](char c) { return strip.find(c) != std::string_view::npos; });
  std::string punct;
  while (!t.empty() && (t.back() == '.' || t.back() == '?' || t.back() == '!')) {
    if (punct.empty()) punct = std::string(1, t.back());
    t.pop_back();
  }
  std::vector<std::string> out;
  const std::string lw = lower(t);
  if (!t.empty() && lw != "xxx" && lw != "yyy" && lw != "www") out.push_back(t);
  if (!punct.empty()) out.push_back(punct);
  return out;
}

void emit_clean(const std::string& token, std::vector<std::string>& out) {
  std::string current = token;
  for (;;) {
    auto parts = clean_token(current);
    if (parts.empty()) return;
    if (parts.size() == 1 && parts[0] == current) {
      out.push_back(current);
      return;
    }
    if (parts.size() == 2) {
      emit_clean(parts[0], out);
      out.push_back(parts[1]);
      return;
    }
    if (is_terminal(parts[0])) {
      out.push_back(parts[0]);
      return;
    }
    current = parts[0];
  }
}

}  // namespace

std::string normalize_utterance(std::string_view raw, NormalizationStats* stats) {
  std::vector<std::string> words;
  std::size_t i = 0;
  const std::size_t n = raw.size();
  while (i < n) {
    const char c = raw[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '>') {
      ++i;
      continue;
    }
    if (c == '\x15') {  // media bullet
      const auto close = raw.find('\x15', i + 1);
      i = close == std::string_view::npos ? n : close + 1;
      continue;
    }
    if (c == '[') {
      const auto close = raw.find(']', i);
      const std::string_view code = raw.substr(i + 1, (close == std::string_view::npos ? n : close) - i - 1);
      if (!apply_code(code, words) && stats) ++stats->unknown_codes;
      i = close == std::string_view::npos ? n : close + 1;
      continue;
    }
    std::size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(raw[j])) && raw[j] != '[' && raw[j] != '<' && raw[j] != '>')
      ++j;
    words.emplace_back(raw.substr(i, j - i));
    i = j;
  }
  std::vector<std::string> cleaned;
  for (const auto& w : words) emit_clean(w, cleaned);
  std::string out;
  for (const auto& w : cleaned) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string participant_from_transcript_id(std::string_view transcript_id) {
  const auto dash = transcript_id.find('-');
  return std::string(dash == std::string_view::npos || dash == 0 ? transcript_id : transcript_id.substr(0, dash));
}

namespace {

std::vector<std::string> split_pipes(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto bar = s.find('|', start);
    out.emplace_back(trim(s.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

Demographics parse_id_demographics(const std::vector<std::string>& fields) {
  Demographics d;
  const std::string age_field = fields.size() > 3 ? fields[3] : "";
  std::string_view years = age_field;
  if (auto semi = years.find(';'); semi != std::string_view::npos) years = years.substr(0, semi);
  years = trim(years);
  if (!years.empty()) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(years.data(), years.data() + years.size(), value);
    if (ec != std::errc() || ptr != years.data() + years.size() || value <= 0 || value > 130)
      throw Error(ErrorCode::BadDemographics, "unparseable age field '" + age_field + "'");
    d.age = value;
  }
  const std::string g = fields.size() > 4 ? lower(fields[4]) : "";
  if (g == "female")
    d.gender = Gender::Female;
  else if (g == "male")
    d.gender = Gender::Male;
  return d;
}

bool valid_tag(std::string_view tag) {
  return tag.size() == 3 && std::all_of(tag.begin(), tag.end(), [](char c) {
           return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c));
         });
}

}  // namespace

TranscriptRecord parse_chat_file(std::string_view content, Label label, std::string transcript_id) {
  TranscriptRecord record;
  record.transcript_id = std::move(transcript_id);
  record.participant_id = participant_from_transcript_id(record.transcript_id);
  record.label = label;

  struct Pending {
    enum class Kind { None, Header, Main, Dependent } kind = Kind::None;
    std::string key;
    std::string text;
  } pending;

  std::size_t line_no = 0;
  auto flush = [&] {
    if (pending.kind == Pending::Kind::Main) {
      Utterance u;
      u.speaker = SpeakerCode::from_tag(pending.key);
      u.raw_text = std::string(trim(pending.text));
      NormalizationStats stats;
      u.clean_text = normalize_utterance(u.raw_text, &stats);
      record.warnings += stats.unknown_codes;
      u.index = record.utterances.size();
      record.utterances.push_back(std::move(u));
    } else if (pending.kind == Pending::Kind::Header && pending.key == "ID") {
      const auto fields = split_pipes(trim(pending.text));
      if (fields.size() > 2 && fields[2] == "PAR") record.demographics = parse_id_demographics(fields);
    }
    pending = Pending{};
  };

  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (trim(line).empty()) continue;

    const char lead = line.front();
    if (lead == '\t' || lead == ' ') {
      if (pending.kind != Pending::Kind::None) pending.text += " " + std::string(trim(line));
      continue;
    }
    flush();
    const auto colon = line.find(':');
    if (lead == '@') {
      if (colon == std::string_view::npos) continue;  // @Begin, @End, @UTF8
      pending.kind = Pending::Kind::Header;
      pending.key = std::string(line.substr(1, colon - 1));
      pending.text = std::string(line.substr(colon + 1));
    } else if (lead == '*' || lead == '%') {
      if (colon == std::string_view::npos)
        throw Error(ErrorCode::MalformedTier, "line " + std::to_string(line_no) + ": tier without colon");
      const std::string_view tag = line.substr(1, colon - 1);
      if (lead == '*' && !valid_tag(tag))
        throw Error(ErrorCode::MalformedTier, "line " + std::to_string(line_no) + ": bad speaker tag '" + std::string(tag) + "'");
      pending.kind = lead == '*' ? Pending::Kind::Main : Pending::Kind::Dependent;
      pending.key = std::string(tag);
      pending.text = std::string(line.substr(colon + 1));
    } else {
      throw Error(ErrorCode::MalformedTier, "line " + std::to_string(line_no) + ": not a tier, header or continuation");
    }
    if (pos > content.size()) break;
  }
  flush();

  if (std::none_of(record.utterances.begin(), record.utterances.end(),
                   [](const Utterance& u) { return u.speaker.is_participant(); }))
    throw Error(ErrorCode::MissingParticipantTier, "transcript '" + record.transcript_id + "' has no *PAR: tier");
  return record;
}

std::string serialize_chat(const TranscriptRecord& record) {
  std::ostringstream out;
  out << "@UTF8\n@Begin\n@Languages:\teng\n";
  std::set<std::string> tags;
  for (const auto& u : record.utterances) tags.insert(u.speaker.tag());
  out << "@Participants:\t";
  bool first = true;
  for (const auto& t : tags) {
    out << (first ? "" : ", ") << t << (t == "PAR" ? " Participant" : t == "INV" ? " Investigator" : " Other");
    first = false;
  }
  out << "\n@ID:\teng|adnet|PAR|";
  if (record.demographics.age) out << *record.demographics.age << ';';
  out << '|' << (record.demographics.gender == Gender::Unknown ? "" : std::string(to_string(record.demographics.gender)))
      << '|' << (record.label == Label::AD ? "ProbableAD" : "Control") << "||Participant|||\n";
  for (const auto& u : record.utterances) out << '*' << u.speaker.tag() << ":\t" << u.raw_text << '\n';
  out << "@End\n";
  return out.str();
}

std::string extract_participant_text(const TranscriptRecord& record) {
  std::string out;
  for (const auto& u : record.utterances) {
    if (!u.speaker.is_participant() || u.clean_text.empty()) continue;
    if (!out.empty()) out += ' ';
    out += u.clean_text;
  }
  return out;
}

std::size_t participant_word_count(const TranscriptRecord& record) {
  std::size_t n = 0;
  for (const auto& tok : split_ws(extract_participant_text(record)))
    if (!is_terminal(tok)) ++n;
  return n;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "corpus directory not found: " + dir.string());

  struct Entry {
    fs::path path;
    Label label;
    std::string participant;
  };
  std::vector<Entry> entries;
  const fs::path labels = dir / "labels.tsv";
  if (fs::exists(labels)) {
    std::istringstream in(read_file(labels));
    for (std::string line; std::getline(in, line);) {
      const auto body = trim(line);
      if (body.empty() || body.front() == '#') continue;
      std::vector<std::string> cols;
      std::stringstream row{std::string(body)};
      for (std::string col; std::getline(row, col, '\t');) cols.push_back(std::string(trim(col)));
      if (cols.size() < 2) throw Error(ErrorCode::MissingLabel, "labels.tsv line without a label: " + std::string(body));
      entries.push_back({dir / cols[0], parse_label(cols[1]), cols.size() > 2 ? cols[2] : ""});
    }
  } else {
    for (const auto& [sub, label] : {std::pair{"ad", Label::AD}, std::pair{"ct", Label::CT}}) {
      if (!fs::is_directory(dir / sub)) continue;
      for (const auto& e : fs::directory_iterator(dir / sub))
        if (e.is_regular_file() && e.path().extension() == ".cha") entries.push_back({e.path(), label, ""});
    }
  }
  if (entries.empty()) throw Error(ErrorCode::EmptyCorpus, "no transcripts under " + dir.string() + " (expected ad/ and ct/ or labels.tsv)");
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.path < b.path; });

  Corpus corpus;
  std::set<std::string> ids;
  for (const auto& e : entries) {
    std::string id = e.path.stem().string();
    if (!ids.insert(id).second) throw Error(ErrorCode::CorruptFile, "duplicate transcript id '" + id + "'");
    TranscriptRecord rec;
    try {
      rec = parse_chat_file(read_file(e.path), e.label, id);
    } catch (const Error& err) {
      throw Error(err.code(), e.path.string() + ": " + err.what());
    }
    if (!e.participant.empty()) rec.participant_id = e.participant;
    corpus.source_manifest.emplace_back(e.path, id);
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

std::size_t lower_median(std::vector<std::size_t> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyCorpus, "median of an empty list");
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

StatsReport corpus_stats(const Corpus& corpus) {
  if (corpus.records.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no transcripts");
  StatsReport report;
  std::set<std::string> all, ad, ct;
  std::vector<std::size_t> w_all, w_ad, w_ct;
  for (const auto& r : corpus.records) {
    const std::size_t words = participant_word_count(r);
    all.insert(r.participant_id);
    w_all.push_back(words);
    if (r.label == Label::AD) {
      ad.insert(r.participant_id);
      w_ad.push_back(words);
    } else {
      ct.insert(r.participant_id);
      w_ct.push_back(words);
    }
  }
  auto fill = [](LabelStats& s, const std::set<std::string>& p, const std::vector<std::size_t>& w) {
    s.participants = p.size();
    s.transcripts = w.size();
    s.median_words = w.empty() ? 0 : lower_median(w);
  };
  fill(report.total, all, w_all);
  fill(report.ad, ad, w_ad);
  fill(report.ct, ct, w_ct);
  return report;
}

std::string manifest_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.records) {
    nlohmann::ordered_json j;
    j["transcript_id"] = r.transcript_id;
    j["participant_id"] = r.participant_id;
    j["label"] = std::string(to_string(r.label));
    j["age"] = r.demographics.age ? nlohmann::ordered_json(*r.demographics.age) : nlohmann::ordered_json(nullptr);
    j["gender"] = std::string(to_string(r.demographics.gender));
    j["word_count"] = participant_word_count(r);
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace adnet
