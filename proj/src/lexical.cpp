#include "adnet/lexical.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "adnet/error.hpp"

namespace adnet {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view text, ErrorCode code, const std::string& where) {
  std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) throw Error(code, where + ": bad number '" + buf + "'");
  return v;
}

}  // namespace

bool EmbeddingTable::insert(const std::string& word, std::vector<double> vec) {
  if (vec.size() != dim_)
    throw Error(ErrorCode::DimensionMismatch, "vector for '" + word + "' has " + std::to_string(vec.size()) +
                                                  " values, expected " + std::to_string(dim_));
  return entries_.emplace(word, std::move(vec)).second;
}

std::span<const double> EmbeddingTable::lookup(const std::string& word) const {
  if (auto it = entries_.find(word); it != entries_.end() && word != kPadToken) return it->second;
  return zeros_;
}

EmbeddingTable EmbeddingTable::load(std::istream& in) {
  EmbeddingTable table;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (table.dim_ == 0) {
      if (fields.size() < 2) throw Error(ErrorCode::DimensionMismatch, "line 1 has no vector values");
      table.dim_ = fields.size() - 1;
      table.zeros_.assign(table.dim_, 0.0);
    }
    if (fields.size() - 1 != table.dim_)
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line_no) + " has " +
                                                    std::to_string(fields.size() - 1) + " values, expected " +
                                                    std::to_string(table.dim_));
    std::string word(fields[0]);
    if (table.entries_.count(word)) continue;
    std::vector<double> vec(table.dim_);
    const std::string where = "line " + std::to_string(line_no);
    for (std::size_t k = 0; k < table.dim_; ++k) vec[k] = parse_double(fields[k + 1], ErrorCode::CorruptFile, where);
    table.entries_.emplace(std::move(word), std::move(vec));
  }
  if (table.entries_.empty()) throw Error(ErrorCode::EmptyFile, "embedding file has no vectors");
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read embeddings " + path.string());
  return load(in);
}

Tensor embed(const TokenSequence& seq, const EmbeddingTable& table) {
  if (seq.tokens.empty() || table.dim() == 0) throw Error(ErrorCode::ShapeMismatch, "embed needs tokens and a loaded table");
  Tensor m({seq.tokens.size(), table.dim()});
  for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
    const auto vec = table.lookup(seq.tokens[t]);
    std::copy(vec.begin(), vec.end(), &m.at(t, 0));
  }
  return m;
}

std::string_view to_string(LexiconKind kind) noexcept {
  switch (kind) {
    case LexiconKind::AgeOfAcquisition: return "aoa";
    case LexiconKind::Concreteness: return "concreteness";
    case LexiconKind::Familiarity: return "familiarity";
    case LexiconKind::Imageability: return "imageability";
    case LexiconKind::Sentiment: return "sentiment";
  }
  return "unknown";
}

LexiconKind parse_lexicon_kind(std::string_view name) {
  for (LexiconKind k : kAllLexicons)
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::MissingLexicon, "unknown lexicon name '" + std::string(name) + "'");
}

Lexicon Lexicon::load(std::istream& in, LexiconKind kind) {
  Lexicon lex;
  lex.kind = kind;
  std::string line;
  const std::string name(to_string(kind));
  bool have_range = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + " lexicon line " + std::to_string(line_no);
    if (!have_range) {
      const auto f = split_spaces(line);
      if (f.size() != 4 || f[0] != "#" || f[1] != "range")
        throw Error(ErrorCode::BadLexicon, where + ": expected '# range lo hi' header");
      lex.lo = parse_double(f[2], ErrorCode::BadLexicon, where);
      lex.hi = parse_double(f[3], ErrorCode::BadLexicon, where);
      if (!(lex.lo <= lex.hi)) throw Error(ErrorCode::BadLexicon, where + ": empty range");
      have_range = true;
      continue;
    }
    if (line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw Error(ErrorCode::BadLexicon, where + ": expected word<TAB>score");
    const double score = parse_double(std::string_view(line).substr(tab + 1), ErrorCode::BadLexicon, where);
    if (score < lex.lo || score > lex.hi) throw Error(ErrorCode::BadLexicon, where + ": score outside declared range");
    lex.entries.emplace(line.substr(0, tab), score);
  }
  if (!have_range) throw Error(ErrorCode::BadLexicon, name + " lexicon is empty");
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path, LexiconKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingLexicon, "cannot read lexicon " + path.string());
  return load(in, kind);
}

void Lexicon::save(std::ostream& out) const {
  out << "# range " << lo << ' ' << hi << '\n';
  std::vector<std::pair<std::string, double>> sorted(entries.begin(), entries.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [w, s] : sorted) out << w << '\t' << s << '\n';
}

LexiconScore mean_lexicon_score(const TokenSequence& seq, const Lexicon& lexicon) {
  std::size_t found = 0, words = 0;
  double total = 0.0;
  for (const auto& tok : seq.tokens) {
    if (tok == kPadToken) continue;
    ++words;
    if (auto it = lexicon.entries.find(tok); it != lexicon.entries.end()) {
      total += it->second;
      ++found;
    }
  }
  if (found == 0) return {};
  return {total / static_cast<double>(found), static_cast<double>(found) / static_cast<double>(words)};
}

LexiconSet load_lexicons(const std::array<std::filesystem::path, 5>& paths) {
  LexiconSet set;
  for (std::size_t i = 0; i < kAllLexicons.size(); ++i) set[i] = Lexicon::load(paths[i], kAllLexicons[i]);
  return set;
}

TargetedFeatureVector build_feature_vector(const TokenSequence& seq, const LexiconSet& lexicons,
                                           const Demographics& demographics, CoverageReport* coverage) {
  TargetedFeatureVector fv;
  for (std::size_t i = 0; i < kAllLexicons.size(); ++i) {
    if (!lexicons[i])
      throw Error(ErrorCode::MissingLexicon, "no " + std::string(to_string(kAllLexicons[i])) + " lexicon supplied");
    if (lexicons[i]->kind != kAllLexicons[i])
      throw Error(ErrorCode::MissingLexicon, "lexicon slot " + std::to_string(i) + " holds the wrong kind");
    const LexiconScore s = mean_lexicon_score(seq, *lexicons[i]);
    fv.values[i] = s.mean;
    if (coverage) coverage->fraction[i] = s.coverage;
  }
  fv.values[5] = demographics.age ? *demographics.age / 100.0 : 0.0;
  switch (demographics.gender) {
    case Gender::Female: fv.values[6] = 1.0; break;
    case Gender::Male: fv.values[6] = 0.0; break;
    case Gender::Unknown: fv.values[6] = 0.5; break;
  }
  return fv;
}

}  // namespace adnet
