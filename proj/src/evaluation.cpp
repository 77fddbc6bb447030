#include "adnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "adnet/error.hpp"

namespace adnet {

void SplitSpec::validate() const {
  const double fractions[] = {train_fraction, val_fraction, test_fraction};
  for (double f : fractions)
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorCode::BadConfig, "split fractions must lie in [0, 1]");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
    throw Error(ErrorCode::BadConfig, "split fractions must sum to 1");
}

namespace {

// floor(f * n), tolerant of representation error such as 0.81 * 100 = 80.99..
std::size_t slice_size(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

SplitIndices split(std::span<const std::string> participant_ids, const SplitSpec& spec) {
  spec.validate();
  if (participant_ids.empty()) throw Error(ErrorCode::TooSmall, "cannot split an empty corpus");
  std::mt19937_64 rng(spec.seed);
  SplitIndices out;

  if (spec.unit == SplitUnit::Transcript) {
    const std::size_t n = participant_ids.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = slice_size(spec.train_fraction, n), n_val = slice_size(spec.val_fraction, n);
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                   order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  } else {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < participant_ids.size(); ++i) groups[participant_ids[i]].push_back(i);
    std::vector<const std::vector<std::size_t>*> units;
    for (const auto& [id, members] : groups) units.push_back(&members);
    std::shuffle(units.begin(), units.end(), rng);
    const std::size_t n = units.size();
    const std::size_t n_train = slice_size(spec.train_fraction, n), n_val = slice_size(spec.val_fraction, n);
    for (std::size_t k = 0; k < n; ++k) {
      auto& dest = k < n_train ? out.train : k < n_train + n_val ? out.val : out.test;
      dest.insert(dest.end(), units[k]->begin(), units[k]->end());
    }
  }
  if (out.train.empty() || out.val.empty() || out.test.empty())
    throw Error(ErrorCode::TooSmall, "split of " + std::to_string(participant_ids.size()) +
                                         " items leaves a slice empty (train " + std::to_string(out.train.size()) +
                                         ", val " + std::to_string(out.val.size()) + ", test " +
                                         std::to_string(out.test.size()) + ")");
  return out;
}

SplitIndices split(std::span<const EncodedInstance> instances, const SplitSpec& spec) {
  std::vector<std::string> ids;
  ids.reserve(instances.size());
  for (const auto& inst : instances) ids.push_back(inst.participant_id);
  return split(std::span<const std::string>(ids), spec);
}

ConfusionCounts confusion(std::span<const Label> labels, std::span<const Label> predictions) {
  if (labels.size() != predictions.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(labels.size()) + " labels but " +
                                               std::to_string(predictions.size()) + " predictions");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] == Label::AD, predicted = predictions[i] == Label::AD;
    if (actual) (predicted ? c.tp : c.fn) += 1.0;
    else (predicted ? c.fp : c.tn) += 1.0;
  }
  return c;
}

MetricsReport metrics_from_counts(const ConfusionCounts& c) {
  if (c.tn < 0 || c.fp < 0 || c.fn < 0 || c.tp < 0) throw Error(ErrorCode::BadConfig, "confusion counts must be >= 0");
  MetricsReport r;
  r.counts = c;
  const double total = c.total();
  r.accuracy = total > 0 ? (c.tp + c.tn) / total : 0.0;
  if (c.tp + c.fp > 0) r.precision = c.tp / (c.tp + c.fp);
  else r.precision_undefined = true;
  if (c.tp + c.fn > 0) r.recall = c.tp / (c.tp + c.fn);
  else r.recall_undefined = true;
  if (!r.precision_undefined && !r.recall_undefined && r.precision + r.recall > 0)
    r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  else r.f1_undefined = true;
  r.auc_undefined = true;
  return r;
}

MetricsReport metrics(const ConfusionCounts& counts, std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(scores.size()) + " scores but " + std::to_string(labels.size()) + " labels");
  MetricsReport r = metrics_from_counts(counts);
  if (const auto auc = auc_pairwise(scores, labels)) {
    r.auc = *auc;
    r.auc_undefined = false;
  }
  return r;
}

MetricsReport evaluate(std::span<const double> probabilities, std::span<const Label> labels) {
  std::vector<Label> predicted;
  predicted.reserve(probabilities.size());
  for (double p : probabilities) predicted.push_back(classify(p));
  return metrics(confusion(labels, predicted), probabilities, labels);
}

namespace {

struct ClassSizes {
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

ClassSizes class_sizes(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(scores.size()) + " scores but " + std::to_string(labels.size()) + " labels");
  ClassSizes s;
  for (Label l : labels) ++(l == Label::AD ? s.pos : s.neg);
  return s;
}

// Descending by score; each group holds (positives, negatives) sharing a score.
struct TieGroup {
  double score;
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

std::vector<TieGroup> tie_groups(std::span<const double> scores, std::span<const Label> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<TieGroup> groups;
  for (std::size_t i : order) {
    if (groups.empty() || groups.back().score != scores[i]) groups.push_back({scores[i]});
    ++(labels[i] == Label::AD ? groups.back().pos : groups.back().neg);
  }
  return groups;
}

}  // namespace

// Both AUC routines accumulate the same integer, 2*wins + ties, in units of
// 1/(2PN), so they agree to the last bit.
std::optional<double> auc_pairwise(std::span<const double> scores, std::span<const Label> labels) {
  const ClassSizes s = class_sizes(scores, labels);
  if (s.pos == 0 || s.neg == 0) return std::nullopt;
  std::uint64_t twice = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != Label::AD) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == Label::AD) continue;
      if (scores[i] > scores[j]) twice += 2;
      else if (scores[i] == scores[j]) twice += 1;
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(s.pos) * static_cast<double>(s.neg));
}

std::optional<double> auc_trapezoid(std::span<const double> scores, std::span<const Label> labels) {
  const ClassSizes s = class_sizes(scores, labels);
  if (s.pos == 0 || s.neg == 0) return std::nullopt;
  // Each threshold step moves right by dn/N and up by dp/P; the trapezoid
  // under it has area dn * (2 tp + dp) / (2PN).
  std::uint64_t tp = 0, twice = 0;
  for (const TieGroup& g : tie_groups(scores, labels)) {
    twice += g.neg * (2 * tp + g.pos);
    tp += g.pos;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(s.pos) * static_cast<double>(s.neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> labels) {
  const ClassSizes s = class_sizes(scores, labels);
  std::vector<RocPoint> points{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  std::uint64_t tp = 0, fp = 0;
  for (const TieGroup& g : tie_groups(scores, labels)) {
    tp += g.pos;
    fp += g.neg;
    points.push_back({g.score, s.neg ? static_cast<double>(fp) / static_cast<double>(s.neg) : 0.0,
                      s.pos ? static_cast<double>(tp) / static_cast<double>(s.pos) : 0.0});
  }
  return points;
}

void write_roc_csv(const std::vector<RocPoint>& points, std::ostream& out) {
  out << "threshold,fpr,tpr\n";
  char buf[96];
  for (const auto& p : points) {
    if (std::isinf(p.threshold)) std::snprintf(buf, sizeof buf, "inf,%.6f,%.6f\n", p.fpr, p.tpr);
    else std::snprintf(buf, sizeof buf, "%.9g,%.6f,%.6f\n", p.threshold, p.fpr, p.tpr);
    out << buf;
  }
}

MetricsReport mean_report(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::TooSmall, "cannot average zero reports");
  MetricsReport m;
  for (const auto& r : reports) {
    m.accuracy += r.accuracy;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.auc += r.auc;
    m.counts.tn += r.counts.tn;
    m.counts.fp += r.counts.fp;
    m.counts.fn += r.counts.fn;
    m.counts.tp += r.counts.tp;
    m.precision_undefined |= r.precision_undefined;
    m.recall_undefined |= r.recall_undefined;
    m.f1_undefined |= r.f1_undefined;
    m.auc_undefined |= r.auc_undefined;
  }
  const double n = static_cast<double>(reports.size());
  for (double* v : {&m.accuracy, &m.precision, &m.recall, &m.f1, &m.auc, &m.counts.tn, &m.counts.fp, &m.counts.fn,
                    &m.counts.tp})
    *v /= n;
  return m;
}

ExperimentResult run_experiment(std::span<const EncodedInstance> instances, const ModelConfig& config,
                                const SplitSpec& split_spec, std::span<const std::uint64_t> seeds,
                                std::string variant) {
  if (seeds.empty()) throw Error(ErrorCode::BadConfig, "run_experiment needs at least one seed");
  ExperimentResult result;
  result.variant = std::move(variant);
  result.feature_dim = config.active_feature_slots().size();
  std::vector<MetricsReport> reports;
  for (std::uint64_t seed : seeds) {
    SplitSpec spec = split_spec;
    spec.seed = seed;
    const SplitIndices parts = split(instances, spec);
    auto gather = [&](const std::vector<std::size_t>& idx) {
      std::vector<EncodedInstance> out;
      out.reserve(idx.size());
      for (std::size_t i : idx) out.push_back(instances[i]);
      return out;
    };
    const auto train = gather(parts.train), val = gather(parts.val), test = gather(parts.test);
    ModelConfig cfg = config;
    cfg.seed = seed;
    FitResult fitted = fit(cfg, train, val);

    SeedRun run;
    run.seed = seed;
    run.test_scores = predict(fitted.params, cfg, test);
    for (const auto& inst : test) run.test_labels.push_back(inst.label);
    run.report = evaluate(run.test_scores, run.test_labels);
    run.log = std::move(fitted.log);
    reports.push_back(run.report);
    result.runs.push_back(std::move(run));
  }
  result.mean = mean_report(reports);
  return result;
}

std::vector<ExperimentResult> compare_variants(std::span<const EncodedInstance> instances, const ModelConfig& base,
                                               const SplitSpec& split_spec, std::span<const std::uint64_t> seeds) {
  std::vector<ExperimentResult> out;
  for (std::string_view name : kVariantNames)
    out.push_back(run_experiment(instances, variant_config(base, name), split_spec, seeds, std::string(name)));
  return out;
}

std::string AblationGroup::label() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ' ';
    out += name;
  };
  add(psych, "No Psych.");
  add(sent, "No Sent.");
  add(demo, "No Demo.");
  return out.empty() ? "Full" : out;
}

std::vector<AblationGroup> default_ablation_groups() {
  return {{true, false, false}, {false, true, false}, {false, false, true}};
}

std::vector<ExperimentResult> ablate(std::span<const EncodedInstance> instances, const ModelConfig& base,
                                     const SplitSpec& split_spec, std::span<const std::uint64_t> seeds,
                                     std::span<const AblationGroup> groups) {
  if (groups.empty()) throw Error(ErrorCode::BadConfig, "ablate needs at least one feature group");
  std::vector<ExperimentResult> out;
  for (const AblationGroup& g : groups) {
    ModelConfig cfg = variant_config(base, "OURS-Att-w");
    cfg.feature_mask = {!g.psych, !g.sent, !g.demo};
    out.push_back(run_experiment(instances, cfg, split_spec, seeds, g.label()));
  }
  return out;
}

namespace {

std::string metric_fields(const MetricsReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f,%.4f,%.4f", r.accuracy, r.precision, r.recall,
                r.f1, r.auc, r.counts.tn, r.counts.fp, r.counts.fn, r.counts.tp);
  return buf;
}

std::string undefined_flags(const MetricsReport& r) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ';';
    out += name;
  };
  add(r.precision_undefined, "precision");
  add(r.recall_undefined, "recall");
  add(r.f1_undefined, "f1");
  add(r.auc_undefined, "auc");
  return out;
}

}  // namespace

void write_report_csv(std::span<const ExperimentResult> results, std::ostream& out, bool with_feature_dim) {
  out << "approach,accuracy,precision,recall,f1,auc,tn,fp,fn,tp" << (with_feature_dim ? ",feature_dim" : "") << '\n';
  for (const auto& r : results) {
    out << r.variant << ',' << metric_fields(r.mean);
    if (with_feature_dim) out << ',' << r.feature_dim;
    out << '\n';
  }
}

void write_seed_csv(std::span<const ExperimentResult> results, std::ostream& out) {
  out << "approach,seed,accuracy,precision,recall,f1,auc,tn,fp,fn,tp,undefined\n";
  for (const auto& r : results)
    for (const auto& run : r.runs)
      out << r.variant << ',' << run.seed << ',' << metric_fields(run.report) << ',' << undefined_flags(run.report)
          << '\n';
}

void write_report_table(std::span<const ExperimentResult> results, std::ostream& out) {
  std::size_t width = 8;
  for (const auto& r : results) width = std::max(width, r.variant.size());
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %8s %9s %8s %8s %8s %8s %8s %8s %8s\n", static_cast<int>(width), "Approach",
                "Accuracy", "Precision", "Recall", "F1", "AUC", "TN", "FP", "FN", "TP");
  out << buf;
  for (const auto& r : results) {
    const auto& m = r.mean;
    std::snprintf(buf, sizeof buf, "%-*s %8.4f %9.4f %8.4f %8.4f %8.4f %8.2f %8.2f %8.2f %8.2f\n",
                  static_cast<int>(width), r.variant.c_str(), m.accuracy, m.precision, m.recall, m.f1, m.auc,
                  m.counts.tn, m.counts.fp, m.counts.fn, m.counts.tp);
    out << buf;
  }
}

}  // namespace adnet
