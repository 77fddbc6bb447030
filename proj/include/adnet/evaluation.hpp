#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adnet/chat.hpp"
#include "adnet/encoding.hpp"
#include "adnet/model.hpp"

namespace adnet {

enum class SplitUnit { Transcript, Participant };

struct SplitSpec {
  double train_fraction = 0.81;
  double val_fraction = 0.09;
  double test_fraction = 0.10;
  std::uint64_t seed = 42;
  SplitUnit unit = SplitUnit::Transcript;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle then contiguous slices of floor(f_train N), floor(f_val N)
/// and the remainder. With SplitUnit::Participant the shuffle and slicing act
/// on distinct participant ids and every transcript follows its participant.
/// Throws TooSmall if any slice is empty.
SplitIndices split(std::span<const std::string> participant_ids, const SplitSpec& spec);
SplitIndices split(std::span<const EncodedInstance> instances, const SplitSpec& spec);

struct ConfusionCounts {
  double tn = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double tp = 0.0;

  double total() const { return tn + fp + fn + tp; }
};

/// AD is the positive class.
ConfusionCounts confusion(std::span<const Label> labels, std::span<const Label> predictions);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  ConfusionCounts counts;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  bool auc_undefined = false;
};

/// Threshold metrics from (possibly averaged) counts; auc is left undefined.
MetricsReport metrics_from_counts(const ConfusionCounts& counts);
/// Threshold metrics from `counts` plus pair-counting AUC over `scores`.
MetricsReport metrics(const ConfusionCounts& counts, std::span<const double> scores, std::span<const Label> labels);
/// Classifies at the 0.5 threshold and reports every metric.
MetricsReport evaluate(std::span<const double> probabilities, std::span<const Label> labels);

/// Fraction of (positive, negative) pairs ranked correctly, ties worth 1/2.
/// Empty when either class is absent.
std::optional<double> auc_pairwise(std::span<const double> scores, std::span<const Label> labels);
/// Trapezoidal area under the ROC curve built from distinct score thresholds.
std::optional<double> auc_trapezoid(std::span<const double> scores, std::span<const Label> labels);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> labels);
void write_roc_csv(const std::vector<RocPoint>& points, std::ostream& out);

/// Field-wise arithmetic mean (metric-level averaging across seeds).
MetricsReport mean_report(std::span<const MetricsReport> reports);

struct SeedRun {
  std::uint64_t seed = 0;
  MetricsReport report;
  std::vector<EpochLog> log;
  std::vector<double> test_scores;
  std::vector<Label> test_labels;
};

struct ExperimentResult {
  std::string variant;
  std::vector<SeedRun> runs;
  MetricsReport mean;
  /// Number of targeted features reaching the dense layer.
  std::size_t feature_dim = 0;
};

/// For each seed: split with that seed, fit with that seed, evaluate on test.
ExperimentResult run_experiment(std::span<const EncodedInstance> instances, const ModelConfig& config,
                                const SplitSpec& split_spec, std::span<const std::uint64_t> seeds,
                                std::string variant = "");

/// The six architectures, in kVariantNames order.
std::vector<ExperimentResult> compare_variants(std::span<const EncodedInstance> instances, const ModelConfig& base,
                                               const SplitSpec& split_spec, std::span<const std::uint64_t> seeds);

/// A set of targeted-feature groups removed together.
struct AblationGroup {
  bool psych = false;
  bool sent = false;
  bool demo = false;

  std::string label() const;
};

/// The single-group removals: No Psych., No Sent., No Demo.
std::vector<AblationGroup> default_ablation_groups();

/// Reruns OURS-Att-w once per group with that group masked out.
std::vector<ExperimentResult> ablate(std::span<const EncodedInstance> instances, const ModelConfig& base,
                                     const SplitSpec& split_spec, std::span<const std::uint64_t> seeds,
                                     std::span<const AblationGroup> groups);

/// `approach,accuracy,precision,recall,f1,auc,tn,fp,fn,tp` with one row per
/// result (seed-averaged); ablation reports add `feature_dim`.
void write_report_csv(std::span<const ExperimentResult> results, std::ostream& out, bool with_feature_dim = false);
/// One row per (approach, seed).
void write_seed_csv(std::span<const ExperimentResult> results, std::ostream& out);
/// Aligned plain-text table of the seed-averaged rows.
void write_report_table(std::span<const ExperimentResult> results, std::ostream& out);

}  // namespace adnet
