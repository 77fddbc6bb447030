#include "adnet/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adnet/config.hpp"
#include "adnet/encoding.hpp"
#include "adnet/error.hpp"
#include "adnet/evaluation.hpp"
#include "adnet/synthgen.hpp"

namespace adnet {

namespace {

namespace fs = std::filesystem;

constexpr int kReportSchemaVersion = 1;

struct Overrides {
  std::string output_dir;
  std::vector<std::uint64_t> seeds;
  std::string variant;
  std::size_t max_epochs = 0;
};

void add_common(CLI::App* cmd, Overrides& o, bool training) {
  cmd->add_option("--output-dir", o.output_dir, "Directory for artifacts (overrides config and $ADNET_OUTPUT_DIR)");
  cmd->add_option("--seed", o.seeds, "Seed(s) replacing split.seeds; the first also seeds the model")
      ->expected(1, 16);
  if (training) {
    cmd->add_option("--max-epochs", o.max_epochs, "Override model.max_epochs")->check(CLI::PositiveNumber);
  }
}

RunConfig configure(const std::string& path, const Overrides& o) {
  RunConfig c = load_run_config(path);
  if (!o.output_dir.empty()) c.output_dir = o.output_dir;
  if (!o.seeds.empty()) {
    c.seeds = o.seeds;
    c.split.seed = o.seeds.front();
    c.model.seed = o.seeds.front();
    c.synth.seed = o.seeds.front();
  }
  if (o.max_epochs) c.model.max_epochs = o.max_epochs;
  if (!o.variant.empty()) c.model = variant_config(c.model, o.variant);
  apply_output_default(c);
  return c;
}

fs::path ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  body(out);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

void write_run_info(const RunConfig& c, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["report_schema"] = kReportSchemaVersion;
  j["model"] = nlohmann::json(c.model);
  j["seeds"] = c.seeds;
  j["split"] = {{"train_fraction", c.split.train_fraction},
                {"val_fraction", c.split.val_fraction},
                {"test_fraction", c.split.test_fraction},
                {"unit", c.split.unit == SplitUnit::Participant ? "participant" : "transcript"}};
  write_file(c.output_dir / "run_info.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

struct Resources {
  EmbeddingTable embeddings;
  LexiconSet lexicons;
  std::optional<PerceptronTagger> tagger;
  std::optional<std::vector<TaggedSentence>> pretagged;

  EncoderResources view(std::size_t seq_len) const {
    return {&embeddings, &lexicons, tagger ? &*tagger : nullptr, seq_len};
  }
};

Resources load_resources(const RunConfig& c, std::size_t embed_dim, std::ostream& log) {
  Resources r;
  r.embeddings = EmbeddingTable::load(c.embeddings);
  if (r.embeddings.dim() != embed_dim)
    throw Error(ErrorCode::DimensionMismatch, c.embeddings.string() + " has dimension " +
                                                  std::to_string(r.embeddings.dim()) + " but the model expects " +
                                                  std::to_string(embed_dim));
  r.lexicons = load_lexicons(c.lexicons);
  if (c.tagger.pretagged) {
    r.pretagged = read_tagged(*c.tagger.pretagged);
  } else if (c.tagger.model) {
    r.tagger = PerceptronTagger::load(*c.tagger.model);
  } else {
    PerceptronTagger::TrainOptions opts;
    opts.epochs = c.tagger.epochs;
    const auto gold = read_tagged(*c.tagger.training_corpus);
    r.tagger = PerceptronTagger::train(gold, opts);
    char buf[128];
    std::snprintf(buf, sizeof buf, "tagger: trained on %zu sentences, training accuracy %.4f\n", gold.size(),
                  tagging_accuracy(*r.tagger, gold));
    log << buf;
  }
  return r;
}

std::vector<EncodedInstance> encode_all(const RunConfig& c, std::ostream& log) {
  validate_inputs(c);
  const Corpus corpus = load_corpus(c.corpus_dir);
  const Resources r = load_resources(c, c.model.embed_dim, log);
  auto instances = encode_corpus(corpus, r.view(c.model.seq_len), r.pretagged ? &*r.pretagged : nullptr);
  log << "encoded " << instances.size() << " transcripts from " << c.corpus_dir.string() << '\n';
  return instances;
}

std::vector<EncodedInstance> gather(std::span<const EncodedInstance> all, const std::vector<std::size_t>& idx) {
  std::vector<EncodedInstance> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

ExperimentResult single_result(std::string name, std::uint64_t seed, const std::vector<double>& scores,
                               const std::vector<Label>& labels) {
  ExperimentResult r;
  r.variant = std::move(name);
  SeedRun run;
  run.seed = seed;
  run.test_scores = scores;
  run.test_labels = labels;
  run.report = evaluate(scores, labels);
  r.mean = run.report;
  r.runs.push_back(std::move(run));
  return r;
}

std::string variant_name(const ModelConfig& m) {
  for (std::string_view name : kVariantNames) {
    const ModelConfig v = variant_config(m, name);
    if (v.bidirectional == m.bidirectional && v.use_attention == m.use_attention &&
        v.use_targeted_features == m.use_targeted_features && v.use_class_weights == m.use_class_weights)
      return std::string(name);
  }
  return "custom";
}

int cmd_ingest(const std::string& dir, const Overrides& o, std::ostream& out) {
  const Corpus corpus = load_corpus(dir);
  RunConfig c;
  c.output_dir = o.output_dir;
  apply_output_default(c);
  ensure_dir(c.output_dir);
  write_file(c.output_dir / "manifest.jsonl", [&](std::ostream& f) { f << manifest_jsonl(corpus); });
  std::size_t warnings = 0, ad = 0;
  for (const auto& r : corpus.records) {
    warnings += r.warnings;
    ad += r.label == Label::AD;
  }
  out << "ingested " << corpus.records.size() << " transcripts (" << ad << " AD, " << corpus.records.size() - ad
      << " CT), " << warnings << " normalization warnings\n";
  out << "manifest: " << (c.output_dir / "manifest.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_stats(const std::string& dir, std::ostream& out) {
  const StatsReport s = corpus_stats(load_corpus(dir));
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %12s %12s %14s\n", "Group", "Participants", "Transcripts", "Median words");
  out << buf;
  for (const auto& [name, g] : {std::pair{"AD", s.ad}, std::pair{"CT", s.ct}, std::pair{"Total", s.total}}) {
    std::snprintf(buf, sizeof buf, "%-8s %12zu %12zu %14zu\n", name, g.participants, g.transcripts, g.median_words);
    out << buf;
  }
  return kExitOk;
}

int cmd_synth(const std::string& path, const Overrides& o, std::ostream& out) {
  RunConfig c = configure(path, o);
  const fs::path dir = c.corpus_dir.empty() ? c.output_dir / "corpus" : c.corpus_dir;
  const SynthCorpus synth = generate(c.synth);
  write_synth(c.synth, synth, dir);
  std::size_t ad = 0;
  for (const auto& r : synth.corpus.records) ad += r.label == Label::AD;
  out << "synth: wrote " << synth.corpus.records.size() << " transcripts (" << ad << " AD, "
      << synth.corpus.records.size() - ad << " CT) to " << dir.string() << '\n';
  return cmd_stats(dir.string(), out);
}

int cmd_train(const std::string& path, const Overrides& o, std::ostream& out) {
  const RunConfig c = configure(path, o);
  const auto instances = encode_all(c, out);
  ensure_dir(c.output_dir);
  const SplitIndices parts = split(instances, c.split);
  const auto train = gather(instances, parts.train), val = gather(instances, parts.val),
             test = gather(instances, parts.test);
  ModelConfig mc = c.model;
  mc.seed = c.seeds.front();
  out << "training " << variant_name(mc) << " on " << train.size() << " / validating on " << val.size()
      << " / testing on " << test.size() << '\n';
  const FitResult fitted = fit(mc, train, val);
  save_model(fitted.params, mc, c.output_dir / "model.adnm");
  write_file(c.output_dir / "training_log.csv", [&](std::ostream& f) { write_training_log(fitted.log, f); });

  std::vector<Label> labels;
  for (const auto& i : test) labels.push_back(i.label);
  const auto scores = predict(fitted.params, mc, test);
  const ExperimentResult r = single_result(variant_name(mc), mc.seed, scores, labels);
  write_file(c.output_dir / "metrics.csv", [&](std::ostream& f) { write_report_csv(std::span(&r, 1), f); });
  write_file(c.output_dir / "roc.csv", [&](std::ostream& f) { write_roc_csv(roc_curve(scores, labels), f); });
  write_run_info(c, "train");
  out << "best epoch " << fitted.best_epoch << " of " << fitted.log.size() << "; test metrics:\n";
  write_report_table(std::span(&r, 1), out);
  out << "model: " << (c.output_dir / "model.adnm").string() << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& path, const std::string& model_path, bool all, const Overrides& o,
             std::ostream& out) {
  RunConfig c = configure(path, o);
  const LoadedModel model = load_model(fs::path(model_path));
  c.model = model.config;
  const auto instances = encode_all(c, out);
  ensure_dir(c.output_dir);
  std::vector<EncodedInstance> subset;
  if (all) subset = instances;
  else subset = gather(instances, split(instances, c.split).test);
  std::vector<Label> labels;
  for (const auto& i : subset) labels.push_back(i.label);
  const auto scores = predict(model.params, model.config, subset);
  const ExperimentResult r = single_result(variant_name(model.config), c.split.seed, scores, labels);
  write_file(c.output_dir / "eval.csv", [&](std::ostream& f) { write_report_csv(std::span(&r, 1), f); });
  write_file(c.output_dir / "roc.csv", [&](std::ostream& f) { write_roc_csv(roc_curve(scores, labels), f); });
  out << "evaluated on " << subset.size() << (all ? " transcripts (full corpus)" : " test transcripts") << ":\n";
  write_report_table(std::span(&r, 1), out);
  return kExitOk;
}

int cmd_compare(const std::string& path, const Overrides& o, std::ostream& out) {
  const RunConfig c = configure(path, o);
  const auto instances = encode_all(c, out);
  ensure_dir(c.output_dir);
  const auto results = compare_variants(instances, c.model, c.split, c.seeds);
  write_file(c.output_dir / "compare.csv", [&](std::ostream& f) { write_report_csv(results, f); });
  write_file(c.output_dir / "compare_seeds.csv", [&](std::ostream& f) { write_seed_csv(results, f); });
  write_run_info(c, "compare");
  write_report_table(results, out);
  out << "reports: " << (c.output_dir / "compare.csv").string() << '\n';
  return kExitOk;
}

int cmd_ablate(const std::string& path, const Overrides& o, std::ostream& out) {
  const RunConfig c = configure(path, o);
  const auto instances = encode_all(c, out);
  ensure_dir(c.output_dir);
  const auto groups = default_ablation_groups();
  const auto results = ablate(instances, c.model, c.split, c.seeds, groups);
  write_file(c.output_dir / "ablation.csv", [&](std::ostream& f) { write_report_csv(results, f, true); });
  write_file(c.output_dir / "ablation_seeds.csv", [&](std::ostream& f) { write_seed_csv(results, f); });
  write_run_info(c, "ablate");
  write_report_table(results, out);
  out << "reports: " << (c.output_dir / "ablation.csv").string() << '\n';
  return kExitOk;
}

int cmd_predict(const std::string& path, const std::string& model_path, const std::string& transcript,
                const Overrides& o, std::ostream& out) {
  RunConfig c = configure(path, o);
  const LoadedModel model = load_model(fs::path(model_path));
  std::ifstream in(transcript, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + transcript);
  std::ostringstream ss;
  ss << in.rdbuf();
  // The label argument is a placeholder; prediction never reads it.
  const TranscriptRecord record = parse_chat_file(ss.str(), Label::CT, fs::path(transcript).stem().string());
  RunConfig inputs = c;
  inputs.tagger.pretagged.reset();
  if (!inputs.tagger.model && !inputs.tagger.training_corpus)
    throw Error(ErrorCode::BadConfig, "predict needs tagger.model or tagger.training_corpus");
  std::error_code ec;
  if (!fs::is_regular_file(inputs.embeddings, ec))
    throw Error(ErrorCode::Io, "embeddings not found: " + inputs.embeddings.string());
  std::stringstream quiet;
  const Resources r = load_resources(inputs, model.config.embed_dim, quiet);
  const EncodedInstance inst = encode(record, r.view(model.config.seq_len));
  const double p = predict_probability(model.params, model.config, inst);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s\tprobability %.6f\tlabel %s\n", record.transcript_id.c_str(), p,
                std::string(to_string(classify(p))).c_str());
  out << buf;
  return kExitOk;
}

int cmd_train_tagger(const std::string& path, const Overrides& o, std::ostream& out) {
  const RunConfig c = configure(path, o);
  if (!c.tagger.training_corpus) throw Error(ErrorCode::BadConfig, "tagger.training_corpus is not set");
  const auto gold = read_tagged(*c.tagger.training_corpus);
  PerceptronTagger::TrainOptions opts;
  opts.epochs = c.tagger.epochs;
  const PerceptronTagger tagger = PerceptronTagger::train(gold, opts);
  ensure_dir(c.output_dir);
  const fs::path dest = c.output_dir / "tagger.ptag";
  tagger.save(dest);
  char buf[160];
  std::snprintf(buf, sizeof buf, "tagger: %zu sentences, training accuracy %.4f (majority-tag baseline %.4f)\n",
                gold.size(), tagging_accuracy(tagger, gold), majority_tag_accuracy(gold));
  out << buf << "model: " << dest.string() << '\n';
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadConfig: return kExitUsage;
    case ErrorCode::Diverged: return kExitDiverged;
    default: return kExitData;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transcript-based dementia classifier: corpus tools, training and evaluation", "adnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "adnet 1.0");

  Overrides o;
  std::string dir, config, model, transcript;
  bool all = false;

  auto* ingest = app.add_subcommand("ingest", "Parse a corpus directory and write manifest.jsonl");
  ingest->add_option("dir", dir, "Corpus directory (ad/ and ct/, or labels.tsv)")->required();
  ingest->add_option("--output-dir", o.output_dir, "Directory for the manifest (overrides $ADNET_OUTPUT_DIR)");

  auto* stats = app.add_subcommand("stats", "Participant, transcript and median-length statistics per group");
  stats->add_option("dir", dir, "Corpus directory")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus into corpus_dir");
  synth->add_option("config", config, "Run config (JSON)")->required();
  add_common(synth, o, false);

  auto* train = app.add_subcommand("train", "Train one model on the first seed's split and save it");
  train->add_option("config", config, "Run config (JSON)")->required();
  add_common(train, o, true);
  train->add_option("--variant", o.variant, "One of the six architectures (overrides model flags)")
      ->check(CLI::IsMember(std::vector<std::string>(kVariantNames.begin(), kVariantNames.end())));

  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on the test split");
  eval->add_option("config", config, "Run config (JSON)")->required();
  eval->add_option("--model", model, "Model file written by train")->required();
  eval->add_flag("--all", all, "Evaluate on every transcript instead of the test split");
  add_common(eval, o, false);

  auto* compare = app.add_subcommand("compare", "Run the six-architecture comparison over all seeds");
  compare->add_option("config", config, "Run config (JSON)")->required();
  add_common(compare, o, true);

  auto* abl = app.add_subcommand("ablate", "Rerun OURS-Att-w without each targeted-feature group");
  abl->add_option("config", config, "Run config (JSON)")->required();
  add_common(abl, o, true);

  auto* pred = app.add_subcommand("predict", "Classify one CHAT transcript with a saved model");
  pred->add_option("config", config, "Run config (JSON) naming embeddings, lexicons and tagger")->required();
  pred->add_option("transcript", transcript, "CHAT file")->required();
  pred->add_option("--model", model, "Model file written by train")->required();

  auto* tagger = app.add_subcommand("train-tagger", "Train the part-of-speech tagger and save it");
  tagger->add_option("config", config, "Run config (JSON)")->required();
  add_common(tagger, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(dir, o, out);
    if (*stats) return cmd_stats(dir, out);
    if (*synth) return cmd_synth(config, o, out);
    if (*train) return cmd_train(config, o, out);
    if (*eval) return cmd_eval(config, model, all, o, out);
    if (*compare) return cmd_compare(config, o, out);
    if (*abl) return cmd_ablate(config, o, out);
    if (*pred) return cmd_predict(config, model, transcript, o, out);
    if (*tagger) return cmd_train_tagger(config, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace adnet
