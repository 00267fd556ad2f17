#pragma once

// The bowaudit command line. run_command is the whole program; main() only
// forwards to it, so tests can drive the CLI in-process.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bowaudit/config.hpp"
#include "bowaudit/corpus.hpp"
#include "bowaudit/diagnostics.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/eval.hpp"
#include "bowaudit/report.hpp"
#include "bowaudit/stability.hpp"
#include "bowaudit/stemmer.hpp"
#include "bowaudit/stopwords.hpp"
#include "bowaudit/version.hpp"

namespace bowaudit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

namespace cli {

// Flag values; unset flags leave the config file's values alone.
struct Overrides {
  std::string config_path;
  std::optional<std::string> labeled;
  std::optional<std::string> unlabeled;
  std::optional<std::string> stopwords;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> seeds;
  std::optional<double> fraction;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  bool stratified = false;
  bool progress = false;
  std::vector<std::string> presets;  // ablate
  std::string metric = "positive_precision";  // ablate boxplot
};

inline AuditConfig resolve_config(const Overrides& o) {
  AuditConfig c = o.config_path.empty() ? AuditConfig{} : load_audit_config(o.config_path);
  if (o.labeled) c.labeled = labeled_source(*o.labeled);
  if (o.unlabeled) c.unlabeled = unlabeled_source(*o.unlabeled);
  if (o.stopwords) c.stopwords_path = *o.stopwords;
  if (o.preset) c.pipeline = preset(*o.preset);
  if (o.seed) c.seed = *o.seed;
  if (o.seeds) c.seeds = parse_seed_range(*o.seeds);
  if (o.fraction) c.train_fraction = *o.fraction;
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.out_dir = *o.out;
  if (o.stratified) c.stratified = true;
  c.validate();
  return c;
}

inline StopwordList stopwords_for(const AuditConfig& c) {
  return c.stopwords_path ? load_stopwords(*c.stopwords_path) : default_stopwords();
}

inline Corpus load_labeled(const AuditConfig& c) {
  Corpus corpus = load_corpus(c.labeled->path, c.labeled->format, c.labeled->schema);
  if (!corpus.labeled) throw DataError("'" + c.labeled->path + "' is not fully labeled");
  return corpus;
}

inline Corpus load_unlabeled(const AuditConfig& c) {
  return load_corpus(c.unlabeled->path, c.unlabeled->format, c.unlabeled->schema);
}

inline MetricSelector parse_metric(const std::string& name) {
  for (Label cls : {Label::positive, Label::negative}) {
    for (MetricKind kind : kMetricKinds) {
      const MetricSelector s{kind, cls};
      if (s.name() == name) return s;
    }
  }
  throw ConfigError("unknown metric '" + name + "' (e.g. positive_precision, negative_f1)");
}

inline ProgressFn progress_printer(bool on, std::ostream& err, std::string label) {
  if (!on) return {};
  return [&err, label = std::move(label)](std::size_t done, std::size_t total) {
    err << label << "seed " << done << '/' << total << '\n';
  };
}

// ---- subcommands -----------------------------------------------------------

inline int cmd_run(const AuditConfig& c, std::ostream& out) {
  check_paths(c, true, false);
  const auto dir = ensure_dir(c.out_dir);
  const Corpus corpus = load_labeled(c);
  const StopwordList stopwords = stopwords_for(c);
  const PreparedData data = prepare(corpus, c.pipeline, stopwords, c.count_mode);
  const TrainedRun run = evaluate_split_with_model(data, c.gbt, c.split_spec());

  ojson payload;
  payload["preset"] = c.preset_name();
  payload["result"] = to_json(run.result);
  ojson top = ojson::array();
  for (const auto& t : top_terms(run.model, data.vocabulary, 10)) {
    top.push_back({{"term", t.term}, {"importance", t.importance}});
  }
  payload["top_terms"] = std::move(top);
  payload["zero_feature"] = to_json(zero_feature_audit(run.model, data.matrix));
  payload["warning"] = kVocabularyLeakWarning;

  std::ostringstream doc;
  write_json_report(doc, c, payload);
  write_file(dir / "run.json", [&](std::ostream& f) { f << doc.str(); });
  write_file(dir / "model.json", [&](std::ostream& f) {
    ojson m = provenance_json(c);
    m["model"] = to_json(run.model);
    f << m.dump() << '\n';
  });
  out << doc.str();
  return kExitOk;
}

inline int cmd_sweep(const AuditConfig& c, bool progress, std::ostream& out, std::ostream& err) {
  check_paths(c, true, false);
  const auto dir = ensure_dir(c.out_dir);
  const Corpus corpus = load_labeled(c);
  const StopwordList stopwords = stopwords_for(c);
  const SweepConfig sweep_cfg = c.sweep_config();
  const PreparedData data = prepare(corpus, c.pipeline, stopwords, c.count_mode);
  const SweepResult sweep = run_sweep_prepared(data, sweep_cfg, progress_printer(progress, err, ""));
  const Aggregate agg = aggregate_sweep(sweep);

  ojson payload;
  payload["preset"] = sweep_cfg.preset_name;
  payload["summary"] = to_json(agg);
  const MetricSelector pos_precision{MetricKind::precision, Label::positive};
  if (agg.at(pos_precision).defined >= 5) payload["boxplot"] = to_json(boxplot_stats(sweep, pos_precision));
  payload["warning"] = kVocabularyLeakWarning;

  std::ostringstream summary;
  write_json_report(summary, c, payload);
  write_file(dir / "sweep.jsonl", [&](std::ostream& f) { write_sweep_jsonl(f, c, sweep); });
  write_file(dir / "summary.json", [&](std::ostream& f) { f << summary.str(); });
  write_file(dir / "summary.md",
             [&](std::ostream& f) { write_sweep_markdown(f, c, sweep_cfg.preset_name, agg); });
  out << summary.str();
  return kExitOk;
}

inline int cmd_ablate(const AuditConfig& c, const Overrides& o, std::ostream& out, std::ostream& err) {
  check_paths(c, true, false);
  const MetricSelector metric = parse_metric(o.metric);
  std::vector<NamedPipeline> presets;
  if (o.presets.empty()) {
    presets = standard_presets();
  } else {
    for (const auto& name : o.presets) presets.push_back({name, preset(name)});
  }
  const auto dir = ensure_dir(c.out_dir);
  const auto sweep_dir = ensure_dir((dir / "ablate").string());
  const Corpus corpus = load_labeled(c);
  const StopwordList stopwords = stopwords_for(c);

  std::vector<AblationResult> results;
  for (const auto& p : presets) {
    SweepConfig cfg = c.sweep_config();
    cfg.pipeline = p.config;
    cfg.preset_name = p.name;
    const PreparedData data = prepare(corpus, p.config, stopwords, c.count_mode);
    SweepResult sweep = run_sweep_prepared(data, cfg, progress_printer(o.progress, err, p.name + ": "));
    Aggregate agg = aggregate_sweep(sweep);
    results.push_back({p.name, std::move(sweep), std::move(agg)});
  }

  std::vector<BoxplotRow> rows;
  ojson summaries = ojson::object();
  for (const auto& r : results) {
    AuditConfig per = c;
    per.pipeline = r.sweep.config.pipeline;
    write_file(sweep_dir / (r.name + ".jsonl"), [&](std::ostream& f) { write_sweep_jsonl(f, per, r.sweep); });
    ojson s = {{"pipeline", to_json(r.sweep.config.pipeline)}, {"summary", to_json(r.aggregate)}};
    if (r.aggregate.at(metric).defined >= 5) {
      rows.push_back({r.name, metric.name(), boxplot_stats(r.sweep, metric)});
      s["boxplot"] = to_json(rows.back().stats);
    } else {
      s["boxplot"] = nullptr;
      err << "warning: " << r.name << ": fewer than 5 defined " << metric.name()
          << " values, no boxplot row\n";
    }
    summaries[r.name] = std::move(s);
  }

  write_file(dir / "ablation_summary.json", [&](std::ostream& f) {
    write_json_report(f, c, {{"metric", metric.name()}, {"presets", summaries}, {"warning", kVocabularyLeakWarning}});
  });
  write_file(dir / "boxplot.csv", [&](std::ostream& f) { write_boxplot_csv(f, c, rows); });
  std::ostringstream md;
  write_ablation_markdown(md, c, results);
  write_file(dir / "ablation.md", [&](std::ostream& f) { f << md.str(); });
  out << md.str();
  return kExitOk;
}

inline DictionaryRow dictionary_row(const std::string& name, const Vocabulary& vocab,
                                    const DocTermMatrix& dtm) {
  DictionaryRow row;
  row.preset = name;
  row.before = vocab.dict_size_before();
  if (vocab.min_df_fraction()) {
    const auto h = sparsity_histogram(dtm);
    row.after = vocab.dict_size_after();
    row.zero_terms_fraction = h.fraction(0);
    row.one_term_fraction = h.fraction(1);
  }
  return row;
}

inline int cmd_sparsity(const AuditConfig& c, std::ostream& out) {
  check_paths(c, true, false);
  const auto dir = ensure_dir(c.out_dir);
  const Corpus labeled = load_labeled(c);
  const StopwordList stopwords = stopwords_for(c);

  const ProcessedCorpus processed = apply_pipeline(labeled, c.pipeline, stopwords);
  const Vocabulary vocab = build_vocabulary(processed);
  const DocTermMatrix dtm = vectorize(processed, vocab, c.count_mode);
  const SparsityReport report = sparsity_report(processed, vocab, dtm, c.sparsity_count);

  ojson payload;
  payload["preset"] = c.preset_name();
  payload["corpus_stats"] = to_json(corpus_stats(labeled));
  payload["labeled"] = to_json(report);
  try {
    payload["heaps"] = to_json(heaps_fit(processed, c.heaps_shuffle_seed));
  } catch (const DataError& e) {
    payload["heaps"] = {{"error", e.what()}};
  }

  std::optional<SparsityHistogram> unlabeled_hist;
  if (c.unlabeled) {
    const Corpus unlabeled = load_unlabeled(c);
    const ProcessedCorpus up = apply_pipeline(unlabeled, c.pipeline, stopwords);
    const DocTermMatrix udtm = vectorize(up, vocab, c.count_mode);
    unlabeled_hist = sparsity_histogram(udtm, c.sparsity_count);
    payload["unlabeled"] = {{"corpus_stats", to_json(corpus_stats(unlabeled))},
                            {"histogram", to_json(*unlabeled_hist)}};
  }

  std::vector<DictionaryRow> dict_rows;
  for (const auto& p : standard_presets()) {
    const ProcessedCorpus pp = apply_pipeline(labeled, p.config, stopwords);
    const Vocabulary pv = build_vocabulary(pp);
    dict_rows.push_back(dictionary_row(p.name, pv, vectorize(pp, pv, c.count_mode)));
  }
  ojson dict = ojson::array();
  for (const auto& r : dict_rows) {
    dict.push_back({{"preset", r.preset},
                    {"dict_size_before", r.before},
                    {"dict_size_after", r.after ? ojson(*r.after) : ojson(nullptr)},
                    {"fraction_0_terms", r.zero_terms_fraction ? ojson(*r.zero_terms_fraction) : ojson(nullptr)},
                    {"fraction_1_term", r.one_term_fraction ? ojson(*r.one_term_fraction) : ojson(nullptr)}});
  }
  payload["dictionary_sizes"] = std::move(dict);

  write_file(dir / "sparsity.json", [&](std::ostream& f) { write_json_report(f, c, payload); });
  write_file(dir / "histogram_labeled.csv",
             [&](std::ostream& f) { write_histogram_csv(f, c, report.histogram); });
  if (unlabeled_hist) {
    write_file(dir / "histogram_unlabeled.csv",
               [&](std::ostream& f) { write_histogram_csv(f, c, *unlabeled_hist); });
  }
  write_file(dir / "dictionary_sizes.csv", [&](std::ostream& f) { write_dictionary_csv(f, c, dict_rows); });

  std::ostringstream md;
  write_markdown_preamble(md, c);
  md << "# Sparsity: " << c.preset_name() << "\n\n";
  md << "Dictionary " << report.dict_size_before << " -> ";
  md << (report.rare_terms_removed ? std::to_string(report.dict_size_after) : std::string("NA"));
  md << " terms; " << format_fixed(100.0 * report.tokens.fraction, 1) << "% of "
     << report.tokens.before << " tokens removed.\n\n";
  write_histogram_markdown(md, "labeled", report.histogram);
  if (unlabeled_hist) {
    md << '\n';
    write_histogram_markdown(md, "unlabeled", *unlabeled_hist);
  }
  md << "\n| preset | before | after | 0 terms | 1 term |\n|---|---|---|---|---|\n";
  for (const auto& r : dict_rows) {
    auto pct = [](const std::optional<double>& v) {
      return v ? format_fixed(100.0 * *v, 1) + "%" : std::string("NA");
    };
    md << "| " << r.preset << " | " << r.before << " | "
       << (r.after ? std::to_string(*r.after) : std::string("NA")) << " | "
       << pct(r.zero_terms_fraction) << " | " << pct(r.one_term_fraction) << " |\n";
  }
  write_file(dir / "sparsity.md", [&](std::ostream& f) { f << md.str(); });
  out << md.str();
  return kExitOk;
}

inline int cmd_label(const AuditConfig& c, std::ostream& out, std::ostream& err) {
  check_paths(c, true, true);
  const auto dir = ensure_dir(c.out_dir);
  const Corpus labeled = load_labeled(c);
  const Corpus unlabeled = load_unlabeled(c);
  const StopwordList stopwords = stopwords_for(c);

  const PreparedData data = prepare(labeled, c.pipeline, stopwords, c.count_mode);
  const GbtModel model = train_gbt(data.matrix, data.labels, c.gbt);
  const ProcessedCorpus up = apply_pipeline(unlabeled, c.pipeline, stopwords);
  const DocTermMatrix udtm = vectorize(up, data.vocabulary, c.count_mode);

  std::vector<Label> predicted;
  std::vector<double> probs;
  predicted.reserve(udtm.n_docs());
  probs.reserve(udtm.n_docs());
  for (const auto& row : udtm.rows) {
    probs.push_back(predict_prob(model, row));
    predicted.push_back(predict_label(model, row));
  }
  const ZeroFeatureAudit audit = zero_feature_audit(model, udtm);

  ojson payload;
  payload["preset"] = c.preset_name();
  payload["n_documents"] = udtm.n_docs();
  std::size_t n_pos = 0;
  for (auto l : predicted) n_pos += l == Label::positive ? 1 : 0;
  payload["n_positive"] = n_pos;
  payload["zero_feature"] = to_json(audit);
  std::optional<std::vector<GroupRate>> rates;
  if (unlabeled.has_groups()) {
    rates = group_positive_rate(unlabeled, predicted);
    payload["group_rates"] = to_json(*rates);
  } else {
    payload["group_rates"] = nullptr;
  }
  ojson top = ojson::array();
  for (const auto& t : top_terms(model, data.vocabulary, 10)) {
    top.push_back({{"term", t.term}, {"importance", t.importance}});
  }
  payload["top_terms"] = std::move(top);

  std::ostringstream doc;
  write_json_report(doc, c, payload);
  write_file(dir / "label.json", [&](std::ostream& f) { f << doc.str(); });
  write_file(dir / "labels.csv", [&](std::ostream& f) {
    write_csv_preamble(f, c);
    csv::write_row(f, {"id", "group", "label", "prob", "zero_features"});
    for (std::size_t i = 0; i < unlabeled.size(); ++i) {
      const auto& d = unlabeled.documents[i];
      csv::write_row(f, {d.id, d.group.value_or(""), std::string(to_string(predicted[i])),
                         format_double(probs[i]), udtm.rows[i].empty() ? "1" : "0"});
    }
  });
  if (rates) write_file(dir / "group_rates.csv", [&](std::ostream& f) { write_group_rates_csv(f, c, *rates); });
  if (audit.warn()) err << "warning: " << zero_feature_warning(audit) << '\n';
  out << doc.str();
  return kExitOk;
}

// One output line per input line, each whitespace-separated token stemmed.
inline int cmd_stem(std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    const auto toks = text::split_whitespace(line);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i) out << ' ';
      out << stem_token(toks[i]);
    }
    out << '\n';
  }
  return kExitOk;
}

}  // namespace cli

inline int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                       std::istream& in = std::cin) {
  CLI::App app{"Stability and data-quality audits for small bag-of-words text classifiers",
               kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  cli::Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file (flags override it)");
    sub->add_option("--labeled", o.labeled, "labeled corpus (csv or jsonl)");
    sub->add_option("--unlabeled", o.unlabeled, "unlabeled corpus (csv or jsonl)");
    sub->add_option("--stopwords", o.stopwords, "stopword file (default: built-in English list)");
    sub->add_option("--preset", o.preset, "pipeline preset")
        ->check(CLI::IsMember(std::vector<std::string>(kPresetNames.begin(), kPresetNames.end())));
    sub->add_option("--out", o.out, "output directory");
  };
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("--fraction", o.fraction, "train fraction in (0, 1)");
    sub->add_flag("--stratified", o.stratified, "class-stratified splits");
  };
  auto add_sweep = [&](CLI::App* sub) {
    sub->add_option("--seeds", o.seeds, "seed range A..B (inclusive)");
    sub->add_option("--workers", o.workers, "worker threads (0: all cores)");
    sub->add_flag("--progress", o.progress, "print a per-seed counter to stderr");
  };

  auto* run = app.add_subcommand("run", "single seeded train/test evaluation");
  add_common(run);
  add_eval(run);
  run->add_option("--seed", o.seed, "split seed");

  auto* sweep = app.add_subcommand("sweep", "evaluate every seed in a range and summarize");
  add_common(sweep);
  add_eval(sweep);
  add_sweep(sweep);

  auto* ablate = app.add_subcommand("ablate", "seed sweep for each pipeline preset");
  add_common(ablate);
  add_eval(ablate);
  add_sweep(ablate);
  ablate->add_option("--presets", o.presets, "presets to run (default: all seven)")
      ->delimiter(',')
      ->check(CLI::IsMember(std::vector<std::string>(kPresetNames.begin(), kPresetNames.end())));
  ablate->add_option("--metric", o.metric, "boxplot metric, e.g. positive_precision");

  auto* sparsity = app.add_subcommand("sparsity", "sparsity histograms, dictionary sizes, Heaps fit");
  add_common(sparsity);

  auto* label = app.add_subcommand("label", "train on the labeled set and label the unlabeled set");
  add_common(label);

  auto* stem = app.add_subcommand("stem", "stem whitespace-separated tokens read from stdin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (stem->parsed()) return cli::cmd_stem(in, out);
    const AuditConfig config = cli::resolve_config(o);
    if (run->parsed()) return cli::cmd_run(config, out);
    if (sweep->parsed()) return cli::cmd_sweep(config, o.progress, out, err);
    if (ablate->parsed()) return cli::cmd_ablate(config, o, out, err);
    if (sparsity->parsed()) return cli::cmd_sparsity(config, out);
    if (label->parsed()) return cli::cmd_label(config, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace bowaudit
