#pragma once

// Serialization of results to JSON, JSON lines, CSV and a markdown summary.
// Every document starts with the tool name, version and the resolved config.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "bowaudit/config.hpp"
#include "bowaudit/csv.hpp"
#include "bowaudit/diagnostics.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/eval.hpp"
#include "bowaudit/stability.hpp"
#include "bowaudit/version.hpp"

namespace bowaudit {

// Shortest decimal that reads back as the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline ojson metric_json(const Metric& m) { return m ? ojson(*m) : ojson(nullptr); }

inline ojson provenance_json(const AuditConfig& config) {
  return {{"tool", std::string(kToolName)},
          {"version", std::string(kToolVersion)},
          {"config", to_json(config)}};
}

// ---- results ---------------------------------------------------------------

inline ojson to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
}

inline ojson to_json(const ClassMetrics& m, std::size_t support) {
  return {{"precision", metric_json(m.precision)},
          {"recall", metric_json(m.recall)},
          {"f1", metric_json(m.f1)},
          {"support", support}};
}

inline ojson to_json(const EvalResult& r) {
  return {{"seed", r.seed},
          {"confusion", to_json(r.confusion)},
          {"positive", to_json(r.metrics.positive, r.support_positive)},
          {"negative", to_json(r.metrics.negative, r.support_negative)}};
}

inline ojson to_json(const Summary& s) {
  return {{"mean", s.mean}, {"sd", s.sd},   {"median", s.median}, {"q1", s.q1},
          {"q3", s.q3},     {"min", s.min}, {"max", s.max}};
}

inline ojson to_json(const MetricAggregate& m) {
  ojson j = {{"defined", m.defined}, {"undefined", m.undefined}};
  j["summary"] = m.summary ? to_json(*m.summary) : ojson(nullptr);
  return j;
}

inline ojson to_json(const Aggregate& a) {
  ojson metrics = ojson::object();
  for (Label cls : {Label::positive, Label::negative}) {
    for (MetricKind kind : kMetricKinds) {
      const MetricSelector sel{kind, cls};
      metrics[sel.name()] = to_json(a.at(sel));
    }
  }
  return {{"runs", a.runs},
          {"reference_precision", a.reference ? ojson(*a.reference) : ojson(nullptr)},
          {"count_ge_reference", a.count_ge_reference ? ojson(*a.count_ge_reference) : ojson(nullptr)},
          {"metrics", std::move(metrics)}};
}

inline ojson to_json(const BoxplotStats& b) {
  return {{"n", b.n},
          {"undefined", b.undefined},
          {"min", b.min},
          {"q1", b.q1},
          {"median", b.median},
          {"q3", b.q3},
          {"max", b.max},
          {"lower_fence", b.lower_fence},
          {"upper_fence", b.upper_fence},
          {"lower_whisker", b.lower_whisker},
          {"upper_whisker", b.upper_whisker},
          {"outliers", b.outliers}};
}

inline ojson to_json(const SparsityHistogram& h) {
  ojson buckets = ojson::array();
  for (const auto& b : h.buckets) buckets.push_back({{"n", b.n}, {"count", b.count}, {"fraction", b.fraction}});
  return {{"n_docs", h.n_docs}, {"mode", std::string(to_string(h.mode))}, {"buckets", std::move(buckets)}};
}

inline ojson to_json(const TokenReduction& t) {
  return {{"before", t.before}, {"after", t.after}, {"fraction", t.fraction}};
}

inline ojson to_json(const SparsityReport& r) {
  return {{"dict_size_before", r.dict_size_before},
          {"dict_size_after", r.rare_terms_removed ? ojson(r.dict_size_after) : ojson(nullptr)},
          {"tokens", to_json(r.tokens)},
          {"histogram", to_json(r.histogram)}};
}

inline ojson to_json(const HeapsFit& f) {
  ojson curve = ojson::array();
  for (const auto& p : f.curve) curve.push_back({p.tokens, p.types});
  return {{"K", f.K},
          {"beta", f.beta},
          {"r_squared", f.r_squared},
          {"total_tokens", f.total_tokens},
          {"curve", std::move(curve)}};
}

inline ojson to_json(const ZeroFeatureAudit& a) {
  return {{"zero_row_count", a.zero_row_count},
          {"zero_row_fraction", a.zero_row_fraction},
          {"predicted_label_for_zero_row", std::string(to_string(a.predicted_label))},
          {"prob_for_zero_row", a.prob},
          {"warning", a.warn() ? ojson(zero_feature_warning(a)) : ojson(nullptr)}};
}

inline ojson to_json(const std::vector<GroupRate>& rates) {
  ojson out = ojson::array();
  for (const auto& r : rates) {
    out.push_back({{"group", r.group}, {"count", r.count}, {"positive", r.positive}, {"fraction", r.fraction}});
  }
  return out;
}

inline ojson to_json(const CorpusStats& s) {
  return {{"n_docs", s.n_docs},
          {"n_positive", s.n_positive},
          {"n_negative", s.n_negative},
          {"n_unlabeled", s.n_unlabeled},
          {"mean_length", s.mean_length},
          {"sd_length", s.sd_defined ? ojson(s.sd_length) : ojson(nullptr)}};
}

// ---- writers ---------------------------------------------------------------

// JSON report: provenance fields first, then the payload's fields.
inline void write_json_report(std::ostream& out, const AuditConfig& config, const ojson& payload) {
  ojson doc = provenance_json(config);
  for (auto it = payload.begin(); it != payload.end(); ++it) doc[it.key()] = it.value();
  out << doc.dump(2) << '\n';
}

// JSON lines: a provenance header object, then one EvalResult per line.
inline void write_sweep_jsonl(std::ostream& out, const AuditConfig& config, const SweepResult& sweep) {
  ojson header = provenance_json(config);
  header["record"] = "header";
  header["preset"] = sweep.config.preset_name;
  header["warning"] = kVocabularyLeakWarning;
  out << header.dump() << '\n';
  for (const auto& r : sweep.runs) out << to_json(r).dump() << '\n';
}

// CSV files carry the provenance as leading '#' comment lines.
inline void write_csv_preamble(std::ostream& out, const AuditConfig& config) {
  out << "# " << kToolName << ' ' << kToolVersion << '\n';
  out << "# config: " << to_json(config).dump() << '\n';
}

inline void write_histogram_csv(std::ostream& out, const AuditConfig& config,
                                const SparsityHistogram& h) {
  write_csv_preamble(out, config);
  csv::write_row(out, {"n", "count", "fraction"});
  for (const auto& b : h.buckets) {
    csv::write_row(out, {std::to_string(b.n), std::to_string(b.count), format_double(b.fraction)});
  }
}

inline std::string join_doubles(const std::vector<double>& xs, char sep = ' ') {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += format_double(xs[i]);
  }
  return s;
}

struct BoxplotRow {
  std::string preset;
  std::string metric;
  BoxplotStats stats;
};

inline void write_boxplot_csv(std::ostream& out, const AuditConfig& config,
                              const std::vector<BoxplotRow>& rows) {
  write_csv_preamble(out, config);
  csv::write_row(out, {"preset", "metric", "min", "q1", "median", "q3", "max", "lower_whisker",
                       "upper_whisker", "n", "undefined", "outliers"});
  for (const auto& r : rows) {
    const auto& b = r.stats;
    csv::write_row(out, {r.preset, r.metric, format_double(b.min), format_double(b.q1),
                         format_double(b.median), format_double(b.q3), format_double(b.max),
                         format_double(b.lower_whisker), format_double(b.upper_whisker),
                         std::to_string(b.n), std::to_string(b.undefined), join_doubles(b.outliers)});
  }
}

struct DictionaryRow {
  std::string preset;
  std::size_t before = 0;
  std::optional<std::size_t> after;  // absent without rare-term removal
  std::optional<double> zero_terms_fraction;
  std::optional<double> one_term_fraction;
};

inline void write_dictionary_csv(std::ostream& out, const AuditConfig& config,
                                 const std::vector<DictionaryRow>& rows) {
  write_csv_preamble(out, config);
  csv::write_row(out, {"preset", "dict_size_before", "dict_size_after", "fraction_0_terms",
                       "fraction_1_term"});
  auto na = [](const auto& v) -> std::string {
    if (!v) return "NA";
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>) return format_double(*v);
    else return std::to_string(*v);
  };
  for (const auto& r : rows) {
    csv::write_row(out, {r.preset, std::to_string(r.before), na(r.after), na(r.zero_terms_fraction),
                         na(r.one_term_fraction)});
  }
}

inline void write_group_rates_csv(std::ostream& out, const AuditConfig& config,
                                  const std::vector<GroupRate>& rates) {
  write_csv_preamble(out, config);
  csv::write_row(out, {"group", "count", "positive", "fraction"});
  for (const auto& r : rates) {
    csv::write_row(out, {r.group, std::to_string(r.count), std::to_string(r.positive),
                         format_double(r.fraction)});
  }
}

// ---- markdown --------------------------------------------------------------

inline void write_markdown_preamble(std::ostream& out, const AuditConfig& config) {
  out << "<!-- " << kToolName << ' ' << kToolVersion << " config: " << to_json(config).dump()
      << " -->\n\n";
}

inline std::string mean_sd_cell(const MetricAggregate& m) {
  if (!m.summary) return "undefined";
  std::string cell = format_fixed(m.summary->mean, 2) + " (" + format_fixed(m.summary->sd, 2) + ")";
  if (m.undefined) cell += " [" + std::to_string(m.undefined) + " undefined]";
  return cell;
}

// Rows "Precision (sd)", "Recall (sd)", "F1-score (sd)"; columns per class.
inline void write_table1_markdown(std::ostream& out, const Aggregate& a) {
  out << "| | Positive | Negative |\n|---|---|---|\n";
  const std::pair<MetricKind, const char*> rows[] = {{MetricKind::precision, "Precision (sd)"},
                                                     {MetricKind::recall, "Recall (sd)"},
                                                     {MetricKind::f1, "F1-score (sd)"}};
  for (const auto& [kind, title] : rows) {
    out << "| " << title << " | " << mean_sd_cell(a.at({kind, Label::positive})) << " | "
        << mean_sd_cell(a.at({kind, Label::negative})) << " |\n";
  }
}

inline void write_sweep_markdown(std::ostream& out, const AuditConfig& config, const std::string& preset,
                                 const Aggregate& a) {
  write_markdown_preamble(out, config);
  out << "# Seed sweep: " << preset << "\n\n";
  out << a.runs << " runs, seeds " << to_string(config.seeds) << ".\n\n";
  write_table1_markdown(out, a);
  const auto& p = a.at({MetricKind::precision, Label::positive});
  if (p.summary) {
    out << "\nPositive precision: median " << format_fixed(p.summary->median, 2) << ", range "
        << format_fixed(p.summary->min, 2) << " to " << format_fixed(p.summary->max, 2) << ".\n";
  }
  if (a.reference && a.count_ge_reference) {
    out << "Seeds reaching the reference precision " << format_fixed(*a.reference, 3) << ": "
        << *a.count_ge_reference << " of " << a.runs << ".\n";
  }
  out << "\nWarning: " << kVocabularyLeakWarning << ".\n";
}

inline void write_ablation_markdown(std::ostream& out, const AuditConfig& config,
                                    const std::vector<AblationResult>& results) {
  write_markdown_preamble(out, config);
  out << "# Preprocessing ablations\n\n";
  out << "| preset | precision mean (sd) | median | min | max | undefined |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& r : results) {
    const auto& p = r.aggregate.at({MetricKind::precision, Label::positive});
    out << "| " << r.name << " | " << mean_sd_cell(p) << " | ";
    if (p.summary) {
      out << format_fixed(p.summary->median, 2) << " | " << format_fixed(p.summary->min, 2) << " | "
          << format_fixed(p.summary->max, 2);
    } else {
      out << "NA | NA | NA";
    }
    out << " | " << p.undefined << " |\n";
  }
}

inline void write_histogram_markdown(std::ostream& out, const std::string& title,
                                     const SparsityHistogram& h) {
  out << "| " << title;
  for (const auto& b : h.buckets) out << " | " << b.n;
  out << " |\n|---";
  for (std::size_t i = 0; i < h.buckets.size(); ++i) out << "|---";
  out << "|\n| count (%)";
  for (const auto& b : h.buckets) out << " | " << b.count << " (" << format_fixed(100.0 * b.fraction, 1) << "%)";
  out << " |\n";
}

// ---- files -----------------------------------------------------------------

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw DataError("cannot create output directory '" + dir + "'");
  }
  return dir;
}

// Writes via `fn(stream)`; throws DataError when the file cannot be written.
template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  fn(out);
  out.flush();
  if (!out) throw DataError("error while writing '" + path.string() + "'");
}

}  // namespace bowaudit
