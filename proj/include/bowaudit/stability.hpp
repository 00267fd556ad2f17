#pragma once

// Multi-seed sweeps, preprocessing ablations and distributional summaries.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bowaudit/corpus.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/eval.hpp"
#include "bowaudit/gbt.hpp"
#include "bowaudit/preprocess.hpp"
#include "bowaudit/stats.hpp"
#include "bowaudit/stopwords.hpp"

namespace bowaudit {

inline constexpr double kReferencePrecision = 0.867;

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1000;  // inclusive

  std::size_t size() const { return static_cast<std::size_t>(last - first + 1); }
  friend bool operator==(const SeedRange&, const SeedRange&) = default;
};

// "A..B" (inclusive) or a single integer.
inline SeedRange parse_seed_range(const std::string& s) {
  auto parse_u64 = [&](const std::string& part) -> std::uint64_t {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("invalid seed range '" + s + "'");
    try {
      return std::stoull(part);
    } catch (const std::exception&) {
      throw ConfigError("invalid seed range '" + s + "'");
    }
  };
  SeedRange r;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    r.first = parse_u64(s.substr(0, dots));
    r.last = parse_u64(s.substr(dots + 2));
  } else {
    r.first = r.last = parse_u64(s);
  }
  if (r.last < r.first) throw ConfigError("empty seed range '" + s + "'");
  return r;
}

inline std::string to_string(const SeedRange& r) {
  return std::to_string(r.first) + ".." + std::to_string(r.last);
}

struct SweepConfig {
  SeedRange seeds;
  std::string preset_name = "aw-baseline";  // label only; `pipeline` is authoritative
  PipelineConfig pipeline;
  GbtParams gbt;
  double train_fraction = 0.7;
  bool stratified = false;
  std::optional<double> reference_precision = kReferencePrecision;
  unsigned workers = 0;  // 0: hardware concurrency

  void validate() const {
    if (seeds.last < seeds.first) throw ConfigError("empty seed range");
    pipeline.validate();
    gbt.validate();
    SplitSpec{0, train_fraction, stratified}.validate();
  }

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct SweepResult {
  std::vector<EvalResult> runs;  // ascending seed
  SweepConfig config;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

namespace detail {

inline unsigned resolve_workers(unsigned requested, std::size_t jobs) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

}  // namespace detail

// Seeds are independent jobs. Workers pull the next seed index from a shared
// counter and write into a pre-sized slot, so results come back in seed
// order whatever the scheduling. A failing seed aborts the sweep; the lowest
// failing seed is reported.
inline SweepResult run_sweep_prepared(const PreparedData& data, const SweepConfig& sweep,
                                      const ProgressFn& progress = {}) {
  sweep.validate();
  const std::size_t total = sweep.seeds.size();
  SweepResult result;
  result.config = sweep;
  result.runs.resize(total);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::map<std::uint64_t, std::string> errors;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total || failed.load()) return;
      const std::uint64_t seed = sweep.seeds.first + i;
      try {
        result.runs[i] =
            evaluate_split(data, sweep.gbt, SplitSpec{seed, sweep.train_fraction, sweep.stratified});
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        errors.emplace(seed, e.what());
        failed = true;
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(mu);
        progress(d, total);
      }
    }
  };

  const unsigned n_workers = detail::resolve_workers(sweep.workers, total);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (!errors.empty()) {
    const auto& [seed, what] = *errors.begin();
    throw DataError("sweep failed at seed " + std::to_string(seed) + ": " + what);
  }
  return result;
}

inline SweepResult run_sweep(const Corpus& corpus, const SweepConfig& sweep,
                             const StopwordList& stopwords = default_stopwords(),
                             const ProgressFn& progress = {}) {
  sweep.validate();
  return run_sweep_prepared(prepare(corpus, sweep.pipeline, stopwords), sweep, progress);
}

// ---- aggregation -----------------------------------------------------------

enum class MetricKind { precision, recall, f1 };

inline constexpr std::array<MetricKind, 3> kMetricKinds{MetricKind::precision, MetricKind::recall,
                                                        MetricKind::f1};

inline std::string_view to_string(MetricKind m) {
  switch (m) {
    case MetricKind::precision: return "precision";
    case MetricKind::recall: return "recall";
    case MetricKind::f1: return "f1";
  }
  return "";
}

struct MetricSelector {
  MetricKind metric = MetricKind::precision;
  Label cls = Label::positive;

  Metric pick(const EvalResult& r) const {
    const ClassMetrics& m = r.metrics.of(cls);
    switch (metric) {
      case MetricKind::precision: return m.precision;
      case MetricKind::recall: return m.recall;
      case MetricKind::f1: return m.f1;
    }
    return std::nullopt;
  }

  std::string name() const { return std::string(to_string(cls)) + "_" + std::string(to_string(metric)); }
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample sd; 0 for a single value
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct MetricAggregate {
  std::size_t defined = 0;
  std::size_t undefined = 0;
  std::optional<Summary> summary;  // absent when every value is undefined
};

struct Aggregate {
  std::size_t runs = 0;
  // Keyed by MetricSelector::name(), e.g. "positive_precision".
  std::map<std::string, MetricAggregate> metrics;
  std::optional<double> reference;
  std::optional<std::size_t> count_ge_reference;  // seeds with positive precision >= reference

  const MetricAggregate& at(const MetricSelector& s) const { return metrics.at(s.name()); }
};

inline std::vector<double> defined_values(std::span<const EvalResult> runs, const MetricSelector& s) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs)
    if (auto v = s.pick(r)) out.push_back(*v);
  return out;
}

inline Summary summarize(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  Summary s;
  s.mean = stats::mean(values);
  s.sd = stats::sample_sd(values);
  s.median = stats::quantile_sorted(values, 0.5);
  s.q1 = stats::quantile_sorted(values, 0.25);
  s.q3 = stats::quantile_sorted(values, 0.75);
  s.min = values.front();
  s.max = values.back();
  return s;
}

inline Aggregate aggregate_runs(std::span<const EvalResult> runs, std::optional<double> reference) {
  if (runs.empty()) throw DataError("cannot aggregate an empty sweep");
  Aggregate a;
  a.runs = runs.size();
  a.reference = reference;
  for (Label cls : {Label::positive, Label::negative}) {
    for (MetricKind kind : kMetricKinds) {
      const MetricSelector sel{kind, cls};
      std::vector<double> values = defined_values(runs, sel);
      MetricAggregate m;
      m.defined = values.size();
      m.undefined = runs.size() - values.size();
      if (!values.empty()) m.summary = summarize(std::move(values));
      a.metrics.emplace(sel.name(), m);
    }
  }
  if (reference) {
    std::size_t count = 0;
    for (const auto& r : runs) {
      if (r.metrics.positive.precision && *r.metrics.positive.precision >= *reference) ++count;
    }
    a.count_ge_reference = count;
  }
  return a;
}

inline Aggregate aggregate_sweep(const SweepResult& result, std::optional<double> reference) {
  return aggregate_runs(result.runs, reference);
}

inline Aggregate aggregate_sweep(const SweepResult& result) {
  return aggregate_runs(result.runs, result.config.reference_precision);
}

// ---- ablations -------------------------------------------------------------

struct NamedPipeline {
  std::string name;
  PipelineConfig config;
};

inline std::vector<NamedPipeline> standard_presets() {
  std::vector<NamedPipeline> out;
  for (auto name : kPresetNames) out.push_back({std::string(name), preset(name)});
  return out;
}

struct AblationResult {
  std::string name;
  SweepResult sweep;
  Aggregate aggregate;
};

// One full sweep per preset over the base config's seed range, so every
// preset sees the same train/test partitions seed for seed.
inline std::vector<AblationResult> run_ablations(const Corpus& corpus, const SweepConfig& base,
                                                 const std::vector<NamedPipeline>& presets,
                                                 const StopwordList& stopwords = default_stopwords(),
                                                 const ProgressFn& progress = {}) {
  if (presets.empty()) throw ConfigError("no ablation presets given");
  std::vector<AblationResult> out;
  out.reserve(presets.size());
  for (const auto& p : presets) {
    SweepConfig cfg = base;
    cfg.pipeline = p.config;
    cfg.preset_name = p.name;
    SweepResult sweep = run_sweep(corpus, cfg, stopwords, progress);
    Aggregate agg = aggregate_sweep(sweep);
    out.push_back({p.name, std::move(sweep), std::move(agg)});
  }
  return out;
}

// ---- boxplots --------------------------------------------------------------

struct BoxplotStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double lower_fence = 0.0;  // q1 - 1.5 IQR
  double upper_fence = 0.0;  // q3 + 1.5 IQR
  double lower_whisker = 0.0;  // smallest value >= lower_fence
  double upper_whisker = 0.0;  // largest value <= upper_fence
  std::vector<double> outliers;  // ascending
  std::size_t n = 0;
  std::size_t undefined = 0;
};

inline BoxplotStats boxplot_values(std::vector<double> values) {
  if (values.size() < 5) throw DataError("boxplot needs at least 5 defined values");
  std::sort(values.begin(), values.end());
  BoxplotStats b;
  b.n = values.size();
  b.min = values.front();
  b.max = values.back();
  b.q1 = stats::quantile_sorted(values, 0.25);
  b.median = stats::quantile_sorted(values, 0.5);
  b.q3 = stats::quantile_sorted(values, 0.75);
  const double iqr = b.q3 - b.q1;
  b.lower_fence = b.q1 - 1.5 * iqr;
  b.upper_fence = b.q3 + 1.5 * iqr;
  b.lower_whisker = b.max;
  b.upper_whisker = b.min;
  for (double v : values) {
    if (v < b.lower_fence || v > b.upper_fence) {
      b.outliers.push_back(v);
    } else {
      b.lower_whisker = std::min(b.lower_whisker, v);
      b.upper_whisker = std::max(b.upper_whisker, v);
    }
  }
  return b;
}

inline BoxplotStats boxplot_stats(const SweepResult& result, const MetricSelector& selector) {
  std::vector<double> values = defined_values(result.runs, selector);
  const std::size_t undefined = result.runs.size() - values.size();
  BoxplotStats b = boxplot_values(std::move(values));
  b.undefined = undefined;
  return b;
}

}  // namespace bowaudit
