#pragma once

// Seeded train/test splits, confusion matrices and per-class metrics, and a
// single end-to-end evaluation run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "bowaudit/corpus.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/features.hpp"
#include "bowaudit/gbt.hpp"
#include "bowaudit/preprocess.hpp"
#include "bowaudit/rng.hpp"
#include "bowaudit/stopwords.hpp"
#include "bowaudit/vocabulary.hpp"

namespace bowaudit {

struct SplitSpec {
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
  bool stratified = false;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ConfigError("train_fraction must lie in (0, 1)");
  }
};

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// floor(fraction * n), with a 1e-9 allowance so 0.7 * 200 is 140.
inline std::size_t train_size(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

namespace detail {

// First k slots of a partial Fisher-Yates shuffle of `items`.
inline void partial_shuffle(std::vector<std::size_t>& items, std::size_t k, Pcg32& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + rng.bounded(static_cast<std::uint32_t>(items.size() - i));
    std::swap(items[i], items[j]);
  }
}

inline Split finish_split(std::vector<std::size_t> train, std::size_t n) {
  std::sort(train.begin(), train.end());
  Split s;
  std::vector<bool> in_train(n, false);
  for (auto i : train) in_train[i] = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_train[i]) s.test.push_back(i);
  s.train = std::move(train);
  return s;
}

}  // namespace detail

// Uniform sample without replacement of floor(fraction * n) training indices:
// a partial Fisher-Yates shuffle of 0..n-1 driven by Pcg32(seed), taking
// j = i + bounded(n - i) for i = 0..k-1. The rest is the test set.
inline Split make_split(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 2) throw DataError("need at least 2 documents to split");
  if (n > UINT32_MAX) throw DataError("corpus too large to split");
  const std::size_t k = train_size(n, spec.train_fraction);
  if (k < 1 || k >= n) {
    throw DataError("train fraction " + std::to_string(spec.train_fraction) + " of " +
                    std::to_string(n) + " documents leaves an empty train or test set");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Pcg32 rng(spec.seed);
  detail::partial_shuffle(idx, k, rng);
  idx.resize(k);
  return detail::finish_split(std::move(idx), n);
}

// Class-proportional variant: the train size is still floor(fraction * n);
// round(k * n_pos / n) of it is drawn from the positives, the rest from the
// negatives, each by the same partial shuffle on one shared generator.
inline Split make_stratified_split(std::span<const Label> labels, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = labels.size();
  if (n < 2) throw DataError("need at least 2 documents to split");
  const std::size_t k = train_size(n, spec.train_fraction);
  if (k < 1 || k >= n) throw DataError("train fraction leaves an empty train or test set");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (labels[i] == Label::positive ? pos : neg).push_back(i);
  auto k_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(k) * static_cast<double>(pos.size()) / static_cast<double>(n)));
  k_pos = std::min(k_pos, pos.size());
  const std::size_t k_neg = std::min(k - k_pos, neg.size());
  Pcg32 rng(spec.seed);
  detail::partial_shuffle(pos, k_pos, rng);
  detail::partial_shuffle(neg, k_neg, rng);
  std::vector<std::size_t> train(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k_pos));
  train.insert(train.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(k_neg));
  return detail::finish_split(std::move(train), n);
}

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size())
    throw DataError("prediction and truth vectors differ in length");
  if (predictions.empty()) throw DataError("cannot score an empty prediction vector");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool p = predictions[i] == Label::positive;
    const bool t = truths[i] == Label::positive;
    if (p && t) ++cm.tp;
    else if (p) ++cm.fp;
    else if (t) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

// nullopt marks an undefined metric (zero denominator); never reported as 0.
using Metric = std::optional<double>;

struct ClassMetrics {
  Metric precision;
  Metric recall;
  Metric f1;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

inline ClassMetrics metrics_for(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

struct PerClassMetrics {
  ClassMetrics positive;
  ClassMetrics negative;

  const ClassMetrics& of(Label l) const { return l == Label::positive ? positive : negative; }
  friend bool operator==(const PerClassMetrics&, const PerClassMetrics&) = default;
};

// Negative-class metrics are the positive-class formulas with the roles of
// tp/tn and fp/fn swapped.
inline PerClassMetrics class_metrics(const ConfusionMatrix& cm) {
  return {metrics_for(cm.tp, cm.fp, cm.fn), metrics_for(cm.tn, cm.fn, cm.fp)};
}

struct EvalResult {
  std::uint64_t seed = 0;
  ConfusionMatrix confusion;
  PerClassMetrics metrics;
  std::size_t support_positive = 0;  // true positives + false negatives in the test set
  std::size_t support_negative = 0;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

inline EvalResult score(std::uint64_t seed, std::span<const Label> predictions,
                        std::span<const Label> truths) {
  EvalResult r;
  r.seed = seed;
  r.confusion = confusion(predictions, truths);
  r.metrics = class_metrics(r.confusion);
  r.support_positive = r.confusion.tp + r.confusion.fn;
  r.support_negative = r.confusion.tn + r.confusion.fp;
  return r;
}

// Features for a whole labeled corpus. The vocabulary and document
// frequencies come from every document before any split, as in the workflow
// being replicated; test-fold document frequencies therefore leak into the
// feature set. Reports carry this as a methodological warning.
struct PreparedData {
  ProcessedCorpus processed;
  Vocabulary vocabulary;
  DocTermMatrix matrix;
  std::vector<Label> labels;
};

inline constexpr const char* kVocabularyLeakWarning =
    "vocabulary and document frequencies are computed on all labeled documents before the "
    "train/test split (replicated workflow); test-fold information leaks into feature selection";

inline PreparedData prepare(const Corpus& corpus, const PipelineConfig& config,
                            const StopwordList& stopwords = default_stopwords(),
                            CountMode mode = CountMode::counts) {
  if (!corpus.labeled) throw DataError("evaluation needs a labeled corpus");
  PreparedData d;
  d.labels = corpus.labels();
  d.processed = apply_pipeline(corpus, config, stopwords);
  d.vocabulary = build_vocabulary(d.processed);
  d.matrix = vectorize(d.processed, d.vocabulary, mode);
  return d;
}

inline Split split_for(const PreparedData& data, const SplitSpec& spec) {
  return spec.stratified ? make_stratified_split(data.labels, spec)
                         : make_split(data.labels.size(), spec);
}

struct TrainedRun {
  EvalResult result;
  GbtModel model;
};

inline TrainedRun evaluate_split_with_model(const PreparedData& data, const GbtParams& params,
                                            const SplitSpec& spec) {
  const Split split = split_for(data, spec);
  const DocTermMatrix train = data.matrix.select_rows(split.train);
  std::vector<Label> train_labels;
  train_labels.reserve(split.train.size());
  for (auto i : split.train) train_labels.push_back(data.labels[i]);
  TrainedRun run;
  run.model = train_gbt(train, train_labels, params);

  std::vector<Label> predicted, truth;
  predicted.reserve(split.test.size());
  truth.reserve(split.test.size());
  for (auto i : split.test) {
    predicted.push_back(predict_label(run.model, data.matrix.rows[i]));
    truth.push_back(data.labels[i]);
  }
  run.result = score(spec.seed, predicted, truth);
  return run;
}

inline EvalResult evaluate_split(const PreparedData& data, const GbtParams& params,
                                 const SplitSpec& spec) {
  return evaluate_split_with_model(data, params, spec).result;
}

inline EvalResult evaluate_run(const Corpus& corpus, const PipelineConfig& config,
                               const StopwordList& stopwords, const GbtParams& params,
                               const SplitSpec& spec) {
  return evaluate_split(prepare(corpus, config, stopwords), params, spec);
}

}  // namespace bowaudit
