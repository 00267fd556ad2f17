#pragma once

// Data-quality diagnostics: sparsity histograms, token-reduction accounting,
// the zero-feature prediction audit, Heaps' law fits, per-group positive
// rates and term-level feature importance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "bowaudit/corpus.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/features.hpp"
#include "bowaudit/gbt.hpp"
#include "bowaudit/preprocess.hpp"
#include "bowaudit/rng.hpp"
#include "bowaudit/vocabulary.hpp"

namespace bowaudit {

// ---- sparsity --------------------------------------------------------------

// What "n words in a document" means for the histogram.
enum class SparsityCount {
  distinct_features,  // number of nonzero entries in the row
  total_tokens,       // sum of the row's counts
};

struct HistogramBucket {
  std::size_t n = 0;
  std::size_t count = 0;
  double fraction = 0.0;
};

struct SparsityHistogram {
  std::size_t n_docs = 0;
  SparsityCount mode = SparsityCount::distinct_features;
  // Every n from 0 to the maximum observed, empty buckets included.
  std::vector<HistogramBucket> buckets;

  std::size_t count(std::size_t n) const { return n < buckets.size() ? buckets[n].count : 0; }
  double fraction(std::size_t n) const { return n < buckets.size() ? buckets[n].fraction : 0.0; }
};

inline SparsityHistogram sparsity_histogram(const DocTermMatrix& dtm,
                                            SparsityCount mode = SparsityCount::distinct_features) {
  SparsityHistogram h;
  h.n_docs = dtm.n_docs();
  h.mode = mode;
  std::vector<std::size_t> counts;
  for (const auto& row : dtm.rows) {
    std::size_t n = row.size();
    if (mode == SparsityCount::total_tokens) {
      n = 0;
      for (const auto& fc : row) n += fc.count;
    }
    if (n >= counts.size()) counts.resize(n + 1, 0);
    ++counts[n];
  }
  h.buckets.reserve(counts.size());
  for (std::size_t n = 0; n < counts.size(); ++n) {
    h.buckets.push_back({n, counts[n],
                         static_cast<double>(counts[n]) / static_cast<double>(h.n_docs)});
  }
  return h;
}

struct TokenReduction {
  std::size_t before = 0;  // post-normalization tokens, before stopwords and rare terms
  std::size_t after = 0;   // tokens that survive into the matrix
  double fraction = 0.0;   // 1 - after/before; 0 when there were no tokens
};

inline TokenReduction token_reduction(const ProcessedCorpus& processed, const Vocabulary& vocab) {
  if (!(processed.provenance == vocab.provenance())) {
    throw DataError("vocabulary was built under a different pipeline configuration");
  }
  TokenReduction r;
  for (auto c : processed.normalized_token_counts) r.before += c;
  for (const auto& doc : processed.tokens)
    for (const auto& t : doc) r.after += vocab.contains(t) ? 1 : 0;
  if (r.before > 0) {
    r.fraction = 1.0 - static_cast<double>(r.after) / static_cast<double>(r.before);
  }
  return r;
}

struct SparsityReport {
  SparsityHistogram histogram;
  std::size_t dict_size_before = 0;
  std::size_t dict_size_after = 0;
  bool rare_terms_removed = false;
  TokenReduction tokens;
};

inline SparsityReport sparsity_report(const ProcessedCorpus& processed, const Vocabulary& vocab,
                                      const DocTermMatrix& dtm,
                                      SparsityCount mode = SparsityCount::distinct_features) {
  SparsityReport r;
  r.histogram = sparsity_histogram(dtm, mode);
  r.dict_size_before = vocab.dict_size_before();
  r.dict_size_after = vocab.dict_size_after();
  r.rare_terms_removed = vocab.min_df_fraction().has_value();
  r.tokens = token_reduction(processed, vocab);
  return r;
}

// ---- zero-feature audit ----------------------------------------------------

inline constexpr double kZeroRowWarningFraction = 0.05;

struct ZeroFeatureAudit {
  std::size_t zero_row_count = 0;
  double zero_row_fraction = 0.0;
  Label predicted_label = Label::positive;  // the model's output on any all-zero row
  double prob = 0.5;

  bool warn() const { return zero_row_fraction > kZeroRowWarningFraction; }
};

inline ZeroFeatureAudit zero_feature_audit(const GbtModel& model, const DocTermMatrix& dtm,
                                           double threshold = 0.5) {
  ZeroFeatureAudit a;
  for (const auto& row : dtm.rows) a.zero_row_count += row.empty() ? 1 : 0;
  if (dtm.n_docs() > 0) {
    a.zero_row_fraction = static_cast<double>(a.zero_row_count) / static_cast<double>(dtm.n_docs());
  }
  const SparseRow zero;
  a.prob = predict_prob(model, zero);
  a.predicted_label = predict_label(model, zero, threshold);
  return a;
}

inline std::string zero_feature_warning(const ZeroFeatureAudit& a) {
  const auto pct = static_cast<long long>(std::llround(100.0 * a.zero_row_fraction));
  return std::to_string(a.zero_row_count) + " documents (" + std::to_string(pct) +
         "%) have no features left after preprocessing; the model labels every one of them " +
         std::string(to_string(a.predicted_label)) + " without textual evidence";
}

// ---- Heaps' law ------------------------------------------------------------

struct HeapsPoint {
  std::size_t tokens = 0;  // prefix length n
  std::size_t types = 0;   // distinct tokens V(n) in the prefix
};

struct HeapsFit {
  double K = 0.0;
  double beta = 0.0;
  double r_squared = 0.0;
  std::size_t total_tokens = 0;
  std::vector<HeapsPoint> curve;  // the sampled points the fit used
};

inline constexpr std::size_t kHeapsMinTokens = 100;
inline constexpr std::size_t kHeapsMinPoints = 10;
inline constexpr std::size_t kHeapsSamplePoints = 50;
inline constexpr std::size_t kHeapsMinPrefix = 10;
inline constexpr std::size_t kHeapsPrefixDivisor = 1000;

// Least squares of log V(n) on log n at geometrically spaced prefix lengths
// from max(10, total/1000) up to the full stream.
inline HeapsFit heaps_fit_stream(std::span<const std::string> tokens,
                                 std::size_t sample_points = kHeapsSamplePoints) {
  const std::size_t total = tokens.size();
  if (total < kHeapsMinTokens) {
    throw DataError("Heaps fit needs at least " + std::to_string(kHeapsMinTokens) +
                    " tokens, got " + std::to_string(total));
  }
  sample_points = std::max(sample_points, kHeapsMinPoints);

  // The smallest prefixes are skipped: there V(n) = n is forced and the
  // integer counts are too coarse for the power law to show.
  const std::size_t floor_n = std::max(kHeapsMinPrefix, total / kHeapsPrefixDivisor);
  std::vector<std::size_t> at;
  const double log_lo = std::log(static_cast<double>(floor_n));
  const double log_total = std::log(static_cast<double>(total));
  for (std::size_t k = 0; k < sample_points; ++k) {
    const double x = log_lo + (log_total - log_lo) * static_cast<double>(k) / static_cast<double>(sample_points - 1);
    auto n = static_cast<std::size_t>(std::llround(std::exp(x)));
    n = std::clamp<std::size_t>(n, 1, total);
    if (at.empty() || n != at.back()) at.push_back(n);
  }
  if (at.back() != total) at.push_back(total);
  if (at.size() < kHeapsMinPoints) throw DataError("too few distinct Heaps sample points");

  HeapsFit fit;
  fit.total_tokens = total;
  std::unordered_set<std::string_view> seen;
  std::size_t next = 0;
  for (std::size_t i = 0; i < total && next < at.size(); ++i) {
    seen.insert(tokens[i]);
    if (i + 1 == at[next]) fit.curve.push_back({at[next++], seen.size()});
  }

  const auto m = static_cast<double>(fit.curve.size());
  double sx = 0, sy = 0;
  for (const auto& p : fit.curve) {
    sx += std::log(static_cast<double>(p.tokens));
    sy += std::log(static_cast<double>(p.types));
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : fit.curve) {
    const double dx = std::log(static_cast<double>(p.tokens)) - mx;
    const double dy = std::log(static_cast<double>(p.types)) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.beta = sxy / sxx;
  fit.K = std::exp(my - fit.beta * mx);
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    const double ss_res = syy - fit.beta * sxy;
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

// Tokens are taken in corpus order, or with the documents shuffled by
// `shuffle_seed` when given (the fit depends on order).
inline HeapsFit heaps_fit(const ProcessedCorpus& processed,
                          std::optional<std::uint64_t> shuffle_seed = std::nullopt,
                          std::size_t sample_points = kHeapsSamplePoints) {
  std::vector<std::size_t> order(processed.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    Pcg32 rng(*shuffle_seed);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.bounded(static_cast<std::uint32_t>(i))]);
    }
  }
  std::vector<std::string> stream;
  for (auto d : order)
    stream.insert(stream.end(), processed.tokens[d].begin(), processed.tokens[d].end());
  return heaps_fit_stream(stream, sample_points);
}

// ---- group positive rates --------------------------------------------------

inline constexpr std::string_view kUngroupedKey = "(ungrouped)";

struct GroupRate {
  std::string group;
  std::size_t count = 0;
  std::size_t positive = 0;
  double fraction = 0.0;

  friend bool operator==(const GroupRate&, const GroupRate&) = default;
};

// Sorted by positive fraction descending, then group name ascending.
inline std::vector<GroupRate> group_positive_rate(const Corpus& corpus,
                                                  std::span<const Label> predictions) {
  if (predictions.size() != corpus.size()) {
    throw DataError("prediction count " + std::to_string(predictions.size()) +
                    " does not match corpus size " + std::to_string(corpus.size()));
  }
  if (!corpus.has_groups()) throw DataError("corpus carries no group column");
  std::map<std::string, GroupRate> by_group;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& g = corpus.documents[i].group;
    const std::string key = g && !g->empty() ? *g : std::string(kUngroupedKey);
    auto& r = by_group[key];
    r.group = key;
    ++r.count;
    r.positive += predictions[i] == Label::positive ? 1 : 0;
  }
  std::vector<GroupRate> out;
  out.reserve(by_group.size());
  for (auto& [_, r] : by_group) {
    r.fraction = static_cast<double>(r.positive) / static_cast<double>(r.count);
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const GroupRate& a, const GroupRate& b) { return a.fraction > b.fraction; });
  return out;
}

// ---- term importance -------------------------------------------------------

struct TermImportance {
  std::string term;
  std::size_t index = 0;
  double importance = 0.0;
};

// Highest-gain terms first; ties broken by term index.
inline std::vector<TermImportance> top_terms(const GbtModel& model, const Vocabulary& vocab,
                                             std::size_t k = 10) {
  std::vector<TermImportance> out;
  for (const auto& [idx, imp] : feature_importance(model)) {
    out.push_back({idx < vocab.size() ? vocab.term(idx) : std::to_string(idx), idx, imp});
  }
  std::stable_sort(out.begin(), out.end(), [](const TermImportance& a, const TermImportance& b) {
    return a.importance > b.importance;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace bowaudit
