#pragma once

// Term dictionary with document frequencies and the rare-term filter.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bowaudit/error.hpp"
#include "bowaudit/preprocess.hpp"

namespace bowaudit {

// Smallest document frequency kept for a corpus of n_docs documents:
// ceil(fraction * n_docs), with a 1e-9 allowance so that 0.02 * 200 is 4.
inline std::size_t min_df_count(double fraction, std::size_t n_docs) {
  const double raw = fraction * static_cast<double>(n_docs);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

class Vocabulary;
inline Vocabulary build_vocabulary(const ProcessedCorpus& processed,
                                   std::optional<double> min_df_fraction);

class Vocabulary {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(std::size_t i) const { return terms_.at(i); }
  std::size_t df(std::size_t i) const { return df_.at(i); }

  std::size_t index_of(std::string_view t) const {
    const auto it = index_.find(std::string(t));
    return it == index_.end() ? npos : it->second;
  }
  bool contains(std::string_view t) const { return index_of(t) != npos; }

  std::size_t dict_size_before() const { return dict_size_before_; }
  std::size_t dict_size_after() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  std::optional<double> min_df_fraction() const { return min_df_fraction_; }
  std::size_t min_df() const { return min_df_; }
  const Provenance& provenance() const { return provenance_; }

  friend Vocabulary build_vocabulary(const ProcessedCorpus&, std::optional<double>);

 private:
  std::vector<std::string> terms_;  // sorted bytewise
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dict_size_before_ = 0;
  std::size_t n_docs_ = 0;
  std::optional<double> min_df_fraction_;
  std::size_t min_df_ = 1;
  Provenance provenance_;
};

// Keeps term t iff df(t) >= ceil(min_df_fraction * N); no filter when the
// fraction is absent.
inline Vocabulary build_vocabulary(const ProcessedCorpus& processed,
                                   std::optional<double> min_df_fraction) {
  if (processed.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  if (min_df_fraction && !(*min_df_fraction > 0.0 && *min_df_fraction < 1.0)) {
    throw ConfigError("min_df_fraction must lie in (0, 1)");
  }
  std::map<std::string, std::size_t> df;
  std::unordered_set<std::string_view> seen;
  for (const auto& doc : processed.tokens) {
    seen.clear();
    for (const auto& t : doc) {
      if (seen.insert(t).second) ++df[t];
    }
  }

  Vocabulary v;
  v.n_docs_ = processed.size();
  v.dict_size_before_ = df.size();
  v.min_df_fraction_ = min_df_fraction;
  v.min_df_ = min_df_fraction ? min_df_count(*min_df_fraction, v.n_docs_) : 1;
  v.provenance_ = processed.provenance;
  for (const auto& [term, count] : df) {
    if (count < v.min_df_) continue;
    v.index_.emplace(term, v.terms_.size());
    v.terms_.push_back(term);
    v.df_.push_back(count);
  }
  return v;
}

// Uses the rare-term fraction recorded in the pipeline config.
inline Vocabulary build_vocabulary(const ProcessedCorpus& processed) {
  return build_vocabulary(processed, processed.provenance.config.rare_term_min_df_fraction);
}

}  // namespace bowaudit
