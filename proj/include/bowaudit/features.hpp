#pragma once

// Sparse bag-of-words document-term matrix.

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bowaudit/csv.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/preprocess.hpp"
#include "bowaudit/vocabulary.hpp"

namespace bowaudit {

struct FeatureCount {
  std::uint32_t index = 0;
  std::uint32_t count = 0;

  friend bool operator==(const FeatureCount&, const FeatureCount&) = default;
};

// Indices strictly increasing, counts >= 1. May be empty.
using SparseRow = std::vector<FeatureCount>;

struct DocTermMatrix {
  std::size_t n_terms = 0;
  std::vector<SparseRow> rows;

  std::size_t n_docs() const { return rows.size(); }

  DocTermMatrix select_rows(std::span<const std::size_t> which) const {
    DocTermMatrix out;
    out.n_terms = n_terms;
    out.rows.reserve(which.size());
    for (auto i : which) out.rows.push_back(rows.at(i));
    return out;
  }

  friend bool operator==(const DocTermMatrix&, const DocTermMatrix&) = default;
};

enum class CountMode { counts, binary };

// Row i counts the in-vocabulary tokens of document i; other tokens are dropped.
inline DocTermMatrix vectorize(const ProcessedCorpus& processed, const Vocabulary& vocab,
                               CountMode mode = CountMode::counts) {
  if (!(processed.provenance == vocab.provenance())) {
    throw DataError("vocabulary was built under a different pipeline configuration");
  }
  DocTermMatrix m;
  m.n_terms = vocab.size();
  m.rows.reserve(processed.size());
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& doc : processed.tokens) {
    counts.clear();
    for (const auto& t : doc) {
      const auto idx = vocab.index_of(t);
      if (idx != Vocabulary::npos) ++counts[static_cast<std::uint32_t>(idx)];
    }
    SparseRow row;
    row.reserve(counts.size());
    for (const auto& [idx, c] : counts) {
      row.push_back({idx, mode == CountMode::binary ? 1u : c});
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

// `doc_id,term,count` triplets, one line per nonzero cell, row-major.
inline void write_triplets(std::ostream& out, const DocTermMatrix& m,
                           const std::vector<std::string>& doc_ids, const Vocabulary& vocab) {
  if (doc_ids.size() != m.n_docs()) throw DataError("doc id count does not match matrix rows");
  csv::write_row(out, {"doc_id", "term", "count"});
  for (std::size_t i = 0; i < m.n_docs(); ++i) {
    for (const auto& fc : m.rows[i]) {
      csv::write_row(out, {doc_ids[i], vocab.term(fc.index), std::to_string(fc.count)});
    }
  }
}

}  // namespace bowaudit
