#pragma once

// Labeled and unlabeled short-text corpora: loading (CSV / JSON lines),
// writing, and raw-text summary statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "bowaudit/csv.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/text.hpp"

namespace bowaudit {

enum class Label : std::uint8_t { negative = 0, positive = 1 };

inline constexpr std::string_view to_string(Label l) {
  return l == Label::positive ? "positive" : "negative";
}

struct Document {
  std::string id;
  std::string text;
  std::optional<Label> label;
  std::optional<std::string> group;  // empty source values load as nullopt

  friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
  std::vector<Document> documents;
  bool labeled = false;
  std::vector<std::size_t> empty_text_rows;  // source row numbers, informational

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  const Document& operator[](std::size_t i) const { return documents[i]; }

  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(documents.size());
    for (const auto& d : documents) {
      if (!d.label) throw DataError("document '" + d.id + "' has no label");
      out.push_back(*d.label);
    }
    return out;
  }

  bool has_groups() const {
    return std::any_of(documents.begin(), documents.end(),
                       [](const Document& d) { return d.group.has_value(); });
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.labeled == b.labeled && a.documents == b.documents;
  }
};

enum class CorpusFormat { csv, jsonl };

inline CorpusFormat parse_corpus_format(std::string_view s) {
  if (s == "csv") return CorpusFormat::csv;
  if (s == "jsonl") return CorpusFormat::jsonl;
  throw ConfigError("unknown corpus format '" + std::string(s) + "' (expected csv or jsonl)");
}

inline std::string_view to_string(CorpusFormat f) { return f == CorpusFormat::csv ? "csv" : "jsonl"; }

// Raw label strings are trimmed, then matched exactly. The first entry of
// each list is what write_corpus emits.
struct LabelMapping {
  std::vector<std::string> positive{"1", "yes", "moral"};
  std::vector<std::string> negative{"0", "no", "not_moral"};

  std::optional<Label> map(std::string_view raw) const {
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string_view::npos) return std::nullopt;
    raw = raw.substr(first, raw.find_last_not_of(" \t") - first + 1);
    if (std::find(positive.begin(), positive.end(), raw) != positive.end()) return Label::positive;
    if (std::find(negative.begin(), negative.end(), raw) != negative.end()) return Label::negative;
    return std::nullopt;
  }

  friend bool operator==(const LabelMapping&, const LabelMapping&) = default;
};

// Column (CSV) or field (JSONL) names. An absent label column means the
// corpus is unlabeled; a declared column that is missing from the file is an error.
struct CorpusSchema {
  std::string id = "id";
  std::string text = "text";
  std::optional<std::string> label = "label";
  std::optional<std::string> group;
  LabelMapping labels;

  static CorpusSchema unlabeled() {
    CorpusSchema s;
    s.label.reset();
    s.group = "group";
    return s;
  }

  friend bool operator==(const CorpusSchema&, const CorpusSchema&) = default;
};

namespace detail {

struct RowProblems {
  std::vector<std::string> messages;

  void add(std::size_t row, const std::string& what) {
    messages.push_back("row " + std::to_string(row) + ": " + what);
  }

  void throw_if_any(const std::string& path) const {
    if (messages.empty()) return;
    std::string msg = path + ": " + std::to_string(messages.size()) + " bad row(s)";
    const std::size_t shown = std::min<std::size_t>(messages.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + messages[i];
    if (shown < messages.size()) msg += "\n  ...";
    throw DataError(msg);
  }
};

inline void finish_row(Corpus& corpus, Document doc, std::size_t row,
                       const CorpusSchema& schema, std::string_view raw_label,
                       std::unordered_set<std::string>& ids, RowProblems& problems) {
  if (schema.label) {
    doc.label = schema.labels.map(raw_label);
    if (!doc.label) {
      problems.add(row, "unmappable label value '" + std::string(raw_label) + "'");
      return;
    }
  }
  if (!ids.insert(doc.id).second) {
    problems.add(row, "duplicate id '" + doc.id + "'");
    return;
  }
  if (doc.text.empty()) corpus.empty_text_rows.push_back(row);
  corpus.documents.push_back(std::move(doc));
}

inline Corpus load_csv(std::istream& in, const std::string& path, const CorpusSchema& schema) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw DataError(path + ": empty corpus");
  auto& cols = header->fields;
  if (!cols.empty() && cols[0].starts_with("\xEF\xBB\xBF")) cols[0].erase(0, 3);

  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw DataError(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - cols.begin());
  };
  const std::size_t id_col = column(schema.id);
  const std::size_t text_col = column(schema.text);
  const std::optional<std::size_t> label_col =
      schema.label ? std::optional(column(*schema.label)) : std::nullopt;
  const std::optional<std::size_t> group_col =
      schema.group ? std::optional(column(*schema.group)) : std::nullopt;

  Corpus corpus;
  corpus.labeled = schema.label.has_value();
  std::unordered_set<std::string> ids;
  RowProblems problems;
  std::size_t row = 1;
  while (auto rec = reader.next()) {
    ++row;
    if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;  // blank line
    if (rec->fields.size() != cols.size()) {
      problems.add(row, "expected " + std::to_string(cols.size()) + " fields, got " +
                            std::to_string(rec->fields.size()) + " (line " +
                            std::to_string(rec->line) + ")");
      continue;
    }
    Document doc;
    doc.id = rec->fields[id_col];
    doc.text = rec->fields[text_col];
    if (group_col && !rec->fields[*group_col].empty()) doc.group = rec->fields[*group_col];
    if (doc.id.empty()) {
      problems.add(row, "empty id");
      continue;
    }
    finish_row(corpus, std::move(doc), row, schema, label_col ? rec->fields[*label_col] : "",
               ids, problems);
  }
  problems.throw_if_any(path);
  if (corpus.empty()) throw DataError(path + ": empty corpus");
  return corpus;
}

inline std::optional<std::string> json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  return std::nullopt;
}

inline Corpus load_jsonl(std::istream& in, const std::string& path, const CorpusSchema& schema) {
  Corpus corpus;
  corpus.labeled = schema.label.has_value();
  std::unordered_set<std::string> ids;
  RowProblems problems;
  std::string line;
  std::size_t row = 0;
  bool saw_content = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    saw_content = true;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      problems.add(row, std::string("invalid JSON: ") + e.what());
      continue;
    }
    if (!obj.is_object()) {
      problems.add(row, "not a JSON object");
      continue;
    }
    auto field = [&](const std::string& name) -> std::optional<std::string> {
      const auto it = obj.find(name);
      if (it == obj.end()) throw DataError(path + ": row " + std::to_string(row) +
                                           ": missing field '" + name + "'");
      if (it->is_null()) return std::string();
      return json_scalar(*it);
    };
    Document doc;
    const auto id = field(schema.id);
    const auto text = field(schema.text);
    if (!id || !text || id->empty()) {
      problems.add(row, "id and text must be non-empty scalars");
      continue;
    }
    doc.id = *id;
    doc.text = *text;
    if (schema.group) {
      const auto g = field(*schema.group);
      if (g && !g->empty()) doc.group = *g;
    }
    std::string raw_label;
    if (schema.label) {
      const auto l = field(*schema.label);
      raw_label = l.value_or("");
    }
    finish_row(corpus, std::move(doc), row, schema, raw_label, ids, problems);
  }
  if (!saw_content) throw DataError(path + ": empty corpus");
  problems.throw_if_any(path);
  return corpus;
}

}  // namespace detail

inline Corpus load_corpus(std::istream& in, CorpusFormat format, const CorpusSchema& schema,
                          const std::string& name = "<stream>") {
  return format == CorpusFormat::csv ? detail::load_csv(in, name, schema)
                                     : detail::load_jsonl(in, name, schema);
}

inline Corpus load_corpus(const std::string& path, CorpusFormat format,
                          const CorpusSchema& schema = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open corpus file");
  return load_corpus(in, format, schema, path);
}

// Schema that write_corpus uses for `corpus`; load_corpus with it restores the corpus.
inline CorpusSchema schema_for(const Corpus& corpus, const LabelMapping& labels = {}) {
  CorpusSchema s;
  s.labels = labels;
  if (!corpus.labeled) s.label.reset();
  if (corpus.has_groups()) s.group = "group";
  return s;
}

inline void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format,
                         const LabelMapping& labels = {}) {
  const CorpusSchema schema = schema_for(corpus, labels);
  auto label_text = [&](const Document& d) {
    return *d.label == Label::positive ? labels.positive.front() : labels.negative.front();
  };
  if (format == CorpusFormat::csv) {
    std::vector<std::string> header{schema.id, schema.text};
    if (schema.label) header.push_back(*schema.label);
    if (schema.group) header.push_back(*schema.group);
    csv::write_row(out, header);
    for (const auto& d : corpus.documents) {
      std::vector<std::string> row{d.id, d.text};
      if (schema.label) row.push_back(label_text(d));
      if (schema.group) row.push_back(d.group.value_or(""));
      csv::write_row(out, row);
    }
    return;
  }
  for (const auto& d : corpus.documents) {
    nlohmann::ordered_json obj;
    obj[schema.id] = d.id;
    obj[schema.text] = d.text;
    if (schema.label) obj[*schema.label] = label_text(d);
    if (schema.group) obj[*schema.group] = d.group ? nlohmann::ordered_json(*d.group) : nlohmann::ordered_json(nullptr);
    out << obj.dump() << '\n';
  }
}

struct CorpusStats {
  std::size_t n_docs = 0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t n_unlabeled = 0;
  double mean_length = 0.0;
  double sd_length = 0.0;   // sample sd; 0 when n_docs == 1
  bool sd_defined = true;   // false when n_docs == 1
};

// Number of whitespace-separated tokens in raw text.
inline std::size_t whitespace_token_count(std::string_view text) {
  return text::count_whitespace_tokens(text);
}

inline CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.empty()) throw DataError("empty corpus");
  CorpusStats s;
  s.n_docs = corpus.size();
  double sum = 0.0;
  std::vector<double> lengths;
  lengths.reserve(corpus.size());
  for (const auto& d : corpus.documents) {
    if (!d.label) ++s.n_unlabeled;
    else if (*d.label == Label::positive) ++s.n_positive;
    else ++s.n_negative;
    lengths.push_back(static_cast<double>(whitespace_token_count(d.text)));
    sum += lengths.back();
  }
  s.mean_length = sum / static_cast<double>(s.n_docs);
  if (s.n_docs < 2) {
    s.sd_defined = false;
    s.sd_length = 0.0;
    return s;
  }
  double ss = 0.0;
  for (double x : lengths) ss += (x - s.mean_length) * (x - s.mean_length);
  s.sd_length = std::sqrt(ss / static_cast<double>(s.n_docs - 1));
  return s;
}

}  // namespace bowaudit
