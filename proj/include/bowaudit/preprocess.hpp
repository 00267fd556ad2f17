#pragma once

// Tweet preprocessing: URL and character-class stripping, lowercasing,
// whitespace tokenization, stopword removal and Snowball stemming. Rare-term
// filtering happens later, in build_vocabulary.
//
// Fixed order: URLs -> character classes -> lowercase -> tokenize ->
// stopwords -> stem. Stopwords are matched before stemming and are
// case-sensitive, so with lowercasing off "The" survives.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bowaudit/corpus.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/stemmer.hpp"
#include "bowaudit/stopwords.hpp"
#include "bowaudit/text.hpp"
#include "bowaudit/utf8.hpp"

namespace bowaudit {

struct StripClasses {
  bool urls = true;
  bool punctuation = true;
  bool numbers = true;
  bool special_chars = true;

  static StripClasses none() { return {false, false, false, false}; }
  friend bool operator==(const StripClasses&, const StripClasses&) = default;
};

struct PipelineConfig {
  bool lowercase = true;
  StripClasses strip;
  bool remove_stopwords = true;
  bool stem = true;
  std::optional<double> rare_term_min_df_fraction = 0.02;

  void validate() const {
    if (rare_term_min_df_fraction &&
        !(*rare_term_min_df_fraction > 0.0 && *rare_term_min_df_fraction < 1.0)) {
      throw ConfigError("rare_term_min_df_fraction must lie in (0, 1)");
    }
  }

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// The baseline recipe and its six single-change ablations, in report order.
inline constexpr std::array<std::string_view, 7> kPresetNames{
    "aw-baseline",  "no-stopwords",    "no-stemming",      "no-lowercase",
    "no-rare-removal", "no-stem-no-rare", "no-lower-no-rare"};

inline PipelineConfig preset(std::string_view name) {
  PipelineConfig c;
  if (name == "aw-baseline") return c;
  if (name == "no-stopwords") {
    c.remove_stopwords = false;
  } else if (name == "no-stemming") {
    c.stem = false;
  } else if (name == "no-lowercase") {
    c.lowercase = false;
  } else if (name == "no-rare-removal") {
    c.rare_term_min_df_fraction.reset();
  } else if (name == "no-stem-no-rare") {
    c.stem = false;
    c.rare_term_min_df_fraction.reset();
  } else if (name == "no-lower-no-rare") {
    c.lowercase = false;
    c.rare_term_min_df_fraction.reset();
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

inline std::optional<std::string_view> preset_name_of(const PipelineConfig& c) {
  for (auto name : kPresetNames)
    if (preset(name) == c) return name;
  return std::nullopt;
}

namespace detail {

inline bool ascii_iequals_at(std::u32string_view s, std::size_t pos, std::string_view pat) {
  if (pos + pat.size() > s.size()) return false;
  for (std::size_t k = 0; k < pat.size(); ++k) {
    char32_t c = s[pos + k];
    if (c >= U'A' && c <= U'Z') c += 32;
    if (c != static_cast<unsigned char>(pat[k])) return false;
  }
  return true;
}

inline bool is_word_char(char32_t c) { return text::is_letter(c) || text::is_digit(c); }

// Replaces http(s)://..., www...., t.co/... and the "<url>" placeholder with a
// space. A URL runs to the next whitespace.
inline std::u32string strip_urls(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const bool boundary = i == 0 || !is_word_char(s[i - 1]);
    std::size_t len = 0;
    if (ascii_iequals_at(s, i, "<url>")) {
      len = 5;
    } else if (ascii_iequals_at(s, i, "http://") || ascii_iequals_at(s, i, "https://") ||
               (boundary && (ascii_iequals_at(s, i, "www.") || ascii_iequals_at(s, i, "t.co/")))) {
      len = 1;
      while (i + len < s.size() && !text::is_space(s[i + len])) ++len;
    }
    if (len) {
      out.push_back(U' ');
      i += len;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

inline std::string normalize_once(std::string_view input, const PipelineConfig& config) {
  std::u32string s = utf8::decode(input);
  if (config.strip.urls) s = strip_urls(s);
  std::u32string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char32_t c : s) {
    switch (text::classify(c)) {
      case text::CharClass::space:
        pending_space = true;
        continue;
      case text::CharClass::punctuation:
        if (config.strip.punctuation) continue;
        break;
      case text::CharClass::digit:
        if (config.strip.numbers) continue;
        break;
      case text::CharClass::special:
        if (config.strip.special_chars) continue;
        break;
      case text::CharClass::letter:
        break;
    }
    if (pending_space && !out.empty()) out.push_back(U' ');
    pending_space = false;
    out.push_back(config.lowercase ? text::to_lower(c) : c);
  }
  return utf8::encode(out);
}

}  // namespace detail

// Total function. Deleting characters can expose a new URL (h☃ttp://),
// so the rules are reapplied until the text stops changing.
inline std::string normalize_text(std::string_view input, const PipelineConfig& config) {
  std::string cur = detail::normalize_once(input, config);
  for (;;) {
    std::string next = detail::normalize_once(cur, config);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

inline std::vector<std::string> tokenize(std::string_view normalized) {
  return text::split_whitespace(normalized);
}

// Identifies the inputs a token stream was produced from; vocabularies and
// matrices refuse to mix streams with different provenance.
struct Provenance {
  PipelineConfig config;
  std::string stopwords_id;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ProcessedCorpus {
  std::vector<std::vector<std::string>> tokens;   // before rare-term filtering
  std::vector<std::size_t> normalized_token_counts;  // after tokenize, before stopwords
  Provenance provenance;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

inline ProcessedCorpus apply_pipeline(const Corpus& corpus, const PipelineConfig& config,
                                      const StopwordList& stopwords = default_stopwords()) {
  config.validate();
  if (config.remove_stopwords && stopwords.size() == 0) {
    throw ConfigError("stopword removal is on but the stopword list is empty");
  }
  ProcessedCorpus out;
  out.provenance.config = config;
  out.provenance.stopwords_id = config.remove_stopwords ? stopwords.id() : "";
  out.tokens.reserve(corpus.size());
  out.normalized_token_counts.reserve(corpus.size());

  std::unordered_map<std::string, std::string> stem_cache;
  for (const auto& doc : corpus.documents) {
    std::vector<std::string> toks = tokenize(normalize_text(doc.text, config));
    out.normalized_token_counts.push_back(toks.size());
    std::vector<std::string> kept;
    kept.reserve(toks.size());
    for (auto& t : toks) {
      if (config.remove_stopwords && stopwords.contains(t)) continue;
      if (config.stem) {
        auto it = stem_cache.find(t);
        if (it == stem_cache.end()) it = stem_cache.emplace(t, stem_token(t)).first;
        kept.push_back(it->second);
      } else {
        kept.push_back(std::move(t));
      }
    }
    out.tokens.push_back(std::move(kept));
  }
  return out;
}

}  // namespace bowaudit
