#pragma once

// AuditConfig: everything one audit run depends on, as a single JSON
// document. Reading a written config gives back an identical AuditConfig.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "bowaudit/corpus.hpp"
#include "bowaudit/diagnostics.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/features.hpp"
#include "bowaudit/gbt.hpp"
#include "bowaudit/preprocess.hpp"
#include "bowaudit/stability.hpp"

namespace bowaudit {

using ojson = nlohmann::ordered_json;

struct CorpusSource {
  std::string path;
  CorpusFormat format = CorpusFormat::csv;
  CorpusSchema schema;

  friend bool operator==(const CorpusSource&, const CorpusSource&) = default;
};

// .jsonl and .json mean JSON lines; anything else is CSV.
inline CorpusFormat infer_format(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".jsonl" || ext == ".json" || ext == ".ndjson" ? CorpusFormat::jsonl
                                                                : CorpusFormat::csv;
}

inline CorpusSource labeled_source(std::string path) {
  CorpusSource s;
  s.format = infer_format(path);
  s.path = std::move(path);
  return s;
}

inline CorpusSource unlabeled_source(std::string path) {
  CorpusSource s;
  s.format = infer_format(path);
  s.path = std::move(path);
  s.schema = CorpusSchema::unlabeled();
  return s;
}

struct AuditConfig {
  std::optional<CorpusSource> labeled;
  std::optional<CorpusSource> unlabeled;
  std::optional<std::string> stopwords_path;  // absent: built-in list

  PipelineConfig pipeline;
  CountMode count_mode = CountMode::counts;
  GbtParams gbt;

  std::uint64_t seed = 1;  // for single runs
  SeedRange seeds;         // for sweeps and ablations
  double train_fraction = 0.7;
  bool stratified = false;
  std::optional<double> reference_precision = kReferencePrecision;

  SparsityCount sparsity_count = SparsityCount::distinct_features;
  std::optional<std::uint64_t> heaps_shuffle_seed;

  std::string out_dir = "bowaudit-out";
  unsigned workers = 0;

  std::string preset_name() const {
    const auto name = preset_name_of(pipeline);
    return name ? std::string(*name) : "custom";
  }

  SweepConfig sweep_config() const {
    SweepConfig s;
    s.seeds = seeds;
    s.preset_name = preset_name();
    s.pipeline = pipeline;
    s.gbt = gbt;
    s.train_fraction = train_fraction;
    s.stratified = stratified;
    s.reference_precision = reference_precision;
    s.workers = workers;
    return s;
  }

  SplitSpec split_spec() const { return {seed, train_fraction, stratified}; }

  void validate() const {
    pipeline.validate();
    gbt.validate();
    split_spec().validate();
    if (seeds.last < seeds.first) throw ConfigError("empty seed range");
    if (labeled && !labeled->schema.label) throw ConfigError("labeled corpus needs a label column");
    if (reference_precision && !(*reference_precision >= 0.0 && *reference_precision <= 1.0))
      throw ConfigError("reference_precision must lie in [0, 1]");
    if (out_dir.empty()) throw ConfigError("output directory must not be empty");
  }

  friend bool operator==(const AuditConfig&, const AuditConfig&) = default;
};

// ---- to JSON ---------------------------------------------------------------

inline ojson to_json(const CorpusSource& s) {
  ojson j;
  j["path"] = s.path;
  j["format"] = std::string(to_string(s.format));
  j["id"] = s.schema.id;
  j["text"] = s.schema.text;
  j["label"] = s.schema.label ? ojson(*s.schema.label) : ojson(nullptr);
  j["group"] = s.schema.group ? ojson(*s.schema.group) : ojson(nullptr);
  j["positive"] = s.schema.labels.positive;
  j["negative"] = s.schema.labels.negative;
  return j;
}

inline ojson to_json(const PipelineConfig& c) {
  ojson j;
  if (auto name = preset_name_of(c)) j["preset"] = std::string(*name);
  else j["preset"] = "custom";
  j["lowercase"] = c.lowercase;
  j["strip"] = {{"urls", c.strip.urls},
                {"punctuation", c.strip.punctuation},
                {"numbers", c.strip.numbers},
                {"special_chars", c.strip.special_chars}};
  j["remove_stopwords"] = c.remove_stopwords;
  j["stem"] = c.stem;
  j["rare_term_min_df_fraction"] =
      c.rare_term_min_df_fraction ? ojson(*c.rare_term_min_df_fraction) : ojson(nullptr);
  return j;
}

inline std::string_view to_string(CountMode m) { return m == CountMode::counts ? "counts" : "binary"; }

inline std::string_view to_string(SparsityCount m) {
  return m == SparsityCount::distinct_features ? "distinct_features" : "total_tokens";
}

inline ojson to_json(const AuditConfig& c) {
  ojson j;
  j["corpus"] = {{"labeled", c.labeled ? to_json(*c.labeled) : ojson(nullptr)},
                 {"unlabeled", c.unlabeled ? to_json(*c.unlabeled) : ojson(nullptr)}};
  j["stopwords"] = c.stopwords_path ? ojson(*c.stopwords_path) : ojson(nullptr);
  j["pipeline"] = to_json(c.pipeline);
  j["features"] = {{"count_mode", std::string(to_string(c.count_mode))}};
  j["gbt"] = to_json(c.gbt);
  j["evaluation"] = {
      {"seed", c.seed},
      {"seeds", to_string(c.seeds)},
      {"train_fraction", c.train_fraction},
      {"stratified", c.stratified},
      {"reference_precision", c.reference_precision ? ojson(*c.reference_precision) : ojson(nullptr)}};
  j["diagnostics"] = {
      {"sparsity_count", std::string(to_string(c.sparsity_count))},
      {"heaps_shuffle_seed", c.heaps_shuffle_seed ? ojson(*c.heaps_shuffle_seed) : ojson(nullptr)}};
  j["output"] = {{"dir", c.out_dir}, {"workers", c.workers}};
  return j;
}

// ---- from JSON -------------------------------------------------------------

namespace detail {

template <typename Fn>
void for_each_field(const nlohmann::json& j, std::string_view where, Fn&& fn) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!fn(it.key(), it.value()))
      throw ConfigError("unknown key '" + it.key() + "' in " + std::string(where));
  }
}

template <typename T>
T get_as(const nlohmann::json& v, std::string_view key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + std::string(key) + "' has the wrong type");
  }
}

inline std::optional<std::string> opt_string(const nlohmann::json& v, std::string_view key) {
  if (v.is_null()) return std::nullopt;
  return get_as<std::string>(v, key);
}

inline std::optional<double> opt_double(const nlohmann::json& v, std::string_view key) {
  if (v.is_null()) return std::nullopt;
  return get_as<double>(v, key);
}

inline CorpusSource source_from_json(const nlohmann::json& j, bool labeled) {
  CorpusSource s;
  if (!labeled) s.schema = CorpusSchema::unlabeled();
  bool format_given = false;
  for_each_field(j, labeled ? "corpus.labeled" : "corpus.unlabeled",
                 [&](const std::string& k, const nlohmann::json& v) {
                   if (k == "path") s.path = get_as<std::string>(v, k);
                   else if (k == "format") {
                     try {
                       s.format = parse_corpus_format(get_as<std::string>(v, k));
                     } catch (const std::exception& e) {
                       throw ConfigError(e.what());
                     }
                     format_given = true;
                   } else if (k == "id") s.schema.id = get_as<std::string>(v, k);
                   else if (k == "text") s.schema.text = get_as<std::string>(v, k);
                   else if (k == "label") s.schema.label = opt_string(v, k);
                   else if (k == "group") s.schema.group = opt_string(v, k);
                   else if (k == "positive") s.schema.labels.positive = get_as<std::vector<std::string>>(v, k);
                   else if (k == "negative") s.schema.labels.negative = get_as<std::vector<std::string>>(v, k);
                   else return false;
                   return true;
                 });
  if (s.path.empty()) throw ConfigError("corpus entry needs a path");
  if (!format_given) s.format = infer_format(s.path);
  return s;
}

// A preset, when named, is the starting point; explicit fields override it.
inline PipelineConfig pipeline_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("pipeline must be a JSON object");
  PipelineConfig c;
  if (j.contains("preset")) {
    const auto name = get_as<std::string>(j["preset"], "preset");
    if (name != "custom") c = preset(name);
  }
  for_each_field(j, "pipeline", [&](const std::string& k, const nlohmann::json& v) {
    if (k == "preset") return true;
    if (k == "lowercase") c.lowercase = get_as<bool>(v, k);
    else if (k == "remove_stopwords") c.remove_stopwords = get_as<bool>(v, k);
    else if (k == "stem") c.stem = get_as<bool>(v, k);
    else if (k == "rare_term_min_df_fraction") c.rare_term_min_df_fraction = opt_double(v, k);
    else if (k == "strip") {
      for_each_field(v, "pipeline.strip", [&](const std::string& sk, const nlohmann::json& sv) {
        if (sk == "urls") c.strip.urls = get_as<bool>(sv, sk);
        else if (sk == "punctuation") c.strip.punctuation = get_as<bool>(sv, sk);
        else if (sk == "numbers") c.strip.numbers = get_as<bool>(sv, sk);
        else if (sk == "special_chars") c.strip.special_chars = get_as<bool>(sv, sk);
        else return false;
        return true;
      });
    } else {
      return false;
    }
    return true;
  });
  c.validate();
  return c;
}

}  // namespace detail

inline AuditConfig audit_config_from_json(const nlohmann::json& j) {
  AuditConfig c;
  detail::for_each_field(j, "config", [&](const std::string& k, const nlohmann::json& v) {
    using namespace detail;
    if (k == "corpus") {
      for_each_field(v, "corpus", [&](const std::string& ck, const nlohmann::json& cv) {
        if (ck != "labeled" && ck != "unlabeled") return false;
        auto& slot = ck == "labeled" ? c.labeled : c.unlabeled;
        if (cv.is_null()) slot.reset();
        else if (cv.is_string()) {
          const auto path = get_as<std::string>(cv, ck);
          slot = ck == "labeled" ? labeled_source(path) : unlabeled_source(path);
        } else slot = source_from_json(cv, ck == "labeled");
        return true;
      });
    } else if (k == "stopwords") {
      c.stopwords_path = opt_string(v, k);
    } else if (k == "pipeline") {
      c.pipeline = v.is_string() ? preset(get_as<std::string>(v, k)) : pipeline_from_json(v);
    } else if (k == "features") {
      for_each_field(v, "features", [&](const std::string& fk, const nlohmann::json& fv) {
        if (fk != "count_mode") return false;
        const auto m = get_as<std::string>(fv, fk);
        if (m == "counts") c.count_mode = CountMode::counts;
        else if (m == "binary") c.count_mode = CountMode::binary;
        else throw ConfigError("count_mode must be 'counts' or 'binary'");
        return true;
      });
    } else if (k == "gbt") {
      try {
        c.gbt = gbt_params_from_json(v);
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("gbt parameters have the wrong type");
      }
    } else if (k == "evaluation") {
      for_each_field(v, "evaluation", [&](const std::string& ek, const nlohmann::json& ev) {
        if (ek == "seed") c.seed = get_as<std::uint64_t>(ev, ek);
        else if (ek == "seeds") c.seeds = parse_seed_range(get_as<std::string>(ev, ek));
        else if (ek == "train_fraction") c.train_fraction = get_as<double>(ev, ek);
        else if (ek == "stratified") c.stratified = get_as<bool>(ev, ek);
        else if (ek == "reference_precision") c.reference_precision = opt_double(ev, ek);
        else return false;
        return true;
      });
    } else if (k == "diagnostics") {
      for_each_field(v, "diagnostics", [&](const std::string& dk, const nlohmann::json& dv) {
        if (dk == "sparsity_count") {
          const auto m = get_as<std::string>(dv, dk);
          if (m == "distinct_features") c.sparsity_count = SparsityCount::distinct_features;
          else if (m == "total_tokens") c.sparsity_count = SparsityCount::total_tokens;
          else throw ConfigError("sparsity_count must be 'distinct_features' or 'total_tokens'");
        } else if (dk == "heaps_shuffle_seed") {
          if (dv.is_null()) c.heaps_shuffle_seed.reset();
          else c.heaps_shuffle_seed = get_as<std::uint64_t>(dv, dk);
        } else {
          return false;
        }
        return true;
      });
    } else if (k == "output") {
      for_each_field(v, "output", [&](const std::string& ok, const nlohmann::json& ov) {
        if (ok == "dir") c.out_dir = get_as<std::string>(ov, ok);
        else if (ok == "workers") c.workers = get_as<unsigned>(ov, ok);
        else return false;
        return true;
      });
    } else {
      return false;
    }
    return true;
  });
  c.validate();
  return c;
}

inline AuditConfig parse_audit_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return audit_config_from_json(j);
}

inline AuditConfig load_audit_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_audit_config(text);
}

// Checks that referenced inputs exist and the output directory can be
// created. Separate from validate() so configs can be parsed anywhere.
inline void check_paths(const AuditConfig& c, bool need_labeled, bool need_unlabeled) {
  namespace fs = std::filesystem;
  if (need_labeled && !c.labeled) throw ConfigError("no labeled corpus configured (--labeled)");
  if (need_unlabeled && !c.unlabeled) throw ConfigError("no unlabeled corpus configured (--unlabeled)");
  for (const auto* src : {c.labeled ? &*c.labeled : nullptr, c.unlabeled ? &*c.unlabeled : nullptr}) {
    if (src && !fs::is_regular_file(src->path)) throw DataError("missing file '" + src->path + "'");
  }
  if (c.stopwords_path && !fs::is_regular_file(*c.stopwords_path))
    throw DataError("missing stopword file '" + *c.stopwords_path + "'");
}

}  // namespace bowaudit
