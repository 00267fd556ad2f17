// Acceptance suite: one status line per criterion.
//
//   PASS / FAIL  checked here
//   WARN         soft criterion missed; a sensitivity report follows
//   SKIP         needs the original labeled/uncoded tweet files
//
// Exit status is nonzero only when some criterion FAILs.
//
//   acceptance [--labeled PATH] [--uncoded PATH] [--config PATH] [--only N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bowaudit/cli.hpp"
#include "bowaudit/config.hpp"
#include "bowaudit/diagnostics.hpp"
#include "bowaudit/eval.hpp"
#include "bowaudit/gbt.hpp"
#include "bowaudit/stability.hpp"
#include "bowaudit/stemmer.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace bowaudit;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, warn, skip };

const char* label_of(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::warn: return "WARN";
    case Status::skip: return "SKIP";
  }
  return "?";
}

struct Outcome {
  Status status = Status::pass;
  std::string detail;
  std::vector<std::string> notes;  // printed indented under the status line
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail), {}}; }

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const MetricSelector kPosPrecision{MetricKind::precision, Label::positive};

// ---- data-dependent criteria ------------------------------------------------

struct DataInputs {
  AuditConfig config;  // schema and GBT settings; pipeline is set per criterion
  std::optional<Corpus> labeled;
  std::optional<Corpus> uncoded;
  StopwordList stopwords = default_stopwords();

  // Baseline sweep, shared by criteria 1 and 2.
  std::optional<SweepResult> baseline;
  double baseline_seconds = 0.0;

  const SweepResult& baseline_sweep() {
    if (!baseline) {
      SweepConfig s = config.sweep_config();
      s.seeds = {1, 1000};
      s.pipeline = preset("aw-baseline");
      s.preset_name = "aw-baseline";
      const auto t0 = std::chrono::steady_clock::now();
      baseline = run_sweep(*labeled, s, stopwords);
      baseline_seconds = seconds_since(t0);
    }
    return *baseline;
  }
};

Outcome skip_without(const DataInputs& in, bool need_uncoded) {
  std::string missing;
  if (!in.labeled) missing = "labeled";
  if (need_uncoded && !in.uncoded) missing += missing.empty() ? "uncoded" : " and uncoded";
  return {Status::skip, "needs the original " + missing + " tweet file (see --labeled/--uncoded)", {}};
}

std::vector<std::string> sensitivity_report(DataInputs& in) {
  std::vector<std::string> out{"hyperparameter sensitivity, seeds 1..200, aw-baseline (mean / sd / median positive precision):"};
  for (int rounds : {50, 100, 200}) {
    for (int depth : {3, 6}) {
      for (double eta : {0.1, 0.3}) {
        SweepConfig s = in.config.sweep_config();
        s.seeds = {1, 200};
        s.pipeline = preset("aw-baseline");
        s.gbt.rounds = rounds;
        s.gbt.max_depth = depth;
        s.gbt.learning_rate = eta;
        const auto agg = aggregate_sweep(run_sweep(*in.labeled, s, in.stopwords));
        const auto& m = agg.at(kPosPrecision);
        std::string line = "rounds " + std::to_string(rounds) + " depth " + std::to_string(depth) +
                           " eta " + fmt(eta, 1) + ": ";
        line += m.summary ? fmt(m.summary->mean) + " / " + fmt(m.summary->sd) + " / " + fmt(m.summary->median)
                          : std::string("undefined");
        line += " (" + std::to_string(m.undefined) + " undefined)";
        out.push_back(line);
      }
    }
  }
  return out;
}

Outcome criterion_1(DataInputs& in) {
  if (!in.labeled) return skip_without(in, false);
  const auto agg = aggregate_sweep(in.baseline_sweep());
  const auto& m = agg.at(kPosPrecision);
  if (!m.summary) return {Status::fail, "positive precision undefined on every seed", {}};
  const auto& s = *m.summary;
  const bool ok = std::abs(s.mean - 0.67) <= 0.05 && std::abs(s.sd - 0.14) <= 0.05 &&
                  std::abs(s.median - 0.69) <= 0.05 && in.baseline_seconds < 300.0;
  Outcome o{ok ? Status::pass : Status::warn,
            "positive precision mean " + fmt(s.mean) + " sd " + fmt(s.sd) + " median " + fmt(s.median) +
                " over " + std::to_string(m.defined) + " defined seeds, range " + fmt(s.min) + ".." +
                fmt(s.max) + ", " + fmt(in.baseline_seconds, 1) + " s; >= 0.867 on " +
                std::to_string(agg.count_ge_reference.value_or(0)) + " seeds",
            {}};
  if (!ok) o.notes = sensitivity_report(in);
  return o;
}

Outcome criterion_2(DataInputs& in) {
  if (!in.labeled) return skip_without(in, false);
  const auto agg = aggregate_sweep(in.baseline_sweep());
  const auto& neg_recall = agg.at({MetricKind::recall, Label::negative});
  const auto& neg_f1 = agg.at({MetricKind::f1, Label::negative});
  const auto& pos_f1 = agg.at({MetricKind::f1, Label::positive});
  if (!neg_recall.summary || !neg_f1.summary || !pos_f1.summary) {
    return {Status::warn, "a summary-table metric is undefined on every seed", {}};
  }
  const bool ok = neg_recall.summary->mean >= 0.8 && neg_f1.summary->mean > pos_f1.summary->mean;
  Outcome o{ok ? Status::pass : Status::warn,
            "negative recall mean " + fmt(neg_recall.summary->mean) + ", F1 negative " +
                fmt(neg_f1.summary->mean) + " vs positive " + fmt(pos_f1.summary->mean),
            {}};
  if (!ok) o.notes = sensitivity_report(in);
  return o;
}

Outcome criterion_3(DataInputs& in) {
  if (!in.labeled) return skip_without(in, false);
  struct Row {
    std::string_view preset;
    std::size_t before;
    std::optional<std::size_t> after;
  };
  const std::vector<Row> table{{"aw-baseline", 1473, 70},      {"no-stopwords", 1529, 96},
                               {"no-stemming", 1623, 47},      {"no-lowercase", 1515, 73},
                               {"no-rare-removal", 1473, {}},  {"no-stem-no-rare", 1623, {}},
                               {"no-lower-no-rare", 1515, {}}};
  auto within = [](std::size_t got, std::size_t want) {
    return std::abs(double(got) - double(want)) <= 0.03 * double(want);
  };
  bool ok = true, exact = true;
  Outcome o;
  for (const auto& r : table) {
    const auto p = apply_pipeline(*in.labeled, preset(r.preset), in.stopwords);
    const auto v = build_vocabulary(p);
    const bool has_after = v.min_df_fraction().has_value();
    bool row_ok = within(v.dict_size_before(), r.before) && has_after == r.after.has_value();
    bool row_exact = v.dict_size_before() == r.before;
    if (r.after && has_after) {
      row_ok = row_ok && within(v.dict_size_after(), *r.after);
      row_exact = row_exact && v.dict_size_after() == *r.after;
    }
    ok = ok && row_ok;
    exact = exact && row_exact;
    o.notes.push_back(std::string(r.preset) + ": " + std::to_string(v.dict_size_before()) + " -> " +
                      (has_after ? std::to_string(v.dict_size_after()) : std::string("NA")) + " (paper " +
                      std::to_string(r.before) + " -> " + (r.after ? std::to_string(*r.after) : std::string("NA")) +
                      ")" + (row_ok ? "" : "  outside 3%"));
  }
  o.status = ok ? Status::pass : Status::fail;
  o.detail = exact ? "all dictionary sizes match exactly"
                   : ok ? "within 3% of every cell; differences come from tokenization details, see notes"
                        : "dictionary sizes outside tolerance";
  return o;
}

Outcome criterion_4(DataInputs& in) {
  if (!in.labeled || !in.uncoded) return skip_without(in, true);
  const auto p = apply_pipeline(*in.labeled, preset("aw-baseline"), in.stopwords);
  const auto v = build_vocabulary(p);
  const auto h = sparsity_histogram(vectorize(p, v));
  const std::vector<std::size_t> want{25, 47, 52, 37};
  bool ok = true;
  std::string got;
  for (std::size_t n = 0; n < want.size(); ++n) {
    ok = ok && std::abs(double(h.count(n)) - double(want[n])) <= 2.0;
    got += (n ? "," : "") + std::to_string(h.count(n));
  }
  const auto up = apply_pipeline(*in.uncoded, preset("aw-baseline"), in.stopwords);
  const auto uh = sparsity_histogram(vectorize(up, v));
  ok = ok && std::abs(uh.fraction(0) - 0.25) <= 0.02;
  return verdict(ok, "labeled n=0..3: " + got + " (paper 25,47,52,37); uncoded n=0 fraction " +
                         fmt(uh.fraction(0)) + " (paper 0.25)");
}

Outcome criterion_5(DataInputs& in) {
  if (!in.labeled) return skip_without(in, false);
  const auto p = apply_pipeline(*in.labeled, preset("aw-baseline"), in.stopwords);
  const auto r = token_reduction(p, build_vocabulary(p));
  return verdict(std::abs(r.fraction - 0.95) <= 0.02,
                 "token reduction " + fmt(100 * r.fraction, 1) + "% (" + std::to_string(r.before) + " -> " +
                     std::to_string(r.after) + " tokens)");
}

Outcome criterion_6(DataInputs& in) {
  if (!in.labeled) return skip_without(in, false);
  SweepConfig base = in.config.sweep_config();
  base.seeds = {1, 1000};
  const auto results = run_ablations(*in.labeled, base, standard_presets(), in.stopwords);
  Outcome o;
  double baseline_median = 0.0;
  for (const auto& r : results) {
    if (r.name == "aw-baseline" && r.aggregate.at(kPosPrecision).summary)
      baseline_median = r.aggregate.at(kPosPrecision).summary->median;
  }
  bool ok = true;
  for (const auto& r : results) {
    const auto& m = r.aggregate.at(kPosPrecision);
    if (!m.summary) {
      ok = false;
      o.notes.push_back(r.name + ": undefined on every seed");
      continue;
    }
    const double med = m.summary->median;
    const bool row_ok = med >= 0.55 && med <= 0.75 && med <= baseline_median + 0.05;
    ok = ok && row_ok;
    o.notes.push_back(r.name + ": median " + fmt(med) + " sd " + fmt(m.summary->sd) + (row_ok ? "" : "  out of bounds"));
  }
  o.status = ok ? Status::pass : Status::fail;
  o.detail = "ablation medians in [0.55, 0.75], none above baseline " + fmt(baseline_median) + " + 0.05";
  return o;
}

// ---- unconditional criteria -------------------------------------------------

Outcome criterion_7() {
  std::ifstream f(BOWAUDIT_FIXTURE_DIR "/snowball_english.txt");
  if (!f) return {Status::fail, "oracle file missing", {}};
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::string w, s; f >> w >> s;) pairs.emplace_back(w, s);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t agree = 0;
  for (const auto& [w, s] : pairs) agree += stem_token(w) == s;
  const double secs = seconds_since(t0);
  return verdict(agree == pairs.size() && pairs.size() > 29000 && secs < 5.0,
                 std::to_string(agree) + "/" + std::to_string(pairs.size()) + " oracle pairs in " + fmt(secs, 2) + " s");
}

Outcome criterion_8() {
  Pcg32 rng(8);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + rng.bounded(60);
    std::vector<Label> pred, truth;
    for (std::uint32_t i = 0; i < n; ++i) {
      pred.push_back(rng.bounded(2) ? Label::positive : Label::negative);
      truth.push_back(rng.bounded(3) ? Label::positive : Label::negative);
    }
    const auto m = class_metrics(confusion(pred, truth));
    for (Label cls : {Label::positive, Label::negative}) {
      const auto want = oracle::recount(pred, truth, cls);
      const auto& got = m.of(cls);
      mismatches += !(got.precision == want.precision && got.recall == want.recall && got.f1 == want.f1);
    }
  }
  return verdict(mismatches == 0, "1000 random vectors, both classes, " + std::to_string(mismatches) + " mismatches");
}

Outcome criterion_9() {
  std::size_t checked = 0, bad = 0;
  std::vector<char> seen;
  for (double f : {0.5, 0.7, 0.9}) {
    for (std::size_t n = 2; n <= 1000; ++n) {
      const std::size_t k = static_cast<std::size_t>(std::floor(f * double(n) + 1e-9));
      for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Split s = make_split(n, {seed, f, false});
        ++checked;
        seen.assign(n, 0);
        bool ok = s.train.size() == k && s.train.size() + s.test.size() == n;
        for (const auto* part : {&s.train, &s.test}) {
          for (auto i : *part) {
            ok = ok && i < n && !seen[i];
            if (i < n) seen[i] = 1;
          }
        }
        if (seed == 1 || seed == 100) ok = ok && make_split(n, {seed, f, false}).train == s.train;
        bad += !ok;
      }
    }
  }
  return verdict(bad == 0, std::to_string(checked) + " splits (n 2..1000, fractions 0.5/0.7/0.9, seeds 1..100), " +
                               std::to_string(bad) + " violations");
}

Outcome criterion_10() {
  Outcome o;
  bool ok = true;

  Pcg32 rng(10);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double m = (rng.uniform() - 0.5) * 10.0;
    for (double y : {0.0, 1.0}) {
      const double eps = 1e-5;
      const double fd = (logistic_loss(m + eps, y) - logistic_loss(m - eps, y)) / (2 * eps);
      const double g = sigmoid(m) - y;
      worst = std::max(worst, std::abs(fd - g) / std::max(std::abs(g), 1e-12));
    }
  }
  ok = ok && worst < 1e-6;
  o.notes.push_back("gradient vs central differences: worst relative error " + std::to_string(worst));

  synth::Options weak;
  const auto data = prepare(synth::generate(weak), PipelineConfig{});
  TrainingLog log;
  train_gbt(data.matrix, data.labels, GbtParams{}, &log);
  bool monotone = true;
  for (std::size_t k = 1; k < log.mean_loss.size(); ++k) monotone = monotone && log.mean_loss[k] <= log.mean_loss[k - 1] + 1e-9;
  ok = ok && monotone;
  o.notes.push_back("training loss over 100 rounds: " + fmt(log.mean_loss.front(), 4) + " -> " +
                    fmt(log.mean_loss.back(), 4) + (monotone ? ", non-increasing" : ", INCREASED"));

  std::size_t agree = 0, total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 4 + rng.bounded(9), features = 1 + rng.bounded(4);
    const auto d = oracle::random_dense(rng, rows, features, 4);
    const auto y = oracle::random_labels(rng, rows);
    GbtParams p;
    p.rounds = 1;
    p.min_child_weight = 0.0;
    const auto want = oracle::root_split(d, y, p);
    const GbtModel model = train_gbt(d.sparse(), y, p);
    const TreeNode& root = model.trees[0].nodes[0];
    ++total;
    if (want.feature < 0) {
      agree += root.is_leaf();
    } else if (!root.is_leaf() && std::abs(root.gain - want.gain) <= 1e-12) {
      agree += want.gain - want.runner_up <= 1e-9 ||
               (root.feature == want.feature && root.threshold == want.threshold);
    }
  }
  ok = ok && agree == total;
  o.notes.push_back("root split vs exhaustive gain search: " + std::to_string(agree) + "/" + std::to_string(total));

  const auto sep = prepare(synth::separable(200), PipelineConfig{});
  const auto model = train_gbt(sep.matrix, sep.labels, GbtParams{});
  std::size_t correct = 0;
  for (std::size_t i = 0; i < sep.labels.size(); ++i) correct += predict_label(model, sep.matrix.rows[i]) == sep.labels[i];
  SweepConfig s;
  s.seeds = {1, 1000};
  const auto agg = aggregate_sweep(run_sweep_prepared(sep, s));
  const auto& prec = agg.at(kPosPrecision);
  const bool sep_ok = correct == sep.labels.size() && prec.summary && prec.summary->sd == 0.0 && prec.undefined == 0;
  ok = ok && sep_ok;
  o.notes.push_back("separable corpus: training accuracy " + std::to_string(correct) + "/" +
                    std::to_string(sep.labels.size()) + ", 1000-seed precision sd " +
                    (prec.summary ? fmt(prec.summary->sd, 6) : std::string("undefined")));

  o.status = ok ? Status::pass : Status::fail;
  o.detail = "gradient, monotone loss, split oracle, separable corpus";
  return o;
}

Outcome criterion_11() {
  const fs::path dir = fs::temp_directory_path() / ("bowaudit_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  synth::Options opt;
  {
    std::ofstream f(dir / "labeled.csv", std::ios::binary);
    write_corpus(f, synth::generate(opt), CorpusFormat::csv);
  }
  AuditConfig c;
  c.labeled = labeled_source((dir / "labeled.csv").string());
  c.out_dir = (dir / "out").string();
  {
    std::ofstream f(dir / "config.json");
    f << to_json(c).dump(2);
  }
  auto sweep_once = [&]() -> std::optional<std::string> {
    const std::string cfg = (dir / "config.json").string();
    const char* argv[] = {"bowaudit", "sweep", "--config", cfg.c_str()};
    std::ostringstream out, err;
    if (run_command(4, argv, out, err) != kExitOk) return std::nullopt;
    std::ifstream f(dir / "out" / "sweep.jsonl", std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  };
  const auto a = sweep_once();
  const auto b = sweep_once();
  fs::remove_all(dir);
  if (!a || !b) return {Status::fail, "sweep invocation failed", {}};
  const auto lines = std::count(a->begin(), a->end(), '\n');
  return verdict(*a == *b, "two `sweep` runs (seeds 1..1000, " + std::to_string(lines) + " JSONL lines, " +
                               std::to_string(a->size()) + " bytes) " + (*a == *b ? "identical" : "DIFFER"));
}

Outcome criterion_12() {
  Outcome o;
  auto sweep_stats = [&](std::size_t n_docs) {
    synth::Options opt;
    opt.n_docs = n_docs;
    SweepConfig s;
    s.seeds = {1, 1000};
    const auto t0 = std::chrono::steady_clock::now();
    const auto agg = aggregate_sweep(run_sweep(synth::generate(opt), s));
    const auto& m = agg.at(kPosPrecision);
    o.notes.push_back(std::to_string(n_docs) + " docs: positive precision mean " + fmt(m.summary->mean) +
                      " sd " + fmt(m.summary->sd) + " range " + fmt(m.summary->min) + ".." + fmt(m.summary->max) +
                      ", " + std::to_string(m.undefined) + " undefined, " + fmt(seconds_since(t0), 1) + " s");
    return *m.summary;
  };
  const Summary small = sweep_stats(200);
  const Summary large = sweep_stats(5000);
  const double range = small.max - small.min;
  const double shrink = 1.0 - large.sd / small.sd;
  o.status = range >= 0.3 && shrink >= 0.5 ? Status::pass : Status::fail;
  o.detail = "200-doc range " + fmt(range) + " (>= 0.3), sd shrink at 5000 docs " + fmt(100 * shrink, 1) + "% (>= 50%)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bowaudit acceptance criteria"};
  std::string labeled_path = BOWAUDIT_SOURCE_DIR "/data/aw/labeled.csv";
  std::string uncoded_path = BOWAUDIT_SOURCE_DIR "/data/aw/uncoded.csv";
  std::string config_path;
  std::vector<int> only;
  app.add_option("--labeled", labeled_path, "the 200-tweet labeled file");
  app.add_option("--uncoded", uncoded_path, "the uncoded tweet file");
  app.add_option("--config", config_path, "audit config giving corpus schemas and GBT settings");
  app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  DataInputs in;
  try {
    if (!config_path.empty()) in.config = load_audit_config(config_path);
    if (in.config.stopwords_path) in.stopwords = load_stopwords(*in.config.stopwords_path);
    if (fs::is_regular_file(labeled_path)) {
      CorpusSource src = in.config.labeled.value_or(labeled_source(labeled_path));
      src.path = labeled_path;
      in.labeled = load_corpus(src.path, src.format, src.schema);
    }
    if (fs::is_regular_file(uncoded_path)) {
      CorpusSource src = in.config.unlabeled.value_or(unlabeled_source(uncoded_path));
      src.path = uncoded_path;
      in.uncoded = load_corpus(src.path, src.format, src.schema);
    }
  } catch (const std::exception& e) {
    std::cerr << "cannot load inputs: " << e.what() << '\n';
    return 2;
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"baseline sweep precision distribution", [&] { return criterion_1(in); }},
      {"summary table shape", [&] { return criterion_2(in); }},
      {"dictionary sizes", [&] { return criterion_3(in); }},
      {"sparsity histogram", [&] { return criterion_4(in); }},
      {"token reduction", [&] { return criterion_5(in); }},
      {"ablation medians", [&] { return criterion_6(in); }},
      {"stemmer oracle", criterion_7},
      {"metrics oracle", criterion_8},
      {"split properties", criterion_9},
      {"gradient boosting checks", criterion_10},
      {"end-to-end determinism", criterion_11},
      {"synthetic stability demonstration", criterion_12},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what(), {}};
    }
    failures += o.status == Status::fail;
    std::cout << label_of(o.status) << ' ' << (id < 10 ? " " : "") << id << "  " << criteria[i].first << ": "
              << o.detail << " [" << fmt(seconds_since(t0), 1) << " s]\n";
    for (const auto& n : o.notes) std::cout << "          " << n << '\n';
    std::cout.flush();
  }
  return failures ? 1 : 0;
}
