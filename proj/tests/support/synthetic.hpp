#pragma once

// Seeded generator for tweet-like synthetic corpora with a tunable, weak
// class signal. Used by the tests, the acceptance suite and the sample data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bowaudit/corpus.hpp"
#include "bowaudit/rng.hpp"

namespace bowaudit::synth {

struct Options {
  std::size_t n_docs = 200;
  double positive_rate = 0.41;
  std::size_t background_types = 2500;
  double zipf_s = 1.1;
  std::size_t cue_words = 12;      // per class
  double cue_rate = 0.06;          // chance a token is a class cue word
  double label_noise = 0.15;       // chance the written label is flipped
  std::size_t min_len = 10;
  std::size_t max_len = 24;
  std::size_t n_groups = 0;        // 0: no group column
  bool labeled = true;
  bool decorate = true;            // URLs, mentions, digits, capitals, stopwords
  std::uint64_t seed = 1;
};

// Pronounceable alphabetic pseudo-word for index i (distinct for distinct i).
inline std::string pseudo_word(std::size_t i) {
  static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                 "br", "st", "tr", "pl", "gr", "sh"};
  static const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  constexpr std::size_t no = std::size(onsets), nv = std::size(vowels);
  std::string w;
  std::size_t x = i;
  do {
    w += onsets[x % no];
    x /= no;
    w += vowels[x % nv];
    x /= nv;
  } while (x > 0);
  return w + "q";  // trailing q keeps stems stable and avoids real words
}

class Generator {
 public:
  explicit Generator(Options opt) : opt_(std::move(opt)), rng_(opt_.seed) {
    double total = 0.0;
    cdf_.reserve(opt_.background_types);
    for (std::size_t r = 1; r <= opt_.background_types; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r), opt_.zipf_s);
      cdf_.push_back(total);
    }
    for (auto& c : cdf_) c /= total;
  }

  Corpus generate() {
    Corpus c;
    c.labeled = opt_.labeled;
    c.documents.reserve(opt_.n_docs);
    for (std::size_t i = 0; i < opt_.n_docs; ++i) c.documents.push_back(document(i));
    return c;
  }

 private:
  std::size_t zipf_rank() {
    const double u = rng_.uniform();
    return static_cast<std::size_t>(std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  }

  std::string background_word() { return pseudo_word(zipf_rank() + 2 * opt_.cue_words); }

  std::string cue_word(bool positive) {
    const auto k = rng_.bounded(static_cast<std::uint32_t>(opt_.cue_words));
    return pseudo_word(positive ? k : opt_.cue_words + k);
  }

  Document document(std::size_t i) {
    static const char* stop[] = {"the", "and", "is", "are", "to", "of", "we", "our", "for", "with"};
    const bool positive = rng_.uniform() < opt_.positive_rate;
    const auto len = opt_.min_len + rng_.bounded(static_cast<std::uint32_t>(opt_.max_len - opt_.min_len + 1));
    std::string text;
    for (std::size_t t = 0; t < len; ++t) {
      std::string w;
      const double u = rng_.uniform();
      if (u < opt_.cue_rate) {
        w = cue_word(positive);
      } else if (opt_.decorate && u < opt_.cue_rate + 0.25) {
        w = stop[rng_.bounded(std::size(stop))];
      } else {
        w = background_word();
      }
      if (opt_.decorate) {
        const double d = rng_.uniform();
        if (d < 0.05) w[0] = static_cast<char>(w[0] - 'a' + 'A');
        else if (d < 0.08) w = "@" + w;
        else if (d < 0.10) w += std::to_string(rng_.bounded(100));
        else if (d < 0.13) w += ",";
      }
      if (!text.empty()) text += ' ';
      text += w;
    }
    if (opt_.decorate && rng_.uniform() < 0.3) text += " https://t.co/x" + std::to_string(rng_.bounded(100000));

    Document d;
    d.id = "d" + std::to_string(i + 1);
    d.text = std::move(text);
    if (opt_.labeled) {
      const bool flip = rng_.uniform() < opt_.label_noise;
      d.label = (positive != flip) ? Label::positive : Label::negative;
    }
    if (opt_.n_groups > 0) {
      d.group = "agency" + std::to_string(1 + rng_.bounded(static_cast<std::uint32_t>(opt_.n_groups)));
    }
    return d;
  }

  Options opt_;
  Pcg32 rng_;
  std::vector<double> cdf_;
};

inline Corpus generate(const Options& opt) { return Generator(opt).generate(); }

// One positive and one negative cue word; each document contains exactly one
// of them plus shared filler, so the label is a function of a single feature.
inline Corpus separable(std::size_t n_docs, std::uint64_t seed = 7) {
  Pcg32 rng(seed);
  Corpus c;
  c.labeled = true;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const bool positive = i % 2 == 0 ? rng.uniform() < 0.8 : rng.uniform() < 0.2;
    Document d;
    d.id = "s" + std::to_string(i + 1);
    d.text = std::string(positive ? "veteran" : "budget") + " service " +
             (rng.uniform() < 0.5 ? "today" : "people");
    d.label = positive ? Label::positive : Label::negative;
    c.documents.push_back(std::move(d));
  }
  return c;
}

}  // namespace bowaudit::synth
