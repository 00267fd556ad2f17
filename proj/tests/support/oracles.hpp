#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite. Written from the formulas, not from the library code.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "bowaudit/corpus.hpp"
#include "bowaudit/features.hpp"
#include "bowaudit/gbt.hpp"
#include "bowaudit/rng.hpp"

namespace bowaudit::oracle {

// Dense count matrix for tiny exhaustive checks.
struct Dense {
  std::vector<std::vector<std::uint32_t>> x;  // rows x features
  std::size_t n_features = 0;

  DocTermMatrix sparse() const {
    DocTermMatrix m;
    m.n_terms = n_features;
    for (const auto& r : x) {
      SparseRow row;
      for (std::size_t f = 0; f < r.size(); ++f)
        if (r[f]) row.push_back({static_cast<std::uint32_t>(f), r[f]});
      m.rows.push_back(row);
    }
    return m;
  }
};

inline Dense random_dense(Pcg32& rng, std::size_t rows, std::size_t features, std::uint32_t max_count) {
  Dense d;
  d.n_features = features;
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<std::uint32_t> r(features);
    for (auto& v : r) v = rng.bounded(3) == 0 ? 1 + rng.bounded(max_count) : 0;
    d.x.push_back(r);
  }
  return d;
}

inline std::vector<Label> random_labels(Pcg32& rng, std::size_t n) {
  std::vector<Label> y;
  for (std::size_t i = 0; i < n; ++i) y.push_back(rng.bounded(2) ? Label::positive : Label::negative);
  return y;
}

struct RootSplit {
  int feature = -1;  // -1: no split pays off
  double threshold = 0.0;
  double gain = 0.0;
  double runner_up = -std::numeric_limits<double>::infinity();
};

// Exhaustive first-round root split search over dense values.
inline RootSplit root_split(const Dense& d, const std::vector<Label>& y, const GbtParams& p) {
  const double prob = sigmoid(p.base_margin);
  std::vector<double> g, h;
  for (auto l : y) {
    g.push_back(prob - (l == Label::positive ? 1.0 : 0.0));
    h.push_back(prob * (1.0 - prob));
  }
  double G = 0, H = 0;
  for (std::size_t i = 0; i < y.size(); ++i) G += g[i], H += h[i];
  auto score = [&](double gs, double hs) { return gs * gs / (hs + p.l2_lambda); };

  RootSplit best;
  std::vector<double> gains;
  for (std::size_t f = 0; f < d.n_features; ++f) {
    std::set<std::uint32_t> values;
    for (const auto& r : d.x) values.insert(r[f]);
    const std::vector<std::uint32_t> v(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double thr = (v[k] + v[k + 1]) / 2.0;
      double gl = 0, hl = 0;
      for (std::size_t i = 0; i < y.size(); ++i)
        if (d.x[i][f] < thr) gl += g[i], hl += h[i];
      const double gr = G - gl, hr = H - hl;
      if (hl < p.min_child_weight || hr < p.min_child_weight) continue;
      const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(G, H)) - p.gamma;
      gains.push_back(gain);
      if (best.feature < 0 || gain > best.gain) {
        best.feature = static_cast<int>(f);
        best.threshold = thr;
        best.gain = gain;
      }
    }
  }
  for (double x : gains)
    if (x < best.gain - 1e-12) best.runner_up = std::max(best.runner_up, x);
  if (best.feature >= 0 && best.gain <= 0.0) best.feature = -1;
  return best;
}

struct Recount {
  std::optional<double> precision, recall, f1;
};

// Per-class metrics straight from prediction/truth pairs.
inline Recount recount(const std::vector<Label>& pred, const std::vector<Label>& truth, Label cls) {
  std::size_t tp = 0, predicted = 0, actual = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    tp += pred[i] == cls && truth[i] == cls;
    predicted += pred[i] == cls;
    actual += truth[i] == cls;
  }
  Recount r;
  if (predicted) r.precision = double(tp) / double(predicted);
  if (actual) r.recall = double(tp) / double(actual);
  if (r.precision && r.recall && *r.precision + *r.recall > 0)
    r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
  return r;
}

}  // namespace bowaudit::oracle
