#pragma once

// Gradient-boosted regression trees for binary classification with the
// logistic loss, grown with second-order (Newton) statistics.
//
// Per round every training row gets p = sigmoid(margin), g = p - y and
// h = p (1 - p). Trees grow depth-first; a node is split on the candidate that
// maximises
//
//   gain = 1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma
//
// over features in ascending index and thresholds in ascending order (the
// first strictly larger gain wins). Thresholds are midpoints between
// consecutive distinct values present in the node; rows go left iff
// value < threshold. A node becomes a leaf at max_depth, when no candidate has
// both children with hessian sum >= min_child_weight, or when the best gain
// is <= 0. Leaf weight is -G/(H+lambda); the model margin is
// base_margin + learning_rate * sum of tree outputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bowaudit/corpus.hpp"
#include "bowaudit/error.hpp"
#include "bowaudit/features.hpp"

namespace bowaudit {

struct GbtParams {
  int rounds = 100;
  double learning_rate = 0.3;
  int max_depth = 6;
  double min_child_weight = 1.0;
  double l2_lambda = 1.0;
  double gamma = 0.0;
  double base_margin = 0.0;

  void validate() const {
    if (rounds < 0) throw ConfigError("rounds must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning_rate must be positive");
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (!(min_child_weight >= 0.0)) throw ConfigError("min_child_weight must be >= 0");
    if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be >= 0");
    if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
    if (!std::isfinite(base_margin)) throw ConfigError("base_margin must be finite");
  }

  friend bool operator==(const GbtParams&, const GbtParams&) = default;
};

inline double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// -[y log p + (1 - y) log(1 - p)] with p = sigmoid(margin), computed stably.
inline double logistic_loss(double margin, double y) {
  const double softplus = margin > 0.0 ? margin + std::log1p(std::exp(-margin))
                                       : std::log1p(std::exp(margin));
  return softplus - y * margin;
}

// Value of feature `index` in a sparse row (0 when absent).
inline double feature_value(std::span<const FeatureCount> row, std::uint32_t index) {
  const auto it = std::lower_bound(row.begin(), row.end(), index,
                                   [](const FeatureCount& fc, std::uint32_t i) { return fc.index < i; });
  return (it != row.end() && it->index == index) ? static_cast<double>(it->count) : 0.0;
}

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double weight = 0.0;  // -G/(H+lambda); the output for leaves
  double gain = 0.0;    // split gain, internal nodes only
  double cover = 0.0;   // hessian sum of the node's training rows

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const FeatureCount> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(
          feature_value(row, static_cast<std::uint32_t>(n.feature)) < n.threshold ? n.left : n.right);
    }
    return nodes[i].weight;
  }

  int depth() const { return depth_from(0); }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  int depth_from(std::size_t i) const {
    const auto& n = nodes[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(static_cast<std::size_t>(n.left)),
                        depth_from(static_cast<std::size_t>(n.right)));
  }
};

struct GbtModel {
  std::vector<Tree> trees;
  GbtParams params;
  std::size_t n_features = 0;

  double margin(std::span<const FeatureCount> row) const {
    for (const auto& fc : row) {
      if (fc.index >= n_features) {
        throw DataError("feature index " + std::to_string(fc.index) + " out of range (model has " +
                        std::to_string(n_features) + " features)");
      }
    }
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(row);
    return params.base_margin + params.learning_rate * sum;
  }

  friend bool operator==(const GbtModel&, const GbtModel&) = default;
};

struct SplitRecord {
  int round = 0;
  int node = 0;
  int feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

struct TrainingLog {
  std::vector<double> mean_loss;  // [0] before the first tree, [k] after round k
  std::vector<SplitRecord> splits;
};

namespace detail {

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// One nonzero cell of the training matrix.
struct Entry {
  std::uint32_t feature;
  std::uint32_t value;
  std::uint32_t row;
};

// All nonzero cells ordered by (feature, value, row). Built once per training
// run; every node's entries are an order-preserving subsequence of it, so the
// split search never sorts.
inline std::vector<Entry> presort(const DocTermMatrix& dtm) {
  std::vector<Entry> out;
  for (std::size_t r = 0; r < dtm.n_docs(); ++r) {
    for (const auto& fc : dtm.rows[r]) out.push_back({fc.index, fc.count, static_cast<std::uint32_t>(r)});
  }
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    if (a.feature != b.feature) return a.feature < b.feature;
    if (a.value != b.value) return a.value < b.value;
    return a.row < b.row;
  });
  return out;
}

class TreeGrower {
 public:
  TreeGrower(const DocTermMatrix& dtm, const GbtParams& params, std::span<const double> grad,
             std::span<const double> hess)
      : dtm_(dtm), params_(params), grad_(grad), hess_(hess), left_side_(dtm.n_docs(), 0) {}

  // Returns the tree; leaf_of[r] receives the leaf each training row lands in.
  // `rows` ascending; `entries` the presorted cells of those rows.
  Tree grow(std::vector<std::uint32_t> rows, std::vector<Entry> entries,
            std::vector<std::int32_t>& leaf_of, std::vector<SplitRecord>* splits, int round) {
    tree_ = Tree{};
    tree_.nodes.emplace_back();
    leaf_of_ = &leaf_of;
    splits_ = splits;
    round_ = round;
    grow_node(0, std::move(rows), std::move(entries), 0);
    return std::move(tree_);
  }

 private:
  void grow_node(std::size_t node, std::vector<std::uint32_t> rows, std::vector<Entry> entries,
                 int depth) {
    double G = 0.0, H = 0.0;
    for (auto r : rows) {
      G += grad_[r];
      H += hess_[r];
    }
    tree_.nodes[node].weight = -G / (H + params_.l2_lambda);
    tree_.nodes[node].cover = H;

    SplitCandidate best;
    if (depth < params_.max_depth) best = find_split(rows.size(), entries, G, H);
    if (best.feature < 0) {
      for (auto r : rows) (*leaf_of_)[r] = static_cast<std::int32_t>(node);
      return;
    }

    std::vector<std::uint32_t> left, right;
    for (auto r : rows) {
      const double v = feature_value(dtm_.rows[r], static_cast<std::uint32_t>(best.feature));
      const bool go_left = v < best.threshold;
      left_side_[r] = go_left ? 1 : 0;
      (go_left ? left : right).push_back(r);
    }
    std::vector<Entry> left_entries, right_entries;
    left_entries.reserve(entries.size());
    right_entries.reserve(entries.size());
    for (const auto& e : entries) (left_side_[e.row] ? left_entries : right_entries).push_back(e);
    rows = {};
    entries = {};

    const auto l = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes.emplace_back();
    auto& n = tree_.nodes[node];
    n.feature = best.feature;
    n.threshold = best.threshold;
    n.gain = best.gain;
    n.left = l;
    n.right = l + 1;
    if (splits_) {
      splits_->push_back({round_, static_cast<int>(node), best.feature, best.threshold, best.gain});
    }
    grow_node(static_cast<std::size_t>(l), std::move(left), std::move(left_entries), depth + 1);
    grow_node(static_cast<std::size_t>(l + 1), std::move(right), std::move(right_entries), depth + 1);
  }

  double score(double g, double h) const { return g * g / (h + params_.l2_lambda); }

  // Candidates per feature: the midpoints between consecutive distinct values,
  // where rows lacking the feature contribute the value 0.
  SplitCandidate find_split(std::size_t n_rows, const std::vector<Entry>& entries, double G,
                            double H) const {
    const double parent = score(G, H);
    SplitCandidate best;
    std::size_t i = 0;
    while (i < entries.size()) {
      const std::uint32_t f = entries[i].feature;
      std::size_t end = i;
      double g_nz = 0.0, h_nz = 0.0;
      while (end < entries.size() && entries[end].feature == f) {
        g_nz += grad_[entries[end].row];
        h_nz += hess_[entries[end].row];
        ++end;
      }
      const std::size_t zero_rows = n_rows - (end - i);

      double GL = 0.0, HL = 0.0;
      double prev_value = 0.0;
      bool have_prev = false;
      if (zero_rows > 0) {
        GL = G - g_nz;
        HL = H - h_nz;
        have_prev = true;
      }
      std::size_t k = i;
      while (k < end) {
        const std::uint32_t v = entries[k].value;
        if (have_prev) consider(best, f, (prev_value + v) / 2.0, GL, HL, G, H, parent);
        while (k < end && entries[k].value == v) {
          GL += grad_[entries[k].row];
          HL += hess_[entries[k].row];
          ++k;
        }
        prev_value = v;
        have_prev = true;
      }
      i = end;
    }
    return best;
  }

  void consider(SplitCandidate& best, std::uint32_t feature, double threshold, double GL, double HL,
                double G, double H, double parent) const {
    const double GR = G - GL;
    const double HR = H - HL;
    if (HL < params_.min_child_weight || HR < params_.min_child_weight) return;
    const double gain = 0.5 * (score(GL, HL) + score(GR, HR) - parent) - params_.gamma;
    if (gain > best.gain) {
      best.feature = static_cast<int>(feature);
      best.threshold = threshold;
      best.gain = gain;
    }
  }

  const DocTermMatrix& dtm_;
  const GbtParams& params_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  std::vector<std::uint8_t> left_side_;
  Tree tree_;
  std::vector<std::int32_t>* leaf_of_ = nullptr;
  std::vector<SplitRecord>* splits_ = nullptr;
  int round_ = 0;
};

inline double mean_loss(std::span<const double> margins, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) s += logistic_loss(margins[i], y[i]);
  return s / static_cast<double>(margins.size());
}

}  // namespace detail

inline GbtModel train_gbt(const DocTermMatrix& dtm, std::span<const Label> labels,
                          const GbtParams& params, TrainingLog* log = nullptr) {
  params.validate();
  if (dtm.n_docs() == 0) throw DataError("cannot train on an empty training set");
  if (labels.size() != dtm.n_docs()) {
    throw DataError("label vector has " + std::to_string(labels.size()) + " entries for " +
                    std::to_string(dtm.n_docs()) + " documents");
  }
  for (const auto& row : dtm.rows) {
    for (const auto& fc : row) {
      if (fc.index >= dtm.n_terms) throw DataError("feature index out of range in training matrix");
    }
  }

  const std::size_t n = dtm.n_docs();
  std::vector<double> y(n), margin(n, params.base_margin), grad(n), hess(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == Label::positive ? 1.0 : 0.0;

  GbtModel model;
  model.params = params;
  model.n_features = dtm.n_terms;
  model.trees.reserve(static_cast<std::size_t>(params.rounds));
  if (log) {
    log->mean_loss.clear();
    log->splits.clear();
    log->mean_loss.push_back(detail::mean_loss(margin, y));
  }

  std::vector<std::uint32_t> all_rows(n);
  for (std::size_t i = 0; i < n; ++i) all_rows[i] = static_cast<std::uint32_t>(i);
  std::vector<std::int32_t> leaf_of(n, 0);
  const std::vector<detail::Entry> entries = detail::presort(dtm);
  detail::TreeGrower grower(dtm, model.params, grad, hess);

  for (int round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - y[i];
      hess[i] = p * (1.0 - p);
    }
    Tree tree = grower.grow(all_rows, entries, leaf_of, log ? &log->splits : nullptr, round);
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += params.learning_rate * tree.nodes[static_cast<std::size_t>(leaf_of[i])].weight;
    }
    model.trees.push_back(std::move(tree));
    if (log) log->mean_loss.push_back(detail::mean_loss(margin, y));
  }
  return model;
}

inline double predict_prob(const GbtModel& model, std::span<const FeatureCount> row) {
  return sigmoid(model.margin(row));
}

// Positive iff predict_prob >= threshold.
inline Label predict_label(const GbtModel& model, std::span<const FeatureCount> row,
                           double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  return predict_prob(model, row) >= threshold ? Label::positive : Label::negative;
}

// Total split gain per feature, normalised to sum to 1. Empty for models
// without any split.
inline std::map<std::size_t, double> feature_importance(const GbtModel& model) {
  std::map<std::size_t, double> total;
  double sum = 0.0;
  for (const auto& t : model.trees) {
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) continue;
      total[static_cast<std::size_t>(n.feature)] += n.gain;
      sum += n.gain;
    }
  }
  if (sum <= 0.0) return {};
  for (auto& [f, g] : total) g /= sum;
  return total;
}

// ---- JSON model dump -------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json to_json(const GbtParams& p) {
  return {{"rounds", p.rounds},
          {"learning_rate", p.learning_rate},
          {"max_depth", p.max_depth},
          {"min_child_weight", p.min_child_weight},
          {"l2_lambda", p.l2_lambda},
          {"gamma", p.gamma},
          {"base_margin", p.base_margin}};
}

template <typename Json>
GbtParams gbt_params_from_json(const Json& j, GbtParams p = {}) {
  if (!j.is_object()) throw ConfigError("gbt params must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "rounds") p.rounds = it->template get<int>();
    else if (k == "learning_rate") p.learning_rate = it->template get<double>();
    else if (k == "max_depth") p.max_depth = it->template get<int>();
    else if (k == "min_child_weight") p.min_child_weight = it->template get<double>();
    else if (k == "l2_lambda") p.l2_lambda = it->template get<double>();
    else if (k == "gamma") p.gamma = it->template get<double>();
    else if (k == "base_margin") p.base_margin = it->template get<double>();
    else throw ConfigError("unknown gbt parameter '" + k + "'");
  }
  p.validate();
  return p;
}

inline nlohmann::ordered_json to_json(const GbtModel& m) {
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const auto& t : m.trees) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.weight}, {"cover", n.cover}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"gain", n.gain},
                         {"cover", n.cover},
                         {"weight", n.weight}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return {{"format", "bowaudit-gbt"},
          {"version", kModelFormatVersion},
          {"n_features", m.n_features},
          {"params", to_json(m.params)},
          {"trees", std::move(trees)}};
}

template <typename Json>
GbtModel gbt_model_from_json(const Json& j) {
  try {
    if (j.at("format").template get<std::string>() != "bowaudit-gbt")
      throw DataError("not a bowaudit model dump");
    if (j.at("version").template get<int>() != kModelFormatVersion)
      throw DataError("unsupported model format version");
    GbtModel m;
    m.n_features = j.at("n_features").template get<std::size_t>();
    m.params = gbt_params_from_json(j.at("params"));
    for (const auto& jt : j.at("trees")) {
      Tree t;
      for (const auto& jn : jt) {
        TreeNode n;
        n.cover = jn.at("cover").template get<double>();
        if (jn.contains("leaf")) {
          n.weight = jn.at("leaf").template get<double>();
        } else {
          n.feature = jn.at("feature").template get<std::int32_t>();
          n.threshold = jn.at("threshold").template get<double>();
          n.left = jn.at("left").template get<std::int32_t>();
          n.right = jn.at("right").template get<std::int32_t>();
          n.gain = jn.at("gain").template get<double>();
          n.weight = jn.at("weight").template get<double>();
        }
        t.nodes.push_back(n);
      }
      const auto count = static_cast<std::int32_t>(t.nodes.size());
      if (count == 0) throw DataError("model dump contains an empty tree");
      for (const auto& n : t.nodes) {
        if (!n.is_leaf() && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count ||
                             static_cast<std::size_t>(n.feature) >= m.n_features)) {
          throw DataError("model dump has an invalid node reference");
        }
      }
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model dump: ") + e.what());
  }
}

}  // namespace bowaudit
