#include "polishsense/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "polishsense/error.hpp"
#include "polishsense/rng.hpp"

namespace polishsense {

double RegressionTree::predict(const Eigen::VectorXd& x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x(n.feature) <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t RegressionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [node, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[node].feature >= 0) {
      stack.push_back({nodes[node].left, d + 1});
      stack.push_back({nodes[node].right, d + 1});
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.feature < 0; }));
}

Eigen::VectorXd RegressionTree::raw_importance() const {
  Eigen::VectorXd imp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(feature_count));
  for (const auto& n : nodes) {
    if (n.feature >= 0) imp(n.feature) += n.impurity_decrease;
  }
  return imp;
}

FeatureSampler::FeatureSampler(std::size_t per_split, std::uint64_t seed)
    : per_split_(per_split), state_(seed) {}

std::vector<std::size_t> FeatureSampler::draw(std::size_t feature_count) {
  std::vector<std::size_t> all(feature_count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::size_t k = std::min(per_split_, feature_count);
  if (k == feature_count) return all;
  Rng rng(state_);
  state_ = mix_seed(state_);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(feature_count - i);
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params,
              FeatureSampler* sampler)
      : x_(x), y_(y), params_(params), sampler_(sampler) {
    tree_.feature_count = static_cast<std::size_t>(x.cols());
  }

  RegressionTree build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t n = rows.size();
    tree_.nodes[id].samples = n;

    const double first = y_(static_cast<Eigen::Index>(rows.front()));
    const bool constant = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) {
      return y_(static_cast<Eigen::Index>(r)) == first;
    });
    double sum = 0.0;
    for (const auto r : rows) sum += y_(static_cast<Eigen::Index>(r));
    const double mean = constant ? first : sum / static_cast<double>(n);
    tree_.nodes[id].value = mean;

    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    if (constant || depth_capped || n < 2 * params_.min_samples_leaf) return id;

    double sse = 0.0;
    for (const auto r : rows) {
      const double d = y_(static_cast<Eigen::Index>(r)) - mean;
      sse += d * d;
    }
    const Split best = find_split(rows, mean, sse);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (const auto r : rows) {
      (x_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    tree_.nodes[id].impurity_decrease = std::max(0.0, sse - best.impurity);
    const int l = grow(std::move(left), depth + 1);
    tree_.nodes[id].left = l;
    const int r = grow(std::move(right), depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  Split find_split(const std::vector<std::size_t>& rows, double mean, double parent_sse) {
    const std::size_t n = rows.size();
    const std::size_t leaf = params_.min_samples_leaf;
    // Candidates within this band of the best count as ties, so partitions
    // that differ only by summation order resolve to the lowest index.
    const double tie_band = 1e-12 * parent_sse;

    std::vector<std::size_t> features;
    if (sampler_) {
      features = sampler_->draw(tree_.feature_count);
    } else {
      features.resize(tree_.feature_count);
      std::iota(features.begin(), features.end(), std::size_t{0});
    }

    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(rows);
    std::vector<double> centred(n);
    for (const std::size_t f : features) {
      const auto col = static_cast<Eigen::Index>(f);
      std::copy(rows.begin(), rows.end(), order.begin());
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x_(static_cast<Eigen::Index>(a), col) < x_(static_cast<Eigen::Index>(b), col);
      });
      double total1 = 0.0, total2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        centred[i] = y_(static_cast<Eigen::Index>(order[i])) - mean;
        total1 += centred[i];
        total2 += centred[i] * centred[i];
      }
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        s1 += centred[i];
        s2 += centred[i] * centred[i];
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < leaf) continue;
        if (nr < leaf) break;
        const double a = x_(static_cast<Eigen::Index>(order[i]), col);
        const double b = x_(static_cast<Eigen::Index>(order[i + 1]), col);
        if (!(a < b)) continue;
        const double sse_l = s2 - s1 * s1 / static_cast<double>(nl);
        const double r1 = total1 - s1;
        const double sse_r = (total2 - s2) - r1 * r1 / static_cast<double>(nr);
        const double impurity = std::max(0.0, sse_l) + std::max(0.0, sse_r);
        if (impurity < best.impurity - tie_band) {
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = {static_cast<int>(f), mid, impurity};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const TreeParams& params_;
  FeatureSampler* sampler_;
  RegressionTree tree_;
};

void check_tree_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& p) {
  if (x.rows() < 1 || x.cols() < 1) throw ConfigError("tree needs at least one row and feature");
  if (x.rows() != y.size()) throw ConfigError("design matrix and target lengths differ");
  if (p.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
}

}  // namespace

RegressionTree grow_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         std::span<const std::size_t> rows, const TreeParams& params,
                         FeatureSampler* sampler) {
  check_tree_inputs(x, y, params);
  if (rows.empty()) throw ConfigError("tree needs at least one training row");
  return TreeBuilder(x, y, params, sampler).build({rows.begin(), rows.end()});
}

RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const TreeParams& params) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return grow_tree(x, y, rows, params);
}

double Forest::predict(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

Eigen::VectorXd Forest::importance() const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(trees.empty() ? 0 : trees.front().feature_count));
  for (const auto& t : trees) acc += normalize_importance(t.raw_importance());
  return normalize_importance(acc);
}

Forest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
                  std::uint64_t seed) {
  if (params.trees < 1) throw ConfigError("forest needs at least one tree");
  if (!(params.feature_fraction > 0.0 && params.feature_fraction <= 1.0)) {
    throw ConfigError("feature_fraction must lie in (0, 1]");
  }
  check_tree_inputs(x, y, params.tree);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  const auto per_split = static_cast<std::size_t>(
      std::ceil(params.feature_fraction * static_cast<double>(p) - 1e-12));

  Forest forest;
  forest.trees.reserve(params.trees);
  std::vector<std::size_t> rows(n);
  for (std::size_t b = 0; b < params.trees; ++b) {
    const std::uint64_t member_seed = derive_seed(seed, b);
    Rng rng(member_seed);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    FeatureSampler sampler(std::max<std::size_t>(per_split, 1), mix_seed(member_seed));
    forest.trees.push_back(grow_tree(x, y, rows, params.tree, &sampler));
  }
  return forest;
}

Eigen::VectorXd normalize_importance(const Eigen::VectorXd& raw) {
  const double total = raw.sum();
  if (!(total > 0.0)) return Eigen::VectorXd::Zero(raw.size());
  return raw / total;
}

}  // namespace polishsense
