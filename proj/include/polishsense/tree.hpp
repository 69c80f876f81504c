#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace polishsense {

struct TreeParams {
  std::size_t min_samples_leaf = 1;
  /// nullopt grows until the other stopping rules fire.
  std::optional<std::size_t> max_depth;
};

/// CART regression tree stored as a node arena; node 0 is the root.
/// Internal nodes route x[feature] <= threshold to `left`.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::size_t samples = 0;
    /// Parent SSE minus the children's SSE.
    double impurity_decrease = 0.0;
  };

  std::vector<Node> nodes;
  std::size_t feature_count = 0;

  double predict(const Eigen::VectorXd& x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
  /// Summed impurity decrease per feature, not normalized.
  Eigen::VectorXd raw_importance() const;
};

/// Draws the candidate features considered at each split.
class FeatureSampler {
 public:
  FeatureSampler(std::size_t per_split, std::uint64_t seed);
  /// Sorted ascending, so tie-breaking by lowest index still applies.
  std::vector<std::size_t> draw(std::size_t feature_count);

 private:
  std::size_t per_split_;
  std::uint64_t state_;
};

/// Grows a tree on the given training rows (duplicates allowed, as produced
/// by bootstrapping). Splits minimize the summed child SSE over midpoints of
/// consecutive distinct values; ties go to the lowest feature index, then the
/// lowest threshold. A node becomes a leaf at max_depth, when it holds fewer
/// than 2 * min_samples_leaf rows, or when its targets are all equal.
RegressionTree grow_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         std::span<const std::size_t> rows, const TreeParams& params,
                         FeatureSampler* sampler = nullptr);

RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const TreeParams& params = {});

struct ForestParams {
  std::size_t trees = 100;
  double feature_fraction = 1.0;
  bool bootstrap = true;
  TreeParams tree;
};

struct Forest {
  std::vector<RegressionTree> trees;

  /// Arithmetic mean of member predictions, summed in member order.
  double predict(const Eigen::VectorXd& x) const;
  /// Mean of the members' normalized importances.
  Eigen::VectorXd importance() const;
};

/// Member b draws its bootstrap sample and split candidates from a generator
/// seeded with derive_seed(seed, b).
Forest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
                  std::uint64_t seed);

/// Scales a non-negative vector to sum 1; an all-zero vector stays zero.
Eigen::VectorXd normalize_importance(const Eigen::VectorXd& raw);

}  // namespace polishsense
