#include <gtest/gtest.h>

#include "enhg/metrics.hpp"
#include "support.hpp"

using namespace enhg;
using enhg::testing::brute_force_matched;

TEST(Accuracy, IdenticalPartition) {
  EXPECT_EQ(clustering_accuracy(LabelVector({0, 0, 1, 1}), LabelVector({0, 0, 1, 1})), 1.0);
}

TEST(Accuracy, RelabeledPartition) {
  EXPECT_EQ(clustering_accuracy(LabelVector({1, 1, 0, 0}), LabelVector({0, 0, 1, 1})), 1.0);
}

TEST(Accuracy, OneMistake) {
  EXPECT_EQ(clustering_accuracy(LabelVector({0, 0, 0, 1}), LabelVector({0, 0, 1, 1})), 0.75);
}

TEST(Accuracy, MoreClustersThanClasses) {
  EXPECT_EQ(clustering_accuracy(LabelVector({0, 1, 2, 2}), LabelVector({0, 0, 1, 1})), 0.75);
}

TEST(Accuracy, MatchesPermutationSearch) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> kdist(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int kp = kdist(rng), kt = kdist(rng);
    std::uniform_int_distribution<int> pd(0, kp - 1), td(0, kt - 1);
    std::vector<int> pred(40), truth(40);
    for (int i = 0; i < 40; ++i) {
      pred[static_cast<std::size_t>(i)] = pd(rng);
      truth[static_cast<std::size_t>(i)] = td(rng);
    }
    const double expected = static_cast<double>(brute_force_matched(pred, truth)) / 40.0;
    EXPECT_DOUBLE_EQ(clustering_accuracy(LabelVector(pred), LabelVector(truth)), expected);
  }
}

TEST(Assignment, SmallMaximum) {
  Eigen::MatrixXd w(3, 3);
  w << 1, 2, 3, 2, 4, 6, 3, 6, 9;
  const auto a = max_weight_assignment(w);
  double total = 0;
  for (Index r = 0; r < 3; ++r) total += w(r, a[static_cast<std::size_t>(r)]);
  EXPECT_DOUBLE_EQ(total, 1 + 4 + 9);
}

TEST(Nmi, TwoByTwoExample) {
  // Contingency [[2, 1], [0, 1]] on four samples.
  const LabelVector pred({0, 0, 0, 1});
  const LabelVector truth({0, 0, 1, 1});
  const double mi = 0.5 * std::log(0.5 / (0.75 * 0.5)) + 0.25 * std::log(0.25 / (0.75 * 0.5)) +
                    0.25 * std::log(0.25 / (0.25 * 0.5));
  const double hp = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
  const double ht = std::log(2.0);
  EXPECT_NEAR(nmi(pred, truth), mi / std::sqrt(hp * ht), 1e-12);
  EXPECT_NEAR(nmi(pred, truth), 0.3456, 1e-3);
  EXPECT_NEAR(nmi(pred, truth, NmiNormalization::arithmetic), mi / (0.5 * (hp + ht)), 1e-12);
}

TEST(Nmi, ConstantPredictionIsZero) { EXPECT_EQ(nmi(LabelVector({3, 3, 3, 3}), LabelVector({0, 1, 0, 1})), 0.0); }

TEST(Nmi, SymmetricAndPerfect) {
  const LabelVector a({0, 1, 1, 2, 2, 0, 1});
  const LabelVector b({1, 1, 0, 2, 0, 0, 1});
  EXPECT_NEAR(nmi(a, b), nmi(b, a), 1e-15);
  EXPECT_NEAR(nmi(a, LabelVector({5, 7, 7, 9, 9, 5, 7})), 1.0, 1e-12);
}

TEST(Classification, MaskedAccuracy) {
  const LabelVector pred({0, 1, 1, 0, 2});
  const LabelVector truth({0, 1, 0, 0, 1});
  EXPECT_EQ(classification_accuracy(pred, truth, {false, true, true, true, true}), 0.5);
  EXPECT_EQ(classification_accuracy(pred, truth, {true, true, true, true, false}), 0.75);
  EXPECT_THROW(classification_accuracy(pred, truth, {false, false, false, false, false}), InvalidArgument);
}

TEST(Metrics, LengthMismatch) {
  EXPECT_THROW(clustering_accuracy(LabelVector({0, 1}), LabelVector({0})), InvalidArgument);
  EXPECT_THROW(nmi(LabelVector({0, 1}), LabelVector({0})), InvalidArgument);
}
