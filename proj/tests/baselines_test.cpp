#include <gtest/gtest.h>

#include "enhg/baselines.hpp"
#include "enhg/learn.hpp"
#include "enhg/metrics.hpp"

using namespace enhg;

namespace {

SampleMatrix points(std::initializer_list<std::initializer_list<double>> cols) {
  Eigen::MatrixXd m(static_cast<Index>(cols.begin()->size()), static_cast<Index>(cols.size()));
  Index c = 0;
  for (const auto& col : cols) {
    Index r = 0;
    for (double v : col) m(r++, c) = v;
    ++c;
  }
  return SampleMatrix(m);
}

}  // namespace

TEST(Gaussian, CoincidentPointsWeighOne) {
  const auto g = gaussian_graph(points({{0, 0}, {0, 0}, {3, 4}}), Bandwidth::fixed(1.0));
  EXPECT_EQ(g.edges()[0].weight, 1.0);
  EXPECT_NEAR(g.edges()[1].weight, std::exp(-12.5), 1e-15);
}

TEST(Gaussian, WideBandwidthGivesUnitWeights) {
  const auto g = gaussian_graph(points({{0, 1}, {2, 3}, {5, 8}, {1, 1}}), Bandwidth::fixed(1e9));
  EXPECT_EQ(g.edges().size(), 6u);
  for (const auto& e : g.edges()) EXPECT_NEAR(e.weight, 1.0, 1e-15);
}

TEST(Gaussian, MedianBandwidthAndBadSigma) {
  const auto x = points({{0}, {1}, {3}});  // distances 1, 2, 3 -> median 2
  const auto g = gaussian_graph(x);
  EXPECT_NEAR(g.edges()[0].weight, std::exp(-1.0 / 8.0), 1e-15);
  EXPECT_THROW(gaussian_graph(x, Bandwidth::fixed(0.0)), InvalidArgument);
}

TEST(Knn, NearestNeighborAndTies) {
  const auto x = points({{0}, {1}, {-1}, {5}});
  const auto g = knn_hypergraph(x, 1);
  EXPECT_EQ(g.edges()[0].members, (std::vector<Index>{0, 1}));  // tie 1 vs 2 -> lower index
  EXPECT_EQ(g.edges()[3].members, (std::vector<Index>{1, 3}));
  EXPECT_THROW(knn_hypergraph(x, 4), InvalidArgument);
}

TEST(Knn, EveryEdgeHasKPlusOneMembers) {
  const auto [x, labels] = synth_blobs(3, 6, 10, 4.0, 1.0, 1);
  const auto g = knn_hypergraph(x, 8);
  for (const auto& e : g.edges()) {
    EXPECT_EQ(e.members.size(), 9u);
    EXPECT_GT(e.weight, 0.0);
    EXPECT_LE(e.weight, 8.0);
  }
}

TEST(Knn, EdgeSizesConstantUnlikeEnhg) {
  const auto [x, labels] = synth_blobs(3, 20, 10, 10.0, 1.0, 2);
  const auto knn = knn_hypergraph(normalize_columns(x), 8);
  const auto enhg_model = build_enhg(x, {0.1, 20.0});
  auto size_variance = [](const Hypergraph& g) {
    double sum = 0, sq = 0, count = 0;
    for (const auto& e : g.edges()) {
      if (!e.kept) continue;
      sum += static_cast<double>(e.members.size());
      sq += static_cast<double>(e.members.size() * e.members.size());
      ++count;
    }
    return sq / count - (sum / count) * (sum / count);
  };
  EXPECT_EQ(size_variance(knn), 0.0);
  EXPECT_GT(size_variance(enhg_model.graph), 0.0);
}

TEST(Baselines, ClusterSeparatedBlobs) {
  const auto [x, labels] = synth_blobs(3, 10, 12, 10.0, 1.0, 3);
  const auto xn = normalize_columns(x);
  for (const auto& g : {gaussian_graph(xn), knn_hypergraph(xn, 8)}) {
    const auto r = spectral_clustering(g, 3);
    EXPECT_EQ(clustering_accuracy(LabelVector(r.assignments), labels), 1.0);
  }
}
