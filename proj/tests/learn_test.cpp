#include <gtest/gtest.h>

#include "enhg/learn.hpp"
#include "enhg/metrics.hpp"
#include "support.hpp"

using namespace enhg;
using enhg::testing::random_hypergraph;
using enhg::testing::two_components;

namespace {

Hyperedge pair(Index a, Index b, double w) {
  Hyperedge e;
  e.centroid = a;
  e.members = {a, b};
  e.weight = w;
  return e;
}

}  // namespace

TEST(Embedding, PairGraph) {
  const Hypergraph g(2, {pair(0, 1, 1.0)});
  const auto emb = spectral_embedding(laplacian(g), 1);
  EXPECT_NEAR(emb.values(0), 0.0, 1e-14);
  EXPECT_NEAR(emb.vectors(0, 0), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(emb.vectors(1, 0), std::sqrt(0.5), 1e-12);
}

TEST(Embedding, TraceEqualsEigenvalueSum) {
  std::mt19937_64 rng(2);
  const auto g = random_hypergraph(rng, 15, 10);
  const Eigen::MatrixXd l = laplacian(g);
  const auto emb = spectral_embedding(l, 4);
  EXPECT_NEAR((emb.vectors.transpose() * l * emb.vectors).trace(), emb.values.sum(), 1e-10);
  EXPECT_LE((emb.vectors.transpose() * emb.vectors - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-10);
  for (Index i = 1; i < 4; ++i) EXPECT_LE(emb.values(i - 1), emb.values(i));
}

TEST(Embedding, DisconnectedBlocksSeparate) {
  const auto g = two_components(4, 5);
  const auto emb = spectral_embedding(laplacian(g), 2);
  EXPECT_NEAR(emb.values(0), 0.0, 1e-12);
  EXPECT_NEAR(emb.values(1), 0.0, 1e-12);
  // Rows of one block coincide, and differ from the other block.
  for (Index i = 1; i < 4; ++i) EXPECT_LE((emb.vectors.row(i) - emb.vectors.row(0)).norm(), 1e-10);
  for (Index i = 5; i < 9; ++i) EXPECT_LE((emb.vectors.row(i) - emb.vectors.row(4)).norm(), 1e-10);
  EXPECT_GT((emb.vectors.row(0) - emb.vectors.row(4)).norm(), 0.1);
}

TEST(Embedding, RejectsBadInput) {
  EXPECT_THROW(spectral_embedding(Eigen::MatrixXd::Identity(3, 3), 4), InvalidArgument);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(spectral_embedding(a, 1), InvalidArgument);
}

TEST(KMeans, TwoObviousGroups) {
  Eigen::MatrixXd p(6, 1);
  p << 0, 0.1, 0.2, 10, 10.1, 10.2;
  const auto r = kmeans(p, 2, {});
  EXPECT_EQ(r.assignments[0], r.assignments[1]);
  EXPECT_EQ(r.assignments[0], r.assignments[2]);
  EXPECT_EQ(r.assignments[3], r.assignments[5]);
  EXPECT_NE(r.assignments[0], r.assignments[3]);
  EXPECT_NEAR(r.inertia, 4 * 0.01, 1e-12);
}

TEST(KMeans, KEqualsNHasZeroInertia) {
  Eigen::MatrixXd p(3, 2);
  p << 0, 0, 1, 0, 0, 1;
  const auto r = kmeans(p, 3, {});
  EXPECT_NEAR(r.inertia, 0.0, 1e-15);
  std::set<int> ids(r.assignments.begin(), r.assignments.end());
  EXPECT_EQ(ids.size(), 3u);
}

TEST(KMeans, DuplicatePointsDoNotBreakSeeding) {
  const Eigen::MatrixXd p = Eigen::MatrixXd::Ones(5, 2);
  const auto r = kmeans(p, 3, {});
  EXPECT_NEAR(r.inertia, 0.0, 1e-15);
}

TEST(KMeans, DeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd p(60, 3);
  for (Index i = 0; i < p.size(); ++i) p.data()[i] = normal(rng);
  KMeansOptions one{42, 10, 300, 1e-6, 1};
  KMeansOptions many = one;
  many.threads = 4;
  const auto a = kmeans(p, 4, one);
  const auto b = kmeans(p, 4, many);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.inertia, b.inertia);
  EXPECT_EQ(a.restart, b.restart);
}

TEST(KMeans, RejectsBadK) {
  EXPECT_THROW(kmeans(Eigen::MatrixXd::Zero(3, 1), 0), InvalidArgument);
  EXPECT_THROW(kmeans(Eigen::MatrixXd::Zero(3, 1), 4), InvalidArgument);
}

TEST(SpectralClustering, RecoversComponents) {
  const auto g = two_components(6, 7);
  const auto r = spectral_clustering(g, 2);
  std::vector<int> truth(13, 0);
  std::fill(truth.begin() + 6, truth.end(), 1);
  EXPECT_EQ(clustering_accuracy(LabelVector(r.assignments), LabelVector(truth)), 1.0);
}

TEST(Propagation, TinyAlphaReturnsSeeds) {
  std::mt19937_64 rng(4);
  const auto g = random_hypergraph(rng, 10, 6);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(10, 2);
  y(0, 0) = 1;
  y(5, 1) = 1;
  EXPECT_LE((propagate_labels(g, y, 1e-12) - y).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Propagation, DirectEqualsIteration) {
  std::mt19937_64 rng(5);
  for (double alpha : {0.5, 0.9, 0.99}) {
    const auto g = random_hypergraph(rng, 20, 12);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(20, 3);
    y(0, 0) = y(7, 1) = y(13, 2) = 1;
    const auto direct = propagate_labels(g, y, alpha);
    const auto iter = propagate_labels_iterative(g, y, alpha, 1e-13);
    EXPECT_LE((direct - iter).cwiseAbs().maxCoeff(), 1e-8) << "alpha " << alpha;
  }
}

TEST(Propagation, LooseToleranceTakesOneStep) {
  std::mt19937_64 rng(6);
  const auto g = random_hypergraph(rng, 8, 5);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(8, 2);
  y(0, 0) = y(1, 1) = 1;
  const auto f = propagate_labels_iterative(g, y, 0.5, 1e9);
  EXPECT_LE((f - (0.5 * theta_matrix(g) * y + y)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Propagation, TwoComponentsKeepTheirLabels) {
  const auto g = two_components(5, 6);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(11, 2);
  y(2, 0) = 1;
  y(8, 1) = 1;
  const auto pred = predict_labels(propagate_labels(g, y, 0.99));
  for (Index i = 0; i < 11; ++i) EXPECT_EQ(pred.labels[static_cast<std::size_t>(i)], i < 5 ? 0 : 1);
}

TEST(Propagation, LabelScalingDoesNotChangePrediction) {
  std::mt19937_64 rng(7);
  const auto g = random_hypergraph(rng, 15, 9);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(15, 3);
  y(0, 0) = y(4, 1) = y(9, 2) = 1;
  const auto a = predict_labels(propagate_labels(g, y, 0.9));
  const auto b = predict_labels(propagate_labels(g, 3.5 * y, 0.9));
  EXPECT_EQ(a.labels, b.labels);
}

TEST(Propagation, RejectsBadInput) {
  const auto g = two_components(2, 2);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(4, 2);
  EXPECT_THROW(propagate_labels(g, y, 0.5), InvalidArgument);
  y(0, 0) = 1;
  EXPECT_THROW(propagate_labels(g, y, 0.5), InvalidArgument);  // class 1 unlabeled
  y(3, 1) = 1;
  EXPECT_THROW(propagate_labels(g, y, 1.0), InvalidArgument);
  EXPECT_THROW(propagate_labels(g, y, 0.0), InvalidArgument);
  EXPECT_NO_THROW(propagate_labels(g, y, 0.5));
}

TEST(Predict, TiesGoToLowestClass) {
  Eigen::MatrixXd f(2, 3);
  f << 0.5, 0.5, 0.1, 0.2, 0.7, 0.7;
  EXPECT_EQ(predict_labels(f).labels, (std::vector<int>{0, 1}));
}

TEST(Smoothness, DoubleSumEqualsTrace) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = random_hypergraph(rng, 12 + trial, 7);
    Eigen::MatrixXd f(g.vertex_count(), 3);
    for (Index i = 0; i < f.size(); ++i) f.data()[i] = normal(rng);
    EXPECT_NEAR(hypergraph_smoothness(g, f), (f.transpose() * laplacian(g) * f).trace(), 1e-10);
  }
}

TEST(LabelMask, StratifiedCounts) {
  std::vector<int> truth;
  for (int c = 0; c < 3; ++c) truth.insert(truth.end(), 20, c);
  const auto mask = stratified_label_mask(LabelVector(truth), 0.1, 3);
  int per_class[3] = {0, 0, 0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (mask.known[i]) ++per_class[truth[i]];
  }
  for (int c = 0; c < 3; ++c) EXPECT_EQ(per_class[c], 2);
  const auto tiny = stratified_label_mask(LabelVector(truth), 0.01, 3);
  EXPECT_EQ(std::count(tiny.known.begin(), tiny.known.end(), true), 3);
  EXPECT_EQ(stratified_label_mask(LabelVector(truth), 0.1, 3).known, mask.known);
}

TEST(LabelMatrix, Indicators) {
  const LabelVector l({1, 0, 2}, {true, false, true});
  const auto y = label_matrix(l, 3);
  EXPECT_EQ(y(0, 1), 1.0);
  EXPECT_EQ(y.row(1).sum(), 0.0);
  EXPECT_EQ(y(2, 2), 1.0);
  EXPECT_THROW(label_matrix(l, 2), InvalidArgument);
}
