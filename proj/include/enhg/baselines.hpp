#pragma once

// Comparison constructions: the complete Gaussian-kernel pairwise graph and
// the K-nearest-neighbor hypergraph. Both produce Hypergraph values so the
// learning routines run on them unchanged.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "enhg/datio.hpp"
#include "enhg/error.hpp"
#include "enhg/hypergraph.hpp"

namespace enhg {

struct Bandwidth {
  bool median_heuristic = true;
  double sigma = 0.0;

  static Bandwidth median() { return {true, 0.0}; }
  static Bandwidth fixed(double s) { return {false, s}; }
};

namespace detail {

inline Eigen::MatrixXd pairwise_squared_distances(const Eigen::MatrixXd& x) {
  const Index n = x.cols();
  Eigen::MatrixXd d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = (x.col(i) - x.col(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

inline double median_distance(const Eigen::MatrixXd& sq) {
  std::vector<double> dist;
  const Index n = sq.rows();
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) dist.push_back(std::sqrt(sq(i, j)));
  }
  std::sort(dist.begin(), dist.end());
  const std::size_t mid = dist.size() / 2;
  return dist.size() % 2 ? dist[mid] : 0.5 * (dist[mid - 1] + dist[mid]);
}

inline double resolve_sigma(const Bandwidth& bw, const Eigen::MatrixXd& sq) {
  const double sigma = bw.median_heuristic ? median_distance(sq) : bw.sigma;
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("Gaussian bandwidth must be > 0 (got " + detail::format_double(sigma) + ")");
  }
  return sigma;
}

}  // namespace detail

/// Complete graph: one 2-member hyperedge per pair with weight
/// exp(-||x_i - x_j||^2 / (2 sigma^2)). Pairs whose weight underflows to 0 are dropped.
inline Hypergraph gaussian_graph(const SampleMatrix& x, const Bandwidth& bandwidth = Bandwidth::median()) {
  const Eigen::MatrixXd sq = detail::pairwise_squared_distances(x.values());
  const double sigma = detail::resolve_sigma(bandwidth, sq);
  const Index n = x.count();
  std::vector<Hyperedge> edges;
  edges.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      Hyperedge e;
      e.centroid = i;
      e.members = {i, j};
      e.weight = std::exp(-sq(i, j) / (2.0 * sigma * sigma));
      e.kept = e.weight > 0.0;
      edges.push_back(std::move(e));
    }
  }
  return Hypergraph(n, std::move(edges));
}

/// e_i = {v_i} plus its K nearest neighbors (distance ties to the lower index);
/// w(e_i) sums the Gaussian kernel from the centroid to each neighbor, with the
/// median-heuristic bandwidth.
inline Hypergraph knn_hypergraph(const SampleMatrix& x, Index k = 8) {
  const Index n = x.count();
  if (k < 1 || k >= n) {
    throw InvalidArgument("K = " + std::to_string(k) + " must lie in [1, " + std::to_string(n - 1) + "]");
  }
  const Eigen::MatrixXd sq = detail::pairwise_squared_distances(x.values());
  const double sigma = detail::resolve_sigma(Bandwidth::median(), sq);

  std::vector<Hyperedge> edges(static_cast<std::size_t>(n));
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    order.erase(order.begin() + i);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return sq(i, a) < sq(i, b); });

    auto& e = edges[static_cast<std::size_t>(i)];
    e.centroid = i;
    e.members.push_back(i);
    for (Index t = 0; t < k; ++t) {
      const Index j = order[static_cast<std::size_t>(t)];
      e.members.push_back(j);
      e.weight += std::exp(-sq(i, j) / (2.0 * sigma * sigma));
    }
    e.kept = e.weight > 0.0;
    order.resize(static_cast<std::size_t>(n));
  }
  return Hypergraph(n, std::move(edges));
}

}  // namespace enhg
