#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "enhg/enhg.hpp"

namespace enhg::testing {

inline double en_objective(const Eigen::MatrixXd& b, const Eigen::VectorXd& x, const Eigen::VectorXd& z, double l1,
                           double l2) {
  return 0.5 * (x - b * z).squaredNorm() + l2 * z.squaredNorm() + l1 * z.lpNorm<1>();
}

/// Elastic-net minimizer by exhaustive search over sign patterns. For each
/// support A with signs s the stationarity equations give
/// (B_A'B_A + 2 l2 I) z_A = B_A'x - l1 s; a candidate is valid when the signs
/// agree and every inactive correlation is within l1. The lowest objective wins.
inline std::optional<Eigen::VectorXd> brute_force_elastic_net(const Eigen::MatrixXd& b, const Eigen::VectorXd& x,
                                                             double l1, double l2) {
  const Index m = b.cols();
  Eigen::MatrixXd gram = b.transpose() * b;
  gram.diagonal().array() += 2.0 * l2;
  const Eigen::VectorXd c = b.transpose() * x;

  std::optional<Eigen::VectorXd> best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> pattern(static_cast<std::size_t>(m), 0);  // 0, +1, -1 per atom
  long total = 1;
  for (Index j = 0; j < m; ++j) total *= 3;
  for (long code = 0; code < total; ++code) {
    long rest = code;
    std::vector<Index> support;
    for (Index j = 0; j < m; ++j) {
      const int digit = static_cast<int>(rest % 3);
      rest /= 3;
      pattern[static_cast<std::size_t>(j)] = digit == 0 ? 0 : (digit == 1 ? 1 : -1);
      if (digit) support.push_back(j);
    }
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    if (!support.empty()) {
      const auto k = static_cast<Index>(support.size());
      Eigen::MatrixXd g(k, k);
      Eigen::VectorXd rhs(k);
      for (Index p = 0; p < k; ++p) {
        rhs(p) = c(support[p]) - l1 * pattern[static_cast<std::size_t>(support[p])];
        for (Index q = 0; q < k; ++q) g(p, q) = gram(support[p], support[q]);
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd za = lu.solve(rhs);
      bool ok = true;
      for (Index p = 0; p < k; ++p) {
        if (za(p) * pattern[static_cast<std::size_t>(support[p])] <= 0.0) ok = false;
        z(support[p]) = za(p);
      }
      if (!ok) continue;
    }
    const Eigen::VectorXd corr = c - gram * z;
    bool ok = true;
    for (Index j = 0; j < m; ++j) {
      if (pattern[static_cast<std::size_t>(j)] == 0 && std::abs(corr(j)) > l1 + 1e-9) ok = false;
    }
    if (!ok) continue;
    const double obj = en_objective(b, x, z, l1, l2);
    if (obj < best_obj) {
      best_obj = obj;
      best = z;
    }
  }
  return best;
}

/// Dictionary with unit-norm columns and a response, both Gaussian.
struct EnInstance {
  Eigen::MatrixXd b;
  Eigen::VectorXd x;
};

inline EnInstance random_instance(std::mt19937_64& rng, Index d, Index m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  EnInstance inst{Eigen::MatrixXd(d, m), Eigen::VectorXd(d)};
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < d; ++i) inst.b(i, j) = normal(rng);
    inst.b.col(j).normalize();
  }
  for (Index i = 0; i < d; ++i) inst.x(i) = normal(rng);
  return inst;
}

/// Random hypergraph on n vertices: `edges` hyperedges of 2..max_size members
/// with weights in [0.1, 2], plus a pair edge for any vertex left uncovered.
inline Hypergraph random_hypergraph(std::mt19937_64& rng, Index n, Index edges, Index max_size = 6) {
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  std::uniform_int_distribution<Index> size_dist(2, std::max<Index>(2, std::min(n, max_size)));
  std::vector<Hyperedge> list;
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index e = 0; e < edges; ++e) {
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    Hyperedge h;
    h.members.assign(order.begin(), order.begin() + size_dist(rng));
    h.centroid = h.members.front();
    h.weight = weight(rng);
    for (const Index v : h.members) covered[static_cast<std::size_t>(v)] = 1;
    list.push_back(std::move(h));
  }
  std::uniform_int_distribution<Index> other(0, n - 2);
  for (Index v = 0; v < n; ++v) {
    if (covered[static_cast<std::size_t>(v)]) continue;
    Index u = other(rng);
    if (u >= v) ++u;
    Hyperedge h;
    h.members = {v, u};
    h.centroid = v;
    h.weight = weight(rng);
    list.push_back(std::move(h));
    covered[static_cast<std::size_t>(v)] = 1;
  }
  return Hypergraph(n, std::move(list));
}

/// Largest eigenvalue magnitude of a symmetric matrix by power iteration.
inline double power_iteration_radius(const Eigen::MatrixXd& a, int iters = 5000) {
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(a.rows(), 1.0, 2.0).normalized();
  double est = 0.0;
  for (int i = 0; i < iters; ++i) {
    Eigen::VectorXd w = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    est = norm;
    v = w / norm;
  }
  return est;
}

/// Best matched count over all one-to-one maps, by enumerating permutations.
inline long brute_force_matched(const std::vector<int>& pred, const std::vector<int>& truth) {
  int k = 0;
  for (const int p : pred) k = std::max(k, p + 1);
  for (const int t : truth) k = std::max(k, t + 1);
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  long best = 0;
  do {
    long hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (perm[static_cast<std::size_t>(pred[i])] == truth[i]) ++hits;
    }
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Two disjoint cliques of pair edges: vertices [0, a) and [a, a + b).
inline Hypergraph two_components(Index a, Index b) {
  std::vector<Hyperedge> edges;
  auto clique = [&](Index lo, Index hi) {
    for (Index i = lo; i < hi; ++i) {
      for (Index j = i + 1; j < hi; ++j) {
        Hyperedge e;
        e.centroid = i;
        e.members = {i, j};
        e.weight = 1.0;
        edges.push_back(e);
      }
    }
  };
  clique(0, a);
  clique(a, a + b);
  return Hypergraph(a + b, std::move(edges));
}

}  // namespace enhg::testing
