#pragma once

// Spectral clustering and semi-supervised label propagation on a hypergraph.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "enhg/datio.hpp"
#include "enhg/error.hpp"
#include "enhg/hypergraph.hpp"
#include "enhg/parallel.hpp"

namespace enhg {

/// The k eigenpairs of a symmetric matrix with the smallest eigenvalues.
struct SpectralEmbedding {
  Eigen::MatrixXd vectors;  // n x k, column i pairs with values(i)
  Eigen::VectorXd values;   // ascending
};

/// Smallest-k eigenpairs of L, ascending. Each eigenvector is signed so its
/// largest-magnitude entry is positive (lowest index wins ties).
inline SpectralEmbedding spectral_embedding(const Eigen::MatrixXd& l, Index k) {
  if (l.rows() != l.cols()) throw InvalidArgument("matrix must be square");
  const Index n = l.rows();
  if (k < 1 || k > n) {
    throw InvalidArgument("k = " + std::to_string(k) + " out of range [1, " + std::to_string(n) + "]");
  }
  if ((l - l.transpose()).cwiseAbs().maxCoeff() > 1e-10) throw InvalidArgument("matrix is not symmetric");

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");

  SpectralEmbedding out;
  out.values = solver.eigenvalues().head(k);
  out.vectors = solver.eigenvectors().leftCols(k);
  for (Index c = 0; c < k; ++c) {
    Index pivot = 0;
    double best = -1.0;
    for (Index r = 0; r < n; ++r) {
      // Near-equal magnitudes resolve to the lower index.
      const double a = std::abs(out.vectors(r, c));
      if (a > best * (1.0 + 1e-12) + 1e-15) {
        best = a;
        pivot = r;
      }
    }
    if (out.vectors(pivot, c) < 0.0) out.vectors.col(c) *= -1.0;
  }
  return out;
}

struct KMeansOptions {
  std::uint64_t seed = 0;
  int restarts = 20;
  int max_iter = 300;
  double tol = 1e-6;
  unsigned threads = 1;
};

struct KMeansResult {
  std::vector<int> assignments;
  Eigen::MatrixXd centers;  // k x p
  double inertia = 0.0;
  int restart = 0;  // index of the winning restart
};

namespace detail {

inline double squared_distance(const Eigen::MatrixXd& points, Index row, const Eigen::MatrixXd& centers, Index c) {
  return (points.row(row) - centers.row(c)).squaredNorm();
}

inline Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, Index k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  Index first = pick(rng);
  centers.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  Eigen::VectorXd nearest(n);
  for (Index i = 0; i < n; ++i) nearest(i) = squared_distance(points, i, centers, 0);

  for (Index c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index next = -1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += nearest(i);
        if (nearest(i) > 0.0 && acc >= target) {
          next = i;
          break;
        }
      }
      if (next < 0) {
        for (Index i = n - 1; i >= 0; --i) {
          if (nearest(i) > 0.0) {
            next = i;
            break;
          }
        }
      }
    } else {
      // All remaining points coincide with a center.
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          next = i;
          break;
        }
      }
    }
    if (next < 0) next = 0;
    chosen[static_cast<std::size_t>(next)] = 1;
    centers.row(c) = points.row(next);
    for (Index i = 0; i < n; ++i) nearest(i) = std::min(nearest(i), squared_distance(points, i, centers, c));
  }
  return centers;
}

inline KMeansResult lloyd(const Eigen::MatrixXd& points, Index k, std::uint64_t seed, int max_iter, double tol) {
  const Index n = points.rows();
  std::mt19937_64 rng(seed);
  KMeansResult out;
  out.centers = kmeans_plus_plus(points, k, rng);
  out.assignments.assign(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd dist(n);

  auto assign = [&] {
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, out.centers, 0);
      for (Index c = 1; c < k; ++c) {
        const double d = squared_distance(points, i, out.centers, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      out.assignments[static_cast<std::size_t>(i)] = best;
      dist(i) = best_d;
    }
  };

  assign();
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const auto c = out.assignments[static_cast<std::size_t>(i)];
      next.row(c) += points.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: reseed from the point farthest from its center.
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (far < 0 || dist(i) > dist(far)) far = i;
      }
      taken[static_cast<std::size_t>(far)] = 1;
      next.row(c) = points.row(far);
      dist(far) = 0.0;
    }
    const double shift = (next - out.centers).rowwise().norm().maxCoeff();
    out.centers = std::move(next);
    assign();
    if (shift <= tol) break;
  }
  out.inertia = dist.sum();
  return out;
}

}  // namespace detail

/// Best-of-restarts Lloyd iterations with k-means++ seeding. Restart r uses
/// seed + r, so the result does not depend on how restarts are scheduled.
inline KMeansResult kmeans(const Eigen::MatrixXd& points, Index k, const KMeansOptions& options = {}) {
  const Index n = points.rows();
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (k > n) throw InvalidArgument("k = " + std::to_string(k) + " exceeds the point count " + std::to_string(n));
  if (!points.allFinite()) throw InvalidArgument("points contain non-finite entries");
  const int restarts = std::max(1, options.restarts);

  std::vector<KMeansResult> runs(static_cast<std::size_t>(restarts));
  parallel_for(runs.size(), options.threads, [&](std::size_t r) {
    runs[r] = detail::lloyd(points, k, options.seed + r, options.max_iter, options.tol);
    runs[r].restart = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  return std::move(runs[best]);
}

struct SpectralClusteringOptions {
  KMeansOptions kmeans;
  bool row_normalize = false;  // scale embedding rows to unit length before k-means
};

struct ClusteringResult {
  std::vector<int> assignments;
  SpectralEmbedding embedding;
  double inertia = 0.0;
};

/// Laplacian -> k smallest eigenvectors -> k-means on the rows.
inline ClusteringResult spectral_clustering(const Hypergraph& g, Index k, const SpectralClusteringOptions& options = {}) {
  const Index n = g.vertex_count();
  if (k < 2 || k > n) {
    throw InvalidArgument("k = " + std::to_string(k) + " out of range [2, " + std::to_string(n) + "]");
  }
  ClusteringResult out;
  out.embedding = spectral_embedding(laplacian(g), k);
  Eigen::MatrixXd rows = out.embedding.vectors;
  if (options.row_normalize) {
    for (Index i = 0; i < n; ++i) {
      const double norm = rows.row(i).norm();
      if (norm > 0.0) rows.row(i) /= norm;
    }
  }
  auto km = kmeans(rows, k, options.kmeans);
  out.assignments = std::move(km.assignments);
  out.inertia = km.inertia;
  return out;
}

/// n x c indicator matrix: Y(i, j) = 1 iff sample i is known to be class j.
inline Eigen::MatrixXd label_matrix(const LabelVector& labels, int classes) {
  if (classes < 1) throw InvalidArgument("need at least one class");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels.known[i]) continue;
    const int c = labels.labels[i];
    if (c < 0 || c >= classes) {
      throw InvalidArgument("label " + std::to_string(c) + " of sample " + std::to_string(i) + " is out of range");
    }
    y(static_cast<Index>(i), c) = 1.0;
  }
  return y;
}

namespace detail {

inline void validate_propagation(const Hypergraph& g, const Eigen::MatrixXd& y, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (y.rows() != g.vertex_count()) throw InvalidArgument("label matrix rows do not match the vertex count");
  if (y.cols() < 1) throw InvalidArgument("label matrix has no classes");
  if (y.cwiseAbs().sum() == 0.0) throw InvalidArgument("no labeled samples");
  for (Index c = 0; c < y.cols(); ++c) {
    if (y.col(c).cwiseAbs().sum() == 0.0) {
      throw InvalidArgument("class " + std::to_string(c) + " has no labeled samples");
    }
  }
}

}  // namespace detail

/// F = (I - alpha Theta)^{-1} Y by a Cholesky solve; the system is SPD for alpha in (0,1).
inline Eigen::MatrixXd propagate_labels(const Hypergraph& g, const Eigen::MatrixXd& y, double alpha) {
  detail::validate_propagation(g, y, alpha);
  Eigen::MatrixXd system = -alpha * theta_matrix(g);
  system.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalError("I - alpha*Theta is not positive definite");
  return llt.solve(y);
}

/// Fixed-point form F <- alpha Theta F + Y starting from F = Y. At least one
/// step is taken; exceeding max_iter is an error.
inline Eigen::MatrixXd propagate_labels_iterative(const Hypergraph& g, const Eigen::MatrixXd& y, double alpha,
                                                  double tol = 1e-10, int max_iter = 100000) {
  detail::validate_propagation(g, y, alpha);
  const Eigen::MatrixXd theta = alpha * theta_matrix(g);
  Eigen::MatrixXd f = y;
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::MatrixXd next = theta * f + y;
    const double change = (next - f).norm();
    f = std::move(next);
    if (change <= tol) return f;
  }
  throw NumericalError("label propagation did not converge within " + std::to_string(max_iter) + " iterations");
}

/// Row-wise argmax, ties to the lowest class.
inline LabelVector predict_labels(const Eigen::MatrixXd& f) {
  if (f.cols() < 1) throw InvalidArgument("classification matrix has no columns");
  std::vector<int> labels(static_cast<std::size_t>(f.rows()));
  for (Index i = 0; i < f.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < f.cols(); ++c) {
      if (f(i, c) > f(i, best)) best = c;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return LabelVector(std::move(labels));
}

/// Smoothness functional written as the explicit sum over hyperedges and
/// member pairs; equals Tr(F' L F).
inline double hypergraph_smoothness(const Hypergraph& g, const Eigen::MatrixXd& f) {
  if (f.rows() != g.vertex_count()) throw InvalidArgument("F rows do not match the vertex count");
  const Eigen::VectorXd& deg = g.vertex_degrees();
  double total = 0.0;
  for (const auto& edge : g.edges()) {
    if (!edge.kept) continue;
    const double scale = edge.weight / static_cast<double>(edge.members.size());
    for (const Index u : edge.members) {
      for (const Index v : edge.members) {
        const Eigen::RowVectorXd diff = f.row(u) / std::sqrt(deg(u)) - f.row(v) / std::sqrt(deg(v));
        total += 0.5 * scale * diff.squaredNorm();
      }
    }
  }
  return total;
}

/// Chooses which samples keep their label: within each class,
/// max(1, round(fraction * class size)) samples drawn without replacement.
inline LabelVector stratified_label_mask(const LabelVector& truth, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("label fraction must lie in (0, 1]");
  if (!truth.fully_known()) throw InvalidArgument("ground truth must be fully known");
  std::mt19937_64 rng(seed);
  const int classes = truth.num_classes();
  std::vector<bool> known(truth.size(), false);
  for (int c = 0; c < classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth.labels[i] == c) members.push_back(i);
    }
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    const auto take = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size()))), 1, members.size());
    for (std::size_t t = 0; t < take; ++t) known[members[t]] = true;
  }
  return LabelVector(truth.labels, std::move(known));
}

}  // namespace enhg
