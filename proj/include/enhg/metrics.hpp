#pragma once

// Clustering accuracy under optimal label matching, normalized mutual
// information, and plain classification accuracy.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "enhg/datio.hpp"
#include "enhg/error.hpp"

namespace enhg {

/// counts(p, t) = number of samples predicted p with true class t. Labels are
/// compacted to dense ids in ascending order of their original value.
struct ContingencyTable {
  Eigen::MatrixXi counts;
  long n = 0;
};

namespace detail {

inline void check_lengths(const LabelVector& pred, const LabelVector& truth) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument("label length mismatch: " + std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()));
  }
}

inline std::vector<int> compact(const std::vector<int>& labels, int& count) {
  std::map<int, int> ids;
  for (const int l : labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  count = next;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const int l : labels) out.push_back(ids[l]);
  return out;
}

}  // namespace detail

inline ContingencyTable contingency(const LabelVector& pred, const LabelVector& truth) {
  detail::check_lengths(pred, truth);
  int kp = 0, kt = 0;
  const auto p = detail::compact(pred.labels, kp);
  const auto t = detail::compact(truth.labels, kt);
  ContingencyTable table;
  table.counts = Eigen::MatrixXi::Zero(kp, kt);
  for (std::size_t i = 0; i < p.size(); ++i) ++table.counts(p[i], t[i]);
  table.n = static_cast<long>(p.size());
  return table;
}

/// Maximum-weight perfect matching on a square matrix (Hungarian method with
/// potentials). Returns row -> column.
inline std::vector<Index> max_weight_assignment(const Eigen::MatrixXd& weight) {
  const Index n = weight.rows();
  if (weight.cols() != n) throw InvalidArgument("assignment matrix must be square");
  if (n == 0) return {};
  const double top = weight.maxCoeff();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; cost = top - weight turns maximization into minimization.
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index row = 1; row <= n; ++row) {
    match[0] = row;
    Index col0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(col0)] = 1;
      const Index row0 = match[static_cast<std::size_t>(col0)];
      double delta = inf;
      Index col1 = 0;
      for (Index col = 1; col <= n; ++col) {
        if (used[static_cast<std::size_t>(col)]) continue;
        const double cur = (top - weight(row0 - 1, col - 1)) - u[static_cast<std::size_t>(row0)] -
                           v[static_cast<std::size_t>(col)];
        if (cur < minv[static_cast<std::size_t>(col)]) {
          minv[static_cast<std::size_t>(col)] = cur;
          way[static_cast<std::size_t>(col)] = col0;
        }
        if (minv[static_cast<std::size_t>(col)] < delta) {
          delta = minv[static_cast<std::size_t>(col)];
          col1 = col;
        }
      }
      for (Index col = 0; col <= n; ++col) {
        if (used[static_cast<std::size_t>(col)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(col)])] += delta;
          v[static_cast<std::size_t>(col)] -= delta;
        } else {
          minv[static_cast<std::size_t>(col)] -= delta;
        }
      }
      col0 = col1;
    } while (match[static_cast<std::size_t>(col0)] != 0);
    do {
      const Index col1 = way[static_cast<std::size_t>(col0)];
      match[static_cast<std::size_t>(col0)] = match[static_cast<std::size_t>(col1)];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<Index> assignment(static_cast<std::size_t>(n), 0);
  for (Index col = 1; col <= n; ++col) assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(col)] - 1)] = col - 1;
  return assignment;
}

/// Largest matched count over one-to-one cluster -> class maps. Unequal
/// cluster and class counts are padded with empty dummies.
inline long matched_count(const ContingencyTable& table) {
  const Index size = std::max(table.counts.rows(), table.counts.cols());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(size, size);
  w.topLeftCorner(table.counts.rows(), table.counts.cols()) = table.counts.cast<double>();
  const auto assignment = max_weight_assignment(w);
  long total = 0;
  for (Index r = 0; r < size; ++r) total += std::lround(w(r, assignment[static_cast<std::size_t>(r)]));
  return total;
}

inline double clustering_accuracy(const LabelVector& pred, const LabelVector& truth) {
  detail::check_lengths(pred, truth);
  if (!truth.fully_known()) throw InvalidArgument("ground truth must be fully known");
  if (pred.size() == 0) throw InvalidArgument("empty label vectors");
  const auto table = contingency(pred, truth);
  return static_cast<double>(matched_count(table)) / static_cast<double>(table.n);
}

enum class NmiNormalization { geometric, arithmetic };

/// MI / sqrt(H(pred) H(truth)) (or MI / mean entropy), natural logarithms.
/// A zero denominator yields 0.
inline double nmi(const LabelVector& pred, const LabelVector& truth,
                  NmiNormalization norm = NmiNormalization::geometric) {
  detail::check_lengths(pred, truth);
  if (pred.size() == 0) throw InvalidArgument("empty label vectors");
  const auto table = contingency(pred, truth);
  const double n = static_cast<double>(table.n);
  const Eigen::MatrixXd p = table.counts.cast<double>() / n;
  const Eigen::VectorXd pp = p.rowwise().sum();
  const Eigen::RowVectorXd pt = p.colwise().sum();

  auto entropy = [](const auto& probs) {
    double h = 0.0;
    for (Index i = 0; i < probs.size(); ++i) {
      if (probs(i) > 0.0) h -= probs(i) * std::log(probs(i));
    }
    return h;
  };
  double mi = 0.0;
  for (Index r = 0; r < p.rows(); ++r) {
    for (Index c = 0; c < p.cols(); ++c) {
      if (p(r, c) > 0.0) mi += p(r, c) * std::log(p(r, c) / (pp(r) * pt(c)));
    }
  }
  const double hp = entropy(pp);
  const double ht = entropy(pt);
  const double denom = norm == NmiNormalization::geometric ? std::sqrt(hp * ht) : 0.5 * (hp + ht);
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

/// Fraction of samples selected by eval_mask whose prediction matches the truth.
inline double classification_accuracy(const LabelVector& pred, const LabelVector& truth,
                                      const std::vector<bool>& eval_mask) {
  detail::check_lengths(pred, truth);
  if (eval_mask.size() != truth.size()) throw InvalidArgument("evaluation mask length mismatch");
  long total = 0, correct = 0;
  for (std::size_t i = 0; i < eval_mask.size(); ++i) {
    if (!eval_mask[i]) continue;
    ++total;
    if (pred.labels[i] == truth.labels[i]) ++correct;
  }
  if (total == 0) throw InvalidArgument("evaluation mask selects no samples");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace enhg
