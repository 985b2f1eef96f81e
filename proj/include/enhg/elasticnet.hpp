#pragma once

// LARS-EN regularization paths and the column-by-column robust matrix
// elastic net X = XZ + S.
//
// Objective for one response x over dictionary B:
//
//     1/2 ||x - Bz||^2 + l2 ||z||^2 + l1 ||z||_1
//
// This is a lasso on the ridge-augmented system [B; sqrt(2 l2) I], so the
// solution is piecewise linear in l1. The path is traced with the lasso
// modification of LARS: atoms join when their correlation reaches the
// current l1 level and leave when their coefficient hits zero.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "enhg/datio.hpp"
#include "enhg/error.hpp"
#include "enhg/parallel.hpp"

namespace enhg {

/// Penalty weights of the squared-loss elastic net.
struct ElasticNetWeights {
  double l1 = 0.0;
  double l2 = 0.0;

  /// Maps the model parameters (lambda on ||Z||_F^2, gamma on the residual)
  /// onto squared-loss weights: l1 = 1/gamma, l2 = lambda/gamma.
  static ElasticNetWeights from_model(double lambda, double gamma) {
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be > 0");
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    return {1.0 / gamma, lambda / gamma};
  }
};

/// When to stop tracing a path.
struct StopRule {
  enum class Kind { max_active, l1_budget, full_path, l1_weight };
  Kind kind = Kind::full_path;
  double value = 0.0;

  static StopRule max_active(Index count) { return {Kind::max_active, static_cast<double>(count)}; }
  static StopRule l1_budget(double budget) { return {Kind::l1_budget, budget}; }
  static StopRule full_path() { return {Kind::full_path, 0.0}; }
  /// Stop once the l1 weight has decreased to `l1`.
  static StopRule l1_weight(double l1) { return {Kind::l1_weight, l1}; }
};

struct PathKnot {
  double l1_weight = 0.0;  // penalty level at which this knot sits
  double l1_norm = 0.0;    // ||z||_1
  Eigen::VectorXd coefficients;
  std::vector<Index> active;
};

/// An atom that reached the active level but was linearly dependent on the
/// active set (singular Gram system) and was therefore not admitted.
struct SkippedAtom {
  Index atom = 0;
  std::size_t knot = 0;
};

struct ElasticNetPath {
  std::vector<PathKnot> knots;
  double l2_weight = 0.0;
  std::vector<SkippedAtom> skipped;

  /// ||z||_1 / max ||z||_1 per knot; all zeros for a trivial path.
  std::vector<double> path_fraction() const {
    double max_norm = 0.0;
    for (const auto& k : knots) max_norm = std::max(max_norm, k.l1_norm);
    std::vector<double> s;
    s.reserve(knots.size());
    for (const auto& k : knots) s.push_back(max_norm > 0.0 ? k.l1_norm / max_norm : 0.0);
    return s;
  }

  /// Coefficients at penalty level l1, interpolated between the bracketing knots.
  /// Levels below the last knot clamp to the last knot.
  Eigen::VectorXd at_l1_weight(double l1) const {
    if (knots.empty()) throw InvalidArgument("empty path");
    if (l1 >= knots.front().l1_weight) return knots.front().coefficients;
    for (std::size_t k = 1; k < knots.size(); ++k) {
      const auto& hi = knots[k - 1];
      const auto& lo = knots[k];
      if (l1 >= lo.l1_weight) {
        const double span = hi.l1_weight - lo.l1_weight;
        if (span <= 0.0) return lo.coefficients;
        const double t = (hi.l1_weight - l1) / span;
        return (1.0 - t) * hi.coefficients + t * lo.coefficients;
      }
    }
    return knots.back().coefficients;
  }
};

namespace detail {

inline std::vector<Index> dictionary_without(Index n, Index skip) {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(n - 1));
  for (Index j = 0; j < n; ++j) {
    if (j != skip) idx.push_back(j);
  }
  return idx;
}

/// Path tracing on a precomputed Gram system. gram = B'B + 2 l2 I and
/// corr0 = B'x. `rows` is the row count of B (used for the default stop).
inline ElasticNetPath lars_en_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& corr0, Index rows,
                                   double l2, std::optional<StopRule> stop_rule) {
  const Index m = gram.rows();
  const StopRule stop = stop_rule.value_or(
      StopRule::max_active(l2 > 0.0 ? m : std::min(rows, m)));
  constexpr double kCorrelationFloor = 1e-12;
  constexpr double kSingularRatio = 1e-10;

  double target = 0.0;
  if (stop.kind == StopRule::Kind::l1_weight) target = std::max(0.0, stop.value);
  const Index max_active = stop.kind == StopRule::Kind::max_active
                               ? static_cast<Index>(stop.value)
                               : std::numeric_limits<Index>::max();
  const double budget = stop.kind == StopRule::Kind::l1_budget ? stop.value
                                                                : std::numeric_limits<double>::infinity();

  ElasticNetPath path;
  path.l2_weight = l2;

  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd corr = corr0;
  std::vector<Index> active;
  std::vector<double> signs;
  std::vector<char> in_active(static_cast<std::size_t>(m), 0);
  std::vector<char> reported(static_cast<std::size_t>(m), 0);

  Index first = 0;
  double level = 0.0;
  for (Index j = 0; j < m; ++j) {
    if (std::abs(corr(j)) > level) {
      level = std::abs(corr(j));
      first = j;
    }
  }
  path.knots.push_back({level, 0.0, z, {}});
  if (level < kCorrelationFloor || level <= target || budget <= 0.0 || max_active < 1) return path;

  active.push_back(first);
  signs.push_back(corr(first) > 0 ? 1.0 : -1.0);
  in_active[static_cast<std::size_t>(first)] = 1;
  path.knots.back().active = active;

  Index last_dropped = -1;
  const std::size_t max_steps = 8 * static_cast<std::size_t>(m) + 64;

  for (std::size_t step = 0; step < max_steps; ++step) {
    const Index k = static_cast<Index>(active.size());
    Eigen::MatrixXd g_aa(k, k);
    Eigen::VectorXd s_a(k), c_a(k);
    for (Index p = 0; p < k; ++p) {
      s_a(p) = signs[static_cast<std::size_t>(p)];
      c_a(p) = corr0(active[static_cast<std::size_t>(p)]);
      for (Index q = 0; q < k; ++q) g_aa(p, q) = gram(active[static_cast<std::size_t>(p)], active[static_cast<std::size_t>(q)]);
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(g_aa);
    // z_A(level) = base - level * dir on this segment.
    const Eigen::VectorXd dir = ldlt.solve(s_a);
    const Eigen::VectorXd base = ldlt.solve(c_a);

    Eigen::VectorXd slope = Eigen::VectorXd::Zero(m);  // d corr / d(-level) = -slope
    for (Index p = 0; p < k; ++p) slope += gram.col(active[static_cast<std::size_t>(p)]) * dir(p);

    enum class Event { terminal, join, drop, budget, cap };
    std::vector<char> excluded(static_cast<std::size_t>(m), 0);
    Event event = Event::terminal;
    double step_len = 0.0;
    Index event_atom = -1;

    for (;;) {
      event = Event::terminal;
      step_len = level - target;
      event_atom = -1;
      const double tiny = 1e-12 * std::max(1.0, level);

      for (Index j = 0; j < m; ++j) {
        if (in_active[static_cast<std::size_t>(j)] || excluded[static_cast<std::size_t>(j)]) continue;
        const double c = corr(j);
        const double a = slope(j);
        auto consider = [&](double num, double den) {
          if (den <= 0.0) return;
          double t = num / den;
          if (j == last_dropped && t <= tiny) return;
          t = std::max(t, 0.0);
          if (t < step_len) {
            step_len = t;
            event = Event::join;
            event_atom = j;
          }
        };
        consider(level - c, 1.0 - a);
        consider(level + c, 1.0 + a);
      }

      for (Index p = 0; p < k; ++p) {
        const Index j = active[static_cast<std::size_t>(p)];
        if (s_a(p) * dir(p) < 0.0) {
          const double t = std::max(-z(j) / dir(p), 0.0);
          if (t < step_len) {
            step_len = t;
            event = Event::drop;
            event_atom = p;
          }
        }
      }

      const double norm_rate = s_a.dot(dir);
      const double norm_now = z.lpNorm<1>();
      if (std::isfinite(budget) && norm_rate > 0.0) {
        const double t = (budget - norm_now) / norm_rate;
        if (t < step_len) {
          step_len = std::max(t, 0.0);
          event = Event::budget;
          event_atom = -1;
        }
      }

      if (event != Event::join) break;
      if (k >= max_active) {
        event = Event::cap;
        break;
      }
      // Reject atoms that would make the active Gram system singular.
      const Index j = event_atom;
      Eigen::VectorXd g_aj(k);
      for (Index p = 0; p < k; ++p) g_aj(p) = gram(active[static_cast<std::size_t>(p)], j);
      const double schur = gram(j, j) - g_aj.dot(ldlt.solve(g_aj));
      if (schur > kSingularRatio * gram(j, j)) break;
      excluded[static_cast<std::size_t>(j)] = 1;
      if (!reported[static_cast<std::size_t>(j)]) {
        reported[static_cast<std::size_t>(j)] = 1;
        path.skipped.push_back({j, path.knots.size() - 1});
      }
    }

    level = event == Event::terminal ? target : std::max(level - step_len, target);
    const Eigen::VectorXd z_a = base - level * dir;
    z.setZero();
    for (Index p = 0; p < k; ++p) z(active[static_cast<std::size_t>(p)]) = z_a(p);
    corr = corr0 - gram * z;

    if (event == Event::drop) {
      const auto pos = static_cast<std::size_t>(event_atom);
      const Index atom = active[pos];
      z(atom) = 0.0;
      corr = corr0 - gram * z;
      in_active[static_cast<std::size_t>(atom)] = 0;
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(pos));
      signs.erase(signs.begin() + static_cast<std::ptrdiff_t>(pos));
      last_dropped = atom;
    } else if (event == Event::join) {
      in_active[static_cast<std::size_t>(event_atom)] = 1;
      active.push_back(event_atom);
      signs.push_back(corr(event_atom) > 0 ? 1.0 : -1.0);
      last_dropped = -1;
    }

    path.knots.push_back({level, z.lpNorm<1>(), z, active});

    if (event == Event::terminal || event == Event::budget || event == Event::cap) return path;
    if (level < kCorrelationFloor) return path;
    if (active.empty()) {
      // Every atom dropped out: restart from the most correlated one.
      Index best = -1;
      double best_corr = 0.0;
      for (Index j = 0; j < m; ++j) {
        if (j != last_dropped && std::abs(corr(j)) > best_corr) {
          best_corr = std::abs(corr(j));
          best = j;
        }
      }
      if (best < 0 || best_corr < kCorrelationFloor) return path;
      active.push_back(best);
      signs.push_back(corr(best) > 0 ? 1.0 : -1.0);
      in_active[static_cast<std::size_t>(best)] = 1;
      path.knots.back().active = active;
    }
  }
  throw NumericalError("LARS-EN path did not terminate within " + std::to_string(max_steps) + " steps");
}

inline void validate_problem(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& response, double l2) {
  if (dictionary.rows() < 1 || dictionary.cols() < 1) {
    throw InvalidArgument("dictionary must have at least one row and one column");
  }
  if (response.size() != dictionary.rows()) {
    throw InvalidArgument("response length " + std::to_string(response.size()) +
                          " does not match dictionary rows " + std::to_string(dictionary.rows()));
  }
  if (!dictionary.allFinite()) throw InvalidArgument("dictionary contains non-finite entries");
  if (!response.allFinite()) throw InvalidArgument("response contains non-finite entries");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw InvalidArgument("l2 weight must be finite and >= 0");
  for (Index j = 0; j < dictionary.cols(); ++j) {
    if (dictionary.col(j).squaredNorm() == 0.0) {
      throw InvalidArgument("dictionary column " + std::to_string(j) + " has zero norm");
    }
  }
}

inline Eigen::MatrixXd regularized_gram(const Eigen::MatrixXd& dictionary, double l2) {
  Eigen::MatrixXd gram = dictionary.transpose() * dictionary;
  gram.diagonal().array() += 2.0 * l2;
  return gram;
}

}  // namespace detail

/// Exact piecewise-linear elastic-net path as the l1 weight decreases from the
/// level where the first atom activates. Without a stop rule the path runs
/// until min(rows, m) atoms are active (m when l2 > 0).
inline ElasticNetPath lars_en_path(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& response,
                                   double l2, std::optional<StopRule> stop = std::nullopt) {
  detail::validate_problem(dictionary, response, l2);
  return detail::lars_en_gram(detail::regularized_gram(dictionary, l2), dictionary.transpose() * response,
                              dictionary.rows(), l2, stop);
}

/// Minimizer of 1/2 ||x - Bz||^2 + l2 ||z||^2 + l1 ||z||_1. With `rescale`
/// the naive solution is multiplied by (1 + 2 l2).
inline Eigen::VectorXd elastic_net_solve(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& response,
                                         double l1, double l2, bool rescale = false) {
  if (!(l1 > 0.0) || !std::isfinite(l1)) throw InvalidArgument("l1 weight must be finite and > 0");
  const auto path = lars_en_path(dictionary, response, l2, StopRule::l1_weight(l1));
  Eigen::VectorXd z = path.at_l1_weight(l1);
  if (rescale) z *= 1.0 + 2.0 * l2;
  return z;
}

struct KktReport {
  bool ok = true;
  double max_violation = 0.0;  // worst excess over the tolerance-free conditions
  Index worst_atom = -1;
};

/// Stationarity check: active atoms satisfy b'(x - Bz) - 2 l2 z = l1 sign(z),
/// inactive atoms |b'(x - Bz)| <= l1.
inline KktReport kkt_check(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& response,
                           const Eigen::VectorXd& z, double l1, double l2, double tol = 1e-8) {
  KktReport report;
  const Eigen::VectorXd corr = dictionary.transpose() * (response - dictionary * z);
  for (Index j = 0; j < z.size(); ++j) {
    double violation = 0.0;
    if (z(j) != 0.0) {
      const double sign = z(j) > 0 ? 1.0 : -1.0;
      violation = std::abs(corr(j) - 2.0 * l2 * z(j) - l1 * sign);
    } else {
      violation = std::max(0.0, std::abs(corr(j)) - l1);
    }
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_atom = j;
    }
  }
  report.ok = report.max_violation <= tol;
  return report;
}

/// n x n representation matrix with an exactly zero diagonal.
class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;
  explicit CoefficientMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) throw InvalidArgument("coefficient matrix must be square");
    if (!values_.allFinite()) throw InvalidArgument("coefficient matrix contains non-finite entries");
    for (Index i = 0; i < values_.rows(); ++i) {
      if (values_(i, i) != 0.0) {
        throw InvalidArgument("coefficient matrix diagonal entry " + std::to_string(i) + " is nonzero");
      }
    }
  }

  Index size() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }
  auto column(Index i) const { return values_.col(i); }

 private:
  Eigen::MatrixXd values_;
};

struct RmenOptions {
  unsigned threads = 1;
  bool rescale = false;
};

struct RmenResult {
  CoefficientMatrix z;
  Eigen::MatrixXd error;  // S = X - XZ
  Eigen::MatrixXd clean;  // X0 = XZ
  std::vector<KktReport> kkt;
};

/// Solves the self-expressive elastic net column by column: sample i is
/// regressed on every other sample, and the coefficients are written back with
/// z_ii = 0.
inline RmenResult robust_matrix_elastic_net(const SampleMatrix& x, const ElasticNetWeights& weights,
                                            const RmenOptions& options = {}) {
  const Index n = x.count();
  if (n < 3) throw InvalidArgument("robust matrix elastic net needs n >= 3");
  if (!(weights.l1 > 0.0) || !std::isfinite(weights.l1)) throw InvalidArgument("l1 weight must be finite and > 0");
  if (!(weights.l2 >= 0.0) || !std::isfinite(weights.l2)) throw InvalidArgument("l2 weight must be finite and >= 0");
  const Eigen::MatrixXd& data = x.values();
  for (Index j = 0; j < n; ++j) {
    if (data.col(j).squaredNorm() == 0.0) {
      throw InvalidArgument("sample " + std::to_string(j) + " has zero norm");
    }
  }

  const Eigen::MatrixXd cross = data.transpose() * data;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
  std::vector<KktReport> kkt(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t col) {
    const auto i = static_cast<Index>(col);
    try {
      const auto atoms = detail::dictionary_without(n, i);
      const Index m = n - 1;
      Eigen::MatrixXd gram(m, m);
      Eigen::VectorXd corr0(m);
      for (Index p = 0; p < m; ++p) {
        corr0(p) = cross(atoms[static_cast<std::size_t>(p)], i);
        for (Index q = 0; q < m; ++q) {
          gram(p, q) = cross(atoms[static_cast<std::size_t>(p)], atoms[static_cast<std::size_t>(q)]);
        }
      }
      gram.diagonal().array() += 2.0 * weights.l2;
      const auto path = detail::lars_en_gram(gram, corr0, x.dim(), weights.l2, StopRule::l1_weight(weights.l1));
      const Eigen::VectorXd coeffs = path.at_l1_weight(weights.l1);

      Eigen::MatrixXd dictionary(x.dim(), m);
      for (Index p = 0; p < m; ++p) dictionary.col(p) = data.col(atoms[static_cast<std::size_t>(p)]);
      kkt[col] = kkt_check(dictionary, data.col(i), coeffs, weights.l1, weights.l2);

      const double scale = options.rescale ? 1.0 + 2.0 * weights.l2 : 1.0;
      for (Index p = 0; p < m; ++p) z(atoms[static_cast<std::size_t>(p)], i) = scale * coeffs(p);
    } catch (const Error& e) {
      throw NumericalError("column " + std::to_string(i) + ": " + e.what());
    }
  });

  RmenResult result;
  result.clean = data * z;
  result.error = data - result.clean;
  result.z = CoefficientMatrix(std::move(z));
  result.kkt = std::move(kkt);
  return result;
}

}  // namespace enhg
