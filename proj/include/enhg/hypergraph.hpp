#pragma once

// Elastic-net hypergraph: each sample is the centroid of one hyperedge whose
// other members are the samples with prominent reconstruction coefficients.
// Weights come from the coefficient affinity |<z_i, z_j>|.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "enhg/datio.hpp"
#include "enhg/elasticnet.hpp"
#include "enhg/error.hpp"

namespace enhg {

/// How the per-column membership threshold is chosen.
struct ThresholdRule {
  enum class Kind { mean_abs_all, mean_abs_nonzero, fixed };
  Kind kind = Kind::mean_abs_all;
  double value = 0.0;

  static ThresholdRule mean_abs_all() { return {Kind::mean_abs_all, 0.0}; }
  static ThresholdRule mean_abs_nonzero() { return {Kind::mean_abs_nonzero, 0.0}; }
  static ThresholdRule fixed(double theta) { return {Kind::fixed, theta}; }

  /// Accepts "mean_all", "mean_nonzero" or "fixed:<value>".
  static ThresholdRule parse(std::string_view text) {
    if (text == "mean_all" || text == "mean_abs_all") return mean_abs_all();
    if (text == "mean_nonzero" || text == "mean_abs_nonzero") return mean_abs_nonzero();
    if (text.substr(0, 6) == "fixed:") {
      const auto v = detail::parse_double(text.substr(6));
      if (v && *v >= 0.0 && std::isfinite(*v)) return fixed(*v);
    }
    throw InvalidArgument("invalid threshold rule '" + std::string(text) + "'");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::mean_abs_all: return "mean_all";
      case Kind::mean_abs_nonzero: return "mean_nonzero";
      case Kind::fixed: return "fixed:" + detail::format_double(value);
    }
    return "unknown";
  }
};

/// Column j of `h` is hyperedge e_j; theta[j] is the threshold that produced it.
struct Incidence {
  Eigen::MatrixXd h;
  std::vector<double> theta;
  std::vector<bool> centroid_only;
};

/// e_j = {v_j} plus every v_i with |z_ij| > theta_j (strict).
inline Incidence incidence_from_coefficients(const CoefficientMatrix& z, const ThresholdRule& rule) {
  const Index n = z.size();
  Incidence out;
  out.h = Eigen::MatrixXd::Zero(n, n);
  out.theta.assign(static_cast<std::size_t>(n), 0.0);
  out.centroid_only.assign(static_cast<std::size_t>(n), true);

  for (Index j = 0; j < n; ++j) {
    double theta = rule.value;
    if (rule.kind != ThresholdRule::Kind::fixed) {
      double sum = 0.0;
      Index nonzero = 0;
      for (Index i = 0; i < n; ++i) {
        if (i == j) continue;
        const double a = std::abs(z.values()(i, j));
        sum += a;
        if (a != 0.0) ++nonzero;
      }
      if (rule.kind == ThresholdRule::Kind::mean_abs_all) {
        theta = n > 1 ? sum / static_cast<double>(n - 1) : 0.0;
      } else {
        theta = nonzero > 0 ? sum / static_cast<double>(nonzero) : 0.0;
      }
    }
    out.theta[static_cast<std::size_t>(j)] = theta;
    out.h(j, j) = 1.0;
    for (Index i = 0; i < n; ++i) {
      if (i != j && std::abs(z.values()(i, j)) > theta) {
        out.h(i, j) = 1.0;
        out.centroid_only[static_cast<std::size_t>(j)] = false;
      }
    }
  }
  return out;
}

/// M(i,j) = |<z_i, z_j>| over coefficient columns, mirrored so M is exactly symmetric.
inline Eigen::MatrixXd affinity(const CoefficientMatrix& z) {
  const Index n = z.size();
  Eigen::MatrixXd m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double v = std::abs(z.column(i).dot(z.column(j)));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

/// w(e_i) = sum over members v_j of e_i, j != i, of M(i,j).
inline Eigen::VectorXd hyperedge_weights(const Eigen::MatrixXd& h, const Eigen::MatrixXd& m) {
  if (h.rows() != m.rows() || h.cols() != m.cols() || m.rows() != m.cols()) {
    throw InvalidArgument("incidence and affinity shapes do not match");
  }
  const Index n = h.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < h.rows(); ++j) {
      if (j != i && h(j, i) != 0.0) w(i) += m(i, j);
    }
  }
  return w;
}

struct Degrees {
  Eigen::VectorXd vertex;  // d(v) = sum_e w(e) h(v,e)
  Eigen::VectorXd edge;    // delta(e) = sum_v h(v,e)
};

inline Degrees degrees(const Eigen::MatrixXd& h, const Eigen::VectorXd& w) {
  if (h.cols() != w.size()) throw InvalidArgument("incidence and weight shapes do not match");
  if ((w.array() < 0.0).any()) throw InvalidArgument("hyperedge weights must be >= 0");
  return {h * w, h.colwise().sum().transpose()};
}

struct Hyperedge {
  Index centroid = 0;
  std::vector<Index> members;  // ascending, contains centroid
  double weight = 0.0;
  double theta = 0.0;
  bool kept = true;
  bool forced = false;  // membership rebuilt by degeneracy repair
};

/// Weighted hypergraph. Only kept hyperedges contribute to degrees and
/// operators; dropped ones are retained for inspection.
class Hypergraph {
 public:
  Hypergraph() = default;

  Hypergraph(Index n, std::vector<Hyperedge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ < 1) throw InvalidArgument("hypergraph needs at least one vertex");
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      auto& edge = edges_[e];
      std::sort(edge.members.begin(), edge.members.end());
      if (std::adjacent_find(edge.members.begin(), edge.members.end()) != edge.members.end()) {
        throw InvalidArgument("hyperedge " + std::to_string(e) + " lists a vertex twice");
      }
      for (const Index v : edge.members) {
        if (v < 0 || v >= n_) throw InvalidArgument("hyperedge " + std::to_string(e) + " has an out-of-range vertex");
      }
      if (!std::binary_search(edge.members.begin(), edge.members.end(), edge.centroid)) {
        throw InvalidArgument("hyperedge " + std::to_string(e) + " does not contain its centroid");
      }
      if (edge.kept) {
        if (edge.members.size() < 2) {
          throw InvalidArgument("kept hyperedge " + std::to_string(e) + " has fewer than 2 members");
        }
        if (!(edge.weight > 0.0) || !std::isfinite(edge.weight)) {
          throw InvalidArgument("kept hyperedge " + std::to_string(e) + " has non-positive weight");
        }
      }
    }
    vertex_degree_ = Eigen::VectorXd::Zero(n_);
    for (const auto& edge : edges_) {
      if (!edge.kept) continue;
      for (const Index v : edge.members) vertex_degree_(v) += edge.weight;
    }
  }

  Index vertex_count() const { return n_; }
  const std::vector<Hyperedge>& edges() const { return edges_; }

  std::size_t kept_count() const {
    return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](const auto& e) { return e.kept; }));
  }

  /// n x |kept| incidence matrix.
  Eigen::MatrixXd incidence() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_, static_cast<Index>(kept_count()));
    Index col = 0;
    for (const auto& edge : edges_) {
      if (!edge.kept) continue;
      for (const Index v : edge.members) h(v, col) = 1.0;
      ++col;
    }
    return h;
  }

  Eigen::VectorXd weights() const {
    Eigen::VectorXd w(static_cast<Index>(kept_count()));
    Index col = 0;
    for (const auto& edge : edges_) {
      if (edge.kept) w(col++) = edge.weight;
    }
    return w;
  }

  const Eigen::VectorXd& vertex_degrees() const { return vertex_degree_; }

  Eigen::VectorXd edge_degrees() const {
    Eigen::VectorXd d(static_cast<Index>(kept_count()));
    Index col = 0;
    for (const auto& edge : edges_) {
      if (edge.kept) d(col++) = static_cast<double>(edge.members.size());
    }
    return d;
  }

  std::vector<Index> isolated_vertices() const {
    std::vector<Index> out;
    for (Index v = 0; v < n_; ++v) {
      if (!(vertex_degree_(v) > 0.0)) out.push_back(v);
    }
    return out;
  }

  /// Copy with every weight multiplied by `factor` (> 0).
  Hypergraph with_scaled_weights(double factor) const {
    if (!(factor > 0.0)) throw InvalidArgument("weight scale must be > 0");
    auto edges = edges_;
    for (auto& e : edges) e.weight *= factor;
    return Hypergraph(n_, std::move(edges));
  }

 private:
  Index n_ = 0;
  std::vector<Hyperedge> edges_;
  Eigen::VectorXd vertex_degree_;
};

/// Theta = Dv^{-1/2} H W De^{-1} H' Dv^{-1/2}, accumulated edge by edge.
inline Eigen::MatrixXd theta_matrix(const Hypergraph& g) {
  const auto isolated = g.isolated_vertices();
  if (!isolated.empty()) {
    std::string names;
    for (std::size_t k = 0; k < isolated.size() && k < 20; ++k) {
      if (k) names += ", ";
      names += std::to_string(isolated[k]);
    }
    if (isolated.size() > 20) names += ", ...";
    throw NumericalError("zero vertex degree at vertices [" + names + "]");
  }
  const Index n = g.vertex_count();
  const Eigen::VectorXd inv_sqrt = g.vertex_degrees().array().rsqrt();
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n, n);
  for (const auto& edge : g.edges()) {
    if (!edge.kept) continue;
    const double scale = edge.weight / static_cast<double>(edge.members.size());
    for (std::size_t a = 0; a < edge.members.size(); ++a) {
      const Index u = edge.members[a];
      theta(u, u) += scale * inv_sqrt(u) * inv_sqrt(u);
      for (std::size_t b = a + 1; b < edge.members.size(); ++b) {
        const Index v = edge.members[b];
        const double value = scale * inv_sqrt(u) * inv_sqrt(v);
        theta(u, v) += value;
        theta(v, u) += value;
      }
    }
  }
  return theta;
}

/// Normalized hypergraph Laplacian L = I - Theta.
inline Eigen::MatrixXd laplacian(const Hypergraph& g) {
  Eigen::MatrixXd l = -theta_matrix(g);
  l.diagonal().array() += 1.0;
  return l;
}

struct EnhgOptions {
  ThresholdRule threshold = ThresholdRule::mean_abs_all();
  bool normalize = true;
  RmenOptions solver;
};

/// Everything produced while building an elastic-net hypergraph.
struct EnhgModel {
  SampleMatrix data;  // the (normalized) samples the solver saw
  RmenResult representation;
  Incidence incidence;
  Eigen::MatrixXd affinity;
  Hypergraph graph;
};

/// Builds the hypergraph from the elastic-net representation of every sample.
///
/// Degenerate hyperedges (fewer than two members or zero weight) are dropped.
/// A vertex left in no kept hyperedge has its own hyperedge rebuilt as
/// {itself, strongest coefficient of its column}; if that pair has zero
/// affinity as well, the build fails.
inline EnhgModel build_enhg(const SampleMatrix& x, const ElasticNetWeights& weights,
                            const EnhgOptions& options = {}) {
  EnhgModel model;
  model.data = options.normalize ? normalize_columns(x) : x;
  model.representation = robust_matrix_elastic_net(model.data, weights, options.solver);
  const CoefficientMatrix& z = model.representation.z;
  const Index n = z.size();

  model.incidence = incidence_from_coefficients(z, options.threshold);
  model.affinity = affinity(z);
  const Eigen::VectorXd w = hyperedge_weights(model.incidence.h, model.affinity);

  std::vector<Hyperedge> edges(static_cast<std::size_t>(n));
  Eigen::VectorXd vertex_degree = Eigen::VectorXd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    auto& edge = edges[static_cast<std::size_t>(j)];
    edge.centroid = j;
    edge.theta = model.incidence.theta[static_cast<std::size_t>(j)];
    edge.weight = w(j);
    for (Index i = 0; i < n; ++i) {
      if (model.incidence.h(i, j) != 0.0) edge.members.push_back(i);
    }
    edge.kept = edge.members.size() >= 2 && edge.weight > 0.0;
    if (edge.kept) {
      for (const Index v : edge.members) vertex_degree(v) += edge.weight;
    }
  }

  for (Index v = 0; v < n; ++v) {
    if (vertex_degree(v) > 0.0) continue;
    Index partner = -1;
    double best = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double a = std::abs(z.values()(j, v));
      if (a > best) {
        best = a;
        partner = j;
      }
    }
    if (partner < 0) {
      throw NumericalError("vertex " + std::to_string(v) +
                           " is isolated: every coefficient of its representation is zero");
    }
    const double weight = model.affinity(v, partner);
    if (!(weight > 0.0)) {
      throw NumericalError("vertex " + std::to_string(v) + " is isolated: its strongest partner " +
                           std::to_string(partner) + " has zero affinity");
    }
    auto& edge = edges[static_cast<std::size_t>(v)];
    edge.members = {std::min(v, partner), std::max(v, partner)};
    edge.weight = weight;
    edge.kept = true;
    edge.forced = true;
    vertex_degree(v) += weight;
    vertex_degree(partner) += weight;
  }

  model.graph = Hypergraph(n, std::move(edges));
  return model;
}

}  // namespace enhg
