#pragma once

// JSON and CSV exports: hypergraph documents, path tables, metric records.

#include "json.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "enhg/datio.hpp"
#include "enhg/elasticnet.hpp"
#include "enhg/hypergraph.hpp"

namespace enhg {

namespace detail {

inline nlohmann::json edge_json(const Hyperedge& e) {
  nlohmann::json j;
  j["centroid"] = e.centroid;
  j["members"] = e.members;
  j["weight"] = e.weight;
  j["theta"] = e.theta;
  if (e.forced) j["forced"] = true;
  return j;
}

}  // namespace detail

/// {n, edges: [{centroid, members, weight, theta}], dropped: [...]}
inline nlohmann::json to_json(const Hypergraph& g) {
  nlohmann::json doc;
  doc["n"] = g.vertex_count();
  doc["edges"] = nlohmann::json::array();
  doc["dropped"] = nlohmann::json::array();
  for (const auto& e : g.edges()) {
    (e.kept ? doc["edges"] : doc["dropped"]).push_back(detail::edge_json(e));
  }
  return doc;
}

inline Hypergraph hypergraph_from_json(const nlohmann::json& doc) {
  try {
    const Index n = doc.at("n").get<Index>();
    std::vector<Hyperedge> edges;
    auto read = [&](const nlohmann::json& list, bool kept) {
      for (const auto& item : list) {
        Hyperedge e;
        e.centroid = item.at("centroid").get<Index>();
        e.members = item.at("members").get<std::vector<Index>>();
        e.weight = item.at("weight").get<double>();
        e.theta = item.value("theta", 0.0);
        e.forced = item.value("forced", false);
        e.kept = kept;
        edges.push_back(std::move(e));
      }
    };
    read(doc.at("edges"), true);
    if (doc.contains("dropped")) read(doc.at("dropped"), false);
    return Hypergraph(n, std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed hypergraph document: ") + e.what());
  }
}

/// Rows (knot_index, s, atom_index, coefficient) for every atom that is ever
/// active on the path. `atom_ids` maps dictionary columns to exported ids.
inline void write_path_csv(std::ostream& out, const ElasticNetPath& path,
                           const std::optional<std::vector<Index>>& atom_ids = std::nullopt) {
  std::set<Index> atoms;
  for (const auto& knot : path.knots) atoms.insert(knot.active.begin(), knot.active.end());
  const auto s = path.path_fraction();
  out << "knot_index,s,atom_index,coefficient\n";
  for (std::size_t k = 0; k < path.knots.size(); ++k) {
    for (const Index a : atoms) {
      const Index id = atom_ids ? (*atom_ids)[static_cast<std::size_t>(a)] : a;
      out << k << ',' << detail::format_double(s[k]) << ',' << id << ','
          << detail::format_double(path.knots[k].coefficients(a)) << '\n';
    }
  }
}

/// {metric, value, n, seed}
inline nlohmann::json metric_record(const std::string& metric, double value, std::size_t n, std::uint64_t seed) {
  return {{"metric", metric}, {"value", value}, {"n", n}, {"seed", seed}};
}

inline void write_labels_csv(std::ostream& out, const std::string& column, const std::vector<int>& labels) {
  out << "index," << column << '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

}  // namespace enhg
