#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sattn/mask_matrix.hpp"
#include "sattn/rng.hpp"

namespace sattn {

/// Simple undirected graph with sorted adjacency lists and no self-loops.
class UndirectedGraph {
 public:
  explicit UndirectedGraph(std::size_t n = 0) : adj_(n) {}

  /// Edge {i, j} for every i != j with bit(i, j) or bit(j, i).
  static UndirectedGraph from_mask(const MaskMatrix& m);
  /// Each vertex joined to its k nearest neighbours on either side of a ring.
  static UndirectedGraph ring_lattice(std::size_t n, std::size_t k);
  /// Uniform G(n, m).
  static UndirectedGraph random_gnm(std::size_t n, std::size_t m, SeededRng& rng);

  std::size_t n() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept;
  const std::vector<std::size_t>& neighbors(std::size_t v) const noexcept { return adj_[v]; }
  double mean_degree() const noexcept;

 private:
  void finalize();
  std::vector<std::vector<std::size_t>> adj_;
};

struct TriangleCount {
  std::uint64_t triangles = 0;
  std::uint64_t connected_triples = 0;  ///< sum over v of deg(v) choose 2
  double clustering() const noexcept {
    return connected_triples ? static_cast<double>(3 * triangles) / static_cast<double>(connected_triples) : 0.0;
  }
};

TriangleCount count_triangles(const UndirectedGraph& g);

/// Global clustering coefficient 3T / (connected triples).
double clustering_coefficient(const UndirectedGraph& g);

/// Mean shortest-path length over ordered pairs of distinct vertices (all-pairs
/// BFS). Throws DisconnectedGraphError.
double average_path_length(const UndirectedGraph& g);

/// Closed-form clustering of a ring lattice with k neighbours per side.
double ring_lattice_clustering(std::size_t k);

struct GraphMetrics {
  double clustering = 0;
  double path_length = 0;
  double small_worldness = 0;  ///< (C / C_rand) / (L / L_rand)
  double clustering_random = 0;
  double path_length_random = 0;
  double mean_degree = 0;
  std::size_t baseline_samples = 0;
};

/// Small-world statistics of the symmetrized mask graph. C_rand = <k> / (n-1);
/// L_rand is averaged over `baseline_samples` connected G(n, m) draws with the
/// same edge count.
GraphMetrics smallworld_metrics(const MaskMatrix& adjacency, SeededRng& rng, std::size_t baseline_samples = 10);

}  // namespace sattn
