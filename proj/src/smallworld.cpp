#include "sattn/smallworld.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "sattn/error.hpp"

namespace sattn {

void UndirectedGraph::finalize() {
  for (auto& a : adj_) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
}

UndirectedGraph UndirectedGraph::from_mask(const MaskMatrix& m) {
  UndirectedGraph g(m.n());
  for (std::size_t i = 0; i < m.n(); ++i)
    for (std::size_t j = 0; j < m.n(); ++j)
      if (i != j && m(i, j)) {
        g.adj_[i].push_back(j);
        g.adj_[j].push_back(i);
      }
  g.finalize();
  return g;
}

UndirectedGraph UndirectedGraph::ring_lattice(std::size_t n, std::size_t k) {
  if (2 * k >= n) throw ConfigError("ring_lattice: need 2k < n");
  UndirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 1; o <= k; ++o) {
      const std::size_t j = (i + o) % n;
      g.adj_[i].push_back(j);
      g.adj_[j].push_back(i);
    }
  g.finalize();
  return g;
}

UndirectedGraph UndirectedGraph::random_gnm(std::size_t n, std::size_t m, SeededRng& rng) {
  if (n < 2 || m > n * (n - 1) / 2) throw ConfigError("random_gnm: edge count out of range");
  UndirectedGraph g(n);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(m * 2);
  while (seen.size() < m) {
    const auto a = rng.uniform_below(n);
    const auto b = rng.uniform_below(n);
    if (a == b) continue;
    const auto lo = std::min(a, b), hi = std::max(a, b);
    if (seen.insert(lo * n + hi).second) {
      g.adj_[lo].push_back(hi);
      g.adj_[hi].push_back(lo);
    }
  }
  g.finalize();
  return g;
}

std::size_t UndirectedGraph::edge_count() const noexcept {
  std::size_t twice = 0;
  for (const auto& a : adj_) twice += a.size();
  return twice / 2;
}

double UndirectedGraph::mean_degree() const noexcept {
  return adj_.empty() ? 0.0 : 2.0 * static_cast<double>(edge_count()) / static_cast<double>(adj_.size());
}

TriangleCount count_triangles(const UndirectedGraph& g) {
  TriangleCount tc;
  std::uint64_t closed = 0;  // each triangle seen once per edge, i.e. 3 times
  for (std::size_t u = 0; u < g.n(); ++u) {
    const auto& nu = g.neighbors(u);
    const std::uint64_t d = nu.size();
    tc.connected_triples += d * (d - (d > 0 ? 1 : 0)) / 2;
    for (auto v : nu) {
      if (v <= u) continue;
      const auto& nv = g.neighbors(v);
      auto a = nu.begin();
      auto b = nv.begin();
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++closed;
          ++a;
          ++b;
        }
      }
    }
  }
  tc.triangles = closed / 3;
  return tc;
}

double clustering_coefficient(const UndirectedGraph& g) { return count_triangles(g).clustering(); }

double average_path_length(const UndirectedGraph& g) {
  const std::size_t n = g.n();
  if (n < 2) return 0.0;
  const auto sn = static_cast<std::ptrdiff_t>(n);
  std::uint64_t total = 0;
  std::ptrdiff_t unreachable = -1;
#pragma omp parallel
  {
    std::vector<std::uint32_t> dist(n);
    std::vector<std::size_t> queue(n);
#pragma omp for schedule(dynamic, 16) reduction(+ : total)
    for (std::ptrdiff_t s = 0; s < sn; ++s) {
      std::fill(dist.begin(), dist.end(), UINT32_MAX);
      std::size_t head = 0, tail = 0;
      dist[static_cast<std::size_t>(s)] = 0;
      queue[tail++] = static_cast<std::size_t>(s);
      while (head < tail) {
        const std::size_t u = queue[head++];
        for (auto v : g.neighbors(u))
          if (dist[v] == UINT32_MAX) {
            dist[v] = dist[u] + 1;
            total += dist[v];
            queue[tail++] = v;
          }
      }
      if (tail != n && s == 0) {
        for (std::size_t v = 0; v < n; ++v)
          if (dist[v] == UINT32_MAX) {
            unreachable = static_cast<std::ptrdiff_t>(v);
            break;
          }
      }
    }
  }
  if (unreachable >= 0) throw DisconnectedGraphError(0, static_cast<std::size_t>(unreachable));
  return static_cast<double>(total) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double ring_lattice_clustering(std::size_t k) {
  if (k < 1) throw ConfigError("ring_lattice_clustering: k must be >= 1");
  return static_cast<double>(3 * (k - 1)) / static_cast<double>(2 * (2 * k - 1));
}

GraphMetrics smallworld_metrics(const MaskMatrix& adjacency, SeededRng& rng, std::size_t baseline_samples) {
  if (baseline_samples < 1) throw ConfigError("smallworld_metrics: need at least one baseline sample");
  const UndirectedGraph g = UndirectedGraph::from_mask(adjacency);
  const std::size_t n = g.n();
  if (n < 3) throw ConfigError("smallworld_metrics: need n >= 3");

  GraphMetrics m;
  m.clustering = clustering_coefficient(g);
  m.path_length = average_path_length(g);
  m.mean_degree = g.mean_degree();
  m.clustering_random = m.mean_degree / static_cast<double>(n - 1);
  m.baseline_samples = baseline_samples;

  double l_rand = 0.0;
  std::size_t kept = 0;
  for (std::size_t attempt = 0; kept < baseline_samples; ++attempt) {
    if (attempt >= 100 * baseline_samples) {
      throw ConfigError("smallworld_metrics: degree-matched random graphs are almost never connected");
    }
    const UndirectedGraph r = UndirectedGraph::random_gnm(n, g.edge_count(), rng);
    try {
      l_rand += average_path_length(r);
      ++kept;
    } catch (const DisconnectedGraphError&) {
      // resample
    }
  }
  m.path_length_random = l_rand / static_cast<double>(kept);
  m.small_worldness = (m.clustering / m.clustering_random) / (m.path_length / m.path_length_random);
  return m;
}

}  // namespace sattn
