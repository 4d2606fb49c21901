#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cggm {

// Undirected graph on p labeled vertices. Edges live in a flat bitset over
// the p(p-1)/2 vertex pairs in row-major upper-triangle order, which keeps
// toggling O(1) and scanning cache-friendly in the sampler hot path.
// Vertices are 0-based here; user-facing I/O is 1-based.
class UndirectedGraph {
 public:
  explicit UndirectedGraph(int p);

  static UndirectedGraph complete(int p);

  int vertex_count() const { return p_; }
  int pair_count() const { return p_ * (p_ - 1) / 2; }
  int edge_count() const { return edge_count_; }

  // Row-major index of the pair (v1, v2), v1 < v2.
  int pair_index(int v1, int v2) const;
  std::pair<int, int> pair_at(int index) const;

  bool has_edge(int v1, int v2) const;
  void set_edge(int v1, int v2, bool present);
  void toggle_edge(int v1, int v2);
  UndirectedGraph toggled(int v1, int v2) const;

  // d^G_v: neighbors of v among the later vertices v+1..p-1.
  int later_degree(int v) const;
  std::vector<int> neighbors(int v) const;

  // Canonical byte string; injective over graphs with equal p.
  std::string key() const;
  std::string key_hex() const;

  bool operator==(const UndirectedGraph& other) const;

  const std::vector<std::uint64_t>& bits() const { return bits_; }

 private:
  void check_pair(int v1, int v2) const;
  int p_;
  int edge_count_;
  std::vector<std::uint64_t> bits_;
};

// Builds a graph from a 1-based edge list; symmetric duplicates collapse.
// Throws std::invalid_argument on out-of-range indices or self-loops.
UndirectedGraph make_graph(int p,
                           const std::vector<std::pair<int, int>>& edges);

// Graph with each edge present independently with probability 1/2.
template <typename RngT>
UndirectedGraph random_graph(int p, RngT& rng) {
  UndirectedGraph g(p);
  for (int v1 = 0; v1 < p; ++v1) {
    for (int v2 = v1 + 1; v2 < p; ++v2) {
      if (rng.next() & 1ull) g.set_edge(v1, v2, true);
    }
  }
  return g;
}

}  // namespace cggm
