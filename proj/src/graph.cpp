#include "cggm/graph.hpp"

#include <stdexcept>

namespace cggm {

UndirectedGraph::UndirectedGraph(int p) : p_(p), edge_count_(0) {
  if (p < 1) throw std::invalid_argument("graph: vertex count must be >= 1");
  bits_.assign((pair_count() + 63) / 64, 0ull);
  if (bits_.empty()) bits_.push_back(0ull);  // p = 1 still needs a key
}

UndirectedGraph UndirectedGraph::complete(int p) {
  UndirectedGraph g(p);
  for (int v1 = 0; v1 < p; ++v1)
    for (int v2 = v1 + 1; v2 < p; ++v2) g.set_edge(v1, v2, true);
  return g;
}

void UndirectedGraph::check_pair(int v1, int v2) const {
  if (v1 < 0 || v1 >= p_ || v2 < 0 || v2 >= p_) {
    throw std::out_of_range("graph: vertex index out of range");
  }
  if (v1 == v2) throw std::invalid_argument("graph: self-loops not allowed");
}

int UndirectedGraph::pair_index(int v1, int v2) const {
  check_pair(v1, v2);
  if (v1 > v2) std::swap(v1, v2);
  return v1 * p_ - v1 * (v1 + 1) / 2 + (v2 - v1 - 1);
}

std::pair<int, int> UndirectedGraph::pair_at(int index) const {
  if (index < 0 || index >= pair_count()) {
    throw std::out_of_range("graph: pair index out of range");
  }
  int v1 = 0;
  int row = p_ - 1;
  while (index >= row) {
    index -= row;
    --row;
    ++v1;
  }
  return {v1, v1 + 1 + index};
}

bool UndirectedGraph::has_edge(int v1, int v2) const {
  const int idx = pair_index(v1, v2);
  return (bits_[idx >> 6] >> (idx & 63)) & 1ull;
}

void UndirectedGraph::set_edge(int v1, int v2, bool present) {
  const int idx = pair_index(v1, v2);
  const std::uint64_t mask = 1ull << (idx & 63);
  const bool was = bits_[idx >> 6] & mask;
  if (was == present) return;
  bits_[idx >> 6] ^= mask;
  edge_count_ += present ? 1 : -1;
}

void UndirectedGraph::toggle_edge(int v1, int v2) {
  set_edge(v1, v2, !has_edge(v1, v2));
}

UndirectedGraph UndirectedGraph::toggled(int v1, int v2) const {
  UndirectedGraph g = *this;
  g.toggle_edge(v1, v2);
  return g;
}

int UndirectedGraph::later_degree(int v) const {
  if (v < 0 || v >= p_) throw std::out_of_range("graph: vertex out of range");
  int d = 0;
  for (int w = v + 1; w < p_; ++w) {
    if (has_edge(v, w)) ++d;
  }
  return d;
}

std::vector<int> UndirectedGraph::neighbors(int v) const {
  if (v < 0 || v >= p_) throw std::out_of_range("graph: vertex out of range");
  std::vector<int> nb;
  for (int w = 0; w < p_; ++w) {
    if (w != v && has_edge(std::min(v, w), std::max(v, w))) nb.push_back(w);
  }
  return nb;
}

std::string UndirectedGraph::key() const {
  const int nbytes = (pair_count() + 7) / 8;
  std::string out(static_cast<std::size_t>(std::max(nbytes, 1)), '\0');
  for (int idx = 0; idx < pair_count(); ++idx) {
    if ((bits_[idx >> 6] >> (idx & 63)) & 1ull) {
      out[idx >> 3] |= static_cast<char>(1 << (idx & 7));
    }
  }
  return out;
}

std::string UndirectedGraph::key_hex() const {
  static const char* hex = "0123456789abcdef";
  std::string k = key();
  std::string out;
  out.reserve(2 * k.size());
  for (unsigned char c : k) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 15]);
  }
  return out;
}

bool UndirectedGraph::operator==(const UndirectedGraph& other) const {
  return p_ == other.p_ && bits_ == other.bits_;
}

UndirectedGraph make_graph(int p,
                           const std::vector<std::pair<int, int>>& edges) {
  UndirectedGraph g(p);
  for (const auto& [a, b] : edges) {
    if (a < 1 || a > p || b < 1 || b > p) {
      throw std::invalid_argument("make_graph: vertex label outside 1.." +
                                  std::to_string(p));
    }
    if (a == b) {
      throw std::invalid_argument("make_graph: self-loop at vertex " +
                                  std::to_string(a));
    }
    g.set_edge(a - 1, b - 1, true);
  }
  return g;
}

}  // namespace cggm
