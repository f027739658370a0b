// Copyright 2026 The shellprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shellprop/error.hpp"
#include "shellprop/parallel.hpp"
#include "shellprop/sparse_matrix.hpp"

namespace shellprop {

using Edge = std::pair<index_t, index_t>;

/// Undirected simple graph in CSR form. Every edge is stored in both
/// directions, rows are sorted, and there are no self-loops or duplicates.
class SparseGraph {
 public:
  SparseGraph() : offsets_(1, 0) {}

  std::size_t num_nodes() const noexcept { return offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return neighbors_.size() / 2; }

  std::span<const offset_t> row_offsets() const noexcept { return offsets_; }
  std::span<const index_t> col_indices() const noexcept { return neighbors_; }

  std::span<const index_t> neighbors(std::size_t v) const {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(std::size_t v) const {
    return static_cast<std::size_t>(offsets_[v + 1] - offsets_[v]);
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), static_cast<index_t>(v));
  }

  // Undirected edges with u < v, in row order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (std::size_t u = 0; u < num_nodes(); ++u)
      for (const index_t v : neighbors(u))
        if (u < v) out.emplace_back(static_cast<index_t>(u), v);
    return out;
  }

  // Binary adjacency A as a real matrix.
  template <class T>
  SparseMatrix<T> adjacency() const {
    return SparseMatrix<T>(num_nodes(), num_nodes(), offsets_, neighbors_,
                           std::vector<T>(neighbors_.size(), T{1}));
  }

  friend SparseGraph build_graph(std::span<const Edge> edges, std::size_t n);

 private:
  std::vector<offset_t> offsets_;
  std::vector<index_t> neighbors_;
};

/// Symmetrizes, deduplicates and strips self-loops.
inline SparseGraph build_graph(std::span<const Edge> edges, std::size_t n) {
  require(n > 0, ErrorKind::Input, "build_graph: node count must be positive");
  require(n <= std::numeric_limits<index_t>::max(), ErrorKind::Resource,
          "build_graph: node count exceeds 32-bit index range");
  std::vector<Edge> arcs;
  arcs.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    require(u < n && v < n, ErrorKind::Input,
            "build_graph: edge (" + std::to_string(u) + "," + std::to_string(v) +
                ") has id outside [0," + std::to_string(n) + ")");
    if (u == v) continue;
    arcs.emplace_back(u, v);
    arcs.emplace_back(v, u);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  SparseGraph g;
  g.offsets_.assign(n + 1, 0);
  g.neighbors_.reserve(arcs.size());
  for (const auto& [u, v] : arcs) {
    ++g.offsets_[u + 1];
    g.neighbors_.push_back(v);
  }
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  return g;
}

inline SparseGraph build_graph(std::initializer_list<Edge> edges,
                               std::size_t n) {
  return build_graph(std::span<const Edge>(edges.begin(), edges.size()), n);
}

// Distances are hop counts; kUnreachable compares greater than every
// reachable distance.
inline constexpr std::uint32_t kUnreachable =
    std::numeric_limits<std::uint32_t>::max();

struct DistanceField {
  index_t source = 0;
  std::vector<std::uint32_t> dist;

  std::uint32_t eccentricity() const {
    std::uint32_t ecc = 0;
    for (const auto d : dist)
      if (d != kUnreachable) ecc = std::max(ecc, d);
    return ecc;
  }
};

namespace detail {

// BFS into caller-owned buffers. `queue` must have capacity num_nodes.
inline void bfs_into(const SparseGraph& g, std::size_t source,
                     std::vector<std::uint32_t>& dist,
                     std::vector<index_t>& queue, std::uint32_t max_depth) {
  dist.assign(g.num_nodes(), kUnreachable);
  queue.resize(g.num_nodes());
  std::size_t head = 0, tail = 0;
  dist[source] = 0;
  queue[tail++] = static_cast<index_t>(source);
  while (head < tail) {
    const index_t u = queue[head++];
    const std::uint32_t next = dist[u] + 1;
    if (next > max_depth) continue;
    for (const index_t v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = next;
        queue[tail++] = v;
      }
    }
  }
}

}  // namespace detail

inline DistanceField bfs_distances(const SparseGraph& g, std::size_t source) {
  require(source < g.num_nodes(), ErrorKind::Input,
          "bfs_distances: source " + std::to_string(source) +
              " outside [0," + std::to_string(g.num_nodes()) + ")");
  DistanceField field;
  field.source = static_cast<index_t>(source);
  std::vector<index_t> queue;
  detail::bfs_into(g, source, field.dist, queue, kUnreachable - 1);
  return field;
}

/// Largest finite pairwise distance (maximum over components). Zero for
/// edgeless graphs.
inline std::uint32_t diameter(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::uint32_t> ecc(n, 0);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> dist;
        std::vector<index_t> queue;
        for (std::size_t s = begin; s < end; ++s) {
          detail::bfs_into(g, s, dist, queue, kUnreachable - 1);
          std::uint32_t e = 0;
          for (const auto d : dist)
            if (d != kUnreachable) e = std::max(e, d);
          ecc[s] = e;
        }
      },
      16);
  return n == 0 ? 0 : *std::max_element(ecc.begin(), ecc.end());
}

// Component id per node; ids are assigned in order of smallest member.
inline std::vector<index_t> connected_components(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  constexpr index_t kNone = std::numeric_limits<index_t>::max();
  std::vector<index_t> comp(n, kNone);
  std::vector<index_t> stack;
  index_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != kNone) continue;
    comp[s] = next;
    stack.push_back(static_cast<index_t>(s));
    while (!stack.empty()) {
      const index_t u = stack.back();
      stack.pop_back();
      for (const index_t v : g.neighbors(u)) {
        if (comp[v] == kNone) {
          comp[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

inline std::size_t count_components(const SparseGraph& g) {
  const auto comp = connected_components(g);
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

inline bool is_connected(const SparseGraph& g) {
  return count_components(g) == 1;
}

/// Relabels node v as perm[v].
inline SparseGraph permute(const SparseGraph& g, std::span<const index_t> perm) {
  require(perm.size() == g.num_nodes(), ErrorKind::Input,
          "permute: permutation length mismatch");
  std::vector<Edge> edges;
  for (const auto& [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
  return build_graph(edges, g.num_nodes());
}

// Edge-list text: one "u<TAB>v" pair per line, 0-based ids, '#' comments and
// blank lines ignored.
struct EdgeList {
  std::vector<Edge> edges;
  std::size_t implied_nodes = 0;  // max id + 1, or 0 when empty
};

inline EdgeList read_edge_list(std::istream& in, const std::string& name) {
  EdgeList out;
  std::string line;
  std::size_t line_no = 0;
  auto parse_id = [&](std::string_view tok) {
    std::uint64_t v = 0;
    const auto* end = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    require(ec == std::errc{} && ptr == end &&
                v < std::numeric_limits<index_t>::max(),
            ErrorKind::Input,
            name + ":" + std::to_string(line_no) + ": bad node id '" +
                std::string(tok) + "'");
    return static_cast<index_t>(v);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos && line.find('\t', tab + 1) == std::string::npos,
            ErrorKind::Input,
            name + ":" + std::to_string(line_no) +
                ": expected two tab-separated node ids");
    const std::string_view view(line);
    const index_t u = parse_id(view.substr(0, tab));
    const index_t v = parse_id(view.substr(tab + 1));
    out.edges.emplace_back(u, v);
    out.implied_nodes = std::max<std::size_t>(out.implied_nodes,
                                              std::max(u, v) + std::size_t{1});
  }
  return out;
}

inline EdgeList read_edge_list(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Input, "cannot open " + path);
  return read_edge_list(in, path);
}

inline void write_edge_list(std::ostream& out, const SparseGraph& g) {
  for (const auto& [u, v] : g.edges()) out << u << '\t' << v << '\n';
}

}  // namespace shellprop
