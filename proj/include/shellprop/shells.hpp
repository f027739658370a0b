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

// Hop-shell decomposition of a graph and the propagation operator built from
// it.
//
// Shell l holds the ordered pairs (i, j), i != j, whose shortest-path distance
// is exactly l. Shells are disjoint and together cover every reachable pair,
// so each neighbor contributes to a node through exactly one shell instead of
// through every walk that reaches it. Each shell is symmetrically normalized
// with a self-loop, D^-1/2 (T + I) D^-1/2, and the normalized shells are fused
// with geometrically decaying weights (1 - 1/alpha)^l.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shellprop/dense_matrix.hpp"
#include "shellprop/error.hpp"
#include "shellprop/graph.hpp"
#include "shellprop/parallel.hpp"
#include "shellprop/sparse_matrix.hpp"

namespace shellprop {

/// Binary pattern matrix; every stored value is 1.
using PatternMatrix = SparseMatrix<std::uint8_t>;

struct ShellDecomposition {
  std::size_t n = 0;
  std::vector<PatternMatrix> shells;  // shells[l - 1] is the distance-l shell

  std::size_t l_max() const noexcept { return shells.size(); }

  std::vector<std::size_t> shell_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(shells.size());
    for (const auto& s : shells) sizes.push_back(s.nnz());
    return sizes;
  }

  std::size_t total_entries() const {
    std::size_t total = 0;
    for (const auto& s : shells) total += s.nnz();
    return total;
  }
};

/// Reachability-within-l pattern: (i, j) is set iff dis(i, j) <= l. The
/// diagonal is always set, so l = 0 gives the identity.
inline PatternMatrix cumulative_matrix(const SparseGraph& g, std::uint32_t l) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<index_t>> rows(n);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> dist;
        std::vector<index_t> queue;
        for (std::size_t s = begin; s < end; ++s) {
          detail::bfs_into(g, s, dist, queue, l);
          auto& row = rows[s];
          for (std::size_t j = 0; j < n; ++j)
            if (dist[j] <= l) row.push_back(static_cast<index_t>(j));
        }
      },
      16);
  std::vector<offset_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + rows[i].size();
  std::vector<index_t> indices;
  indices.reserve(offsets.back());
  for (auto& row : rows) indices.insert(indices.end(), row.begin(), row.end());
  std::vector<std::uint8_t> values(indices.size(), 1);
  return PatternMatrix(n, n, std::move(offsets), std::move(indices),
                       std::move(values));
}

/// Buckets every node's BFS distances into shells T_1..T_L, where L is the
/// largest finite eccentricity, optionally capped by l_cap. Runs one BFS per
/// node; rows are merged in source order so the result does not depend on
/// the worker count.
inline ShellDecomposition shell_decompose(
    const SparseGraph& g, std::optional<std::uint32_t> l_cap = std::nullopt) {
  require(!l_cap || *l_cap >= 1, ErrorKind::Config,
          "shell_decompose: layer cap must be at least 1");
  const std::size_t n = g.num_nodes();
  const std::uint32_t depth_limit = l_cap ? *l_cap : kUnreachable - 1;

  // Per source: columns grouped by distance (ascending ids within a group)
  // and the size of each group for distances 1..ecc.
  struct SourceRow {
    std::vector<index_t> cols;
    std::vector<std::uint32_t> counts;
  };
  std::vector<SourceRow> per_source(n);

  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> dist;
        std::vector<index_t> queue;
        std::vector<std::uint64_t> cursor;
        for (std::size_t s = begin; s < end; ++s) {
          detail::bfs_into(g, s, dist, queue, depth_limit);
          auto& out = per_source[s];
          for (std::size_t j = 0; j < n; ++j) {
            const auto d = dist[j];
            if (d == 0 || d == kUnreachable) continue;
            if (out.counts.size() < d) out.counts.resize(d, 0);
            ++out.counts[d - 1];
          }
          cursor.assign(out.counts.size() + 1, 0);
          for (std::size_t l = 0; l < out.counts.size(); ++l)
            cursor[l + 1] = cursor[l] + out.counts[l];
          out.cols.resize(cursor.back());
          for (std::size_t j = 0; j < n; ++j) {
            const auto d = dist[j];
            if (d == 0 || d == kUnreachable) continue;
            out.cols[cursor[d - 1]++] = static_cast<index_t>(j);
          }
        }
      },
      16);

  std::size_t depth = 0;
  for (const auto& row : per_source) depth = std::max(depth, row.counts.size());

  ShellDecomposition result;
  result.n = n;
  result.shells.reserve(depth);
  std::vector<std::size_t> start(n, 0);  // read position into each source row
  for (std::size_t l = 0; l < depth; ++l) {
    std::vector<offset_t> offsets(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& counts = per_source[i].counts;
      offsets[i + 1] = offsets[i] + (l < counts.size() ? counts[l] : 0);
    }
    std::vector<index_t> indices(offsets.back());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = per_source[i];
      if (l >= row.counts.size()) continue;
      std::copy_n(row.cols.begin() + static_cast<std::ptrdiff_t>(start[i]),
                  row.counts[l], indices.begin() + static_cast<std::ptrdiff_t>(offsets[i]));
      start[i] += row.counts[l];
    }
    std::vector<std::uint8_t> values(indices.size(), 1);
    result.shells.emplace_back(n, n, std::move(offsets), std::move(indices),
                               std::move(values));
  }
  return result;
}

/// Per-shell average degree |T_l| / n.
inline std::vector<double> shell_degree_profile(const ShellDecomposition& d) {
  std::vector<double> profile;
  profile.reserve(d.l_max());
  for (const auto& s : d.shells)
    profile.push_back(static_cast<double>(s.nnz()) / static_cast<double>(d.n));
  return profile;
}

/// D^-1/2 (T + I) D^-1/2 with D the row degrees of T + I. The input must be
/// a symmetric binary pattern with an empty diagonal.
template <class T = double>
SparseMatrix<T> normalize_shell(const PatternMatrix& t) {
  require(t.rows() == t.cols(), ErrorKind::Input,
          "normalize_shell: matrix is not square");
  require(t.is_symmetric(), ErrorKind::Input,
          "normalize_shell: shell pattern is not symmetric");
  const std::size_t n = t.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = t.row_indices(i);
    require(!std::binary_search(idx.begin(), idx.end(), static_cast<index_t>(i)),
            ErrorKind::Input,
            "normalize_shell: diagonal entry present in row " + std::to_string(i));
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(idx.size() + 1));
  }
  std::vector<offset_t> offsets(n + 1, 0);
  std::vector<index_t> indices;
  std::vector<T> values;
  indices.reserve(t.nnz() + n);
  values.reserve(t.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool diagonal_done = false;
    for (const index_t j : t.row_indices(i)) {
      if (!diagonal_done && j > i) {
        indices.push_back(static_cast<index_t>(i));
        values.push_back(static_cast<T>(inv_sqrt[i] * inv_sqrt[i]));
        diagonal_done = true;
      }
      indices.push_back(j);
      values.push_back(static_cast<T>(inv_sqrt[i] * inv_sqrt[j]));
    }
    if (!diagonal_done) {
      indices.push_back(static_cast<index_t>(i));
      values.push_back(static_cast<T>(inv_sqrt[i] * inv_sqrt[i]));
    }
    offsets[i + 1] = indices.size();
  }
  return SparseMatrix<T>(n, n, std::move(offsets), std::move(indices),
                         std::move(values));
}

/// theta_l = (1 - 1/alpha)^l for l = 1..l_max. alpha must exceed 1: at
/// alpha = 1 every weight is zero and propagation vanishes.
inline std::vector<double> ppr_coefficients(double alpha, std::size_t l_max) {
  require(std::isfinite(alpha) && alpha > 1.0, ErrorKind::Config,
          "alpha must be > 1 (got " + std::to_string(alpha) +
              "); alpha = 1 gives theta_l = (1 - 1/alpha)^l = 0 for every "
              "shell and annihilates propagation");
  std::vector<double> theta(l_max);
  const double base = 1.0 - 1.0 / alpha;
  for (std::size_t l = 0; l < l_max; ++l)
    theta[l] = std::pow(base, static_cast<double>(l + 1));
  return theta;
}

/// Weighted sum of normalized shells, sum_l theta_l * That_l, kept as the
/// list of shells.
template <class T = double>
struct FusedPropagator {
  std::size_t n = 0;
  std::vector<SparseMatrix<T>> normalized_shells;
  std::vector<double> coefficients;
  double alpha = 0.0;  // 0 when coefficients were supplied directly

  std::size_t l_max() const noexcept { return normalized_shells.size(); }

  void validate() const {
    require(normalized_shells.size() == coefficients.size(), ErrorKind::Input,
            "fused propagator: shell and coefficient counts differ");
    for (const auto& s : normalized_shells)
      require(s.rows() == n && s.cols() == n, ErrorKind::Input,
              "fused propagator: shell shape does not match node count");
  }
};

template <class T = double>
FusedPropagator<T> make_fused_propagator(const ShellDecomposition& d,
                                         double alpha) {
  FusedPropagator<T> p;
  p.n = d.n;
  p.alpha = alpha;
  p.coefficients = ppr_coefficients(alpha, d.l_max());
  p.normalized_shells.reserve(d.l_max());
  for (const auto& shell : d.shells)
    p.normalized_shells.push_back(normalize_shell<T>(shell));
  return p;
}

/// sum_l theta_l * (That_l z), evaluated shell by shell.
template <class T>
DenseMatrix<T> fused_propagate(const FusedPropagator<T>& p,
                               const DenseMatrix<T>& z) {
  require(z.rows() == p.n, ErrorKind::Input,
          "fused_propagate: input has " + std::to_string(z.rows()) +
              " rows, propagator has " + std::to_string(p.n) + " nodes");
  DenseMatrix<T> out(p.n, z.cols());
  parallel_for(p.n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r)
      for (std::size_t l = 0; l < p.l_max(); ++l)
        detail::accumulate_row(p.normalized_shells[l], r, z,
                               static_cast<T>(p.coefficients[l]), out.row(r));
  });
  return out;
}

/// Rows `rows` of the fused product, in the given order.
template <class T>
DenseMatrix<T> fused_propagate_rows(const FusedPropagator<T>& p,
                                    const DenseMatrix<T>& z,
                                    std::span<const index_t> rows) {
  require(z.rows() == p.n, ErrorKind::Input,
          "fused_propagate_rows: input row count does not match node count");
  DenseMatrix<T> out(rows.size(), z.cols());
  parallel_for(rows.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      require(rows[k] < p.n, ErrorKind::Input,
              "fused_propagate_rows: row id out of range");
      for (std::size_t l = 0; l < p.l_max(); ++l)
        detail::accumulate_row(p.normalized_shells[l], rows[k], z,
                               static_cast<T>(p.coefficients[l]), out.row(k));
    }
  });
  return out;
}

/// Transposed product restricted to a row subset: returns That^T * G where G
/// is zero outside `rows` and G[rows[k]] = g.row(k). Every normalized shell
/// is symmetric, so That^T row j equals That row j and the product is a
/// scatter of |rows| shell rows.
template <class T>
DenseMatrix<T> fused_adjoint_from_rows(const FusedPropagator<T>& p,
                                       std::span<const index_t> rows,
                                       const DenseMatrix<T>& g) {
  require(g.rows() == rows.size(), ErrorKind::Input,
          "fused_adjoint_from_rows: gradient rows do not match row ids");
  DenseMatrix<T> out(p.n, g.cols());
  const std::size_t width = g.cols();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = g.row(k);
    for (std::size_t l = 0; l < p.l_max(); ++l) {
      const auto& shell = p.normalized_shells[l];
      const T theta = static_cast<T>(p.coefficients[l]);
      const auto idx = shell.row_indices(rows[k]);
      const auto val = shell.row_values(rows[k]);
      for (std::size_t e = 0; e < idx.size(); ++e) {
        const T w = theta * val[e];
        T* dst = out.row(idx[e]).data();
        for (std::size_t c = 0; c < width; ++c) dst[c] += w * src[c];
      }
    }
  }
  return out;
}

/// The fused operator as one sparse matrix. Off-diagonal patterns of the
/// shells are disjoint, so the union has sum_l |T_l| + n entries.
template <class T>
SparseMatrix<T> fused_matrix(const FusedPropagator<T>& p) {
  SparseMatrix<T> acc = SparseMatrix<T>::from_entries(p.n, p.n, {});
  for (std::size_t l = 0; l < p.l_max(); ++l)
    acc = linear_combination(T{1}, acc, static_cast<T>(p.coefficients[l]),
                             p.normalized_shells[l]);
  return acc;
}

}  // namespace shellprop
