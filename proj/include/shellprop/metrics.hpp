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

// Over-aggregation diagnostics.
//
// AvgNAT(A, L) = (1/N) * sum_ij (A^L)_ij counts the average number of walk
// terms a node aggregates to see L hops away. SAS(A, K) is the mean fraction
// of a node's row mass in A^K that sits on its own diagonal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "shellprop/dense_matrix.hpp"
#include "shellprop/error.hpp"
#include "shellprop/graph.hpp"
#include "shellprop/parallel.hpp"
#include "shellprop/shells.hpp"
#include "shellprop/sparse_matrix.hpp"

namespace shellprop {

using WalkCount = boost::multiprecision::cpp_int;

enum class PropagatorKind { SymNorm, RwNorm, Residual, FusedShell, RawAdjacency };

inline std::string_view to_string(PropagatorKind kind) {
  switch (kind) {
    case PropagatorKind::SymNorm:
      return "sym";
    case PropagatorKind::RwNorm:
      return "rw";
    case PropagatorKind::Residual:
      return "residual";
    case PropagatorKind::FusedShell:
      return "fused";
    case PropagatorKind::RawAdjacency:
      return "raw";
  }
  return "unknown";
}

struct Propagator {
  SparseMatrix<double> matrix;
  PropagatorKind kind = PropagatorKind::SymNorm;
  double beta = 0.0;  // only meaningful for Residual
};

namespace detail {

// A + I with entries scaled by left[i] * right[j].
inline SparseMatrix<double> scaled_with_self_loops(const SparseGraph& g,
                                                   const std::vector<double>& left,
                                                   const std::vector<double>& right) {
  const std::size_t n = g.num_nodes();
  std::vector<offset_t> offsets(n + 1, 0);
  std::vector<index_t> indices;
  std::vector<double> values;
  indices.reserve(2 * g.num_edges() + n);
  values.reserve(2 * g.num_edges() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool diagonal_done = false;
    for (const index_t j : g.neighbors(i)) {
      if (!diagonal_done && j > i) {
        indices.push_back(static_cast<index_t>(i));
        values.push_back(left[i] * right[i]);
        diagonal_done = true;
      }
      indices.push_back(j);
      values.push_back(left[i] * right[j]);
    }
    if (!diagonal_done) {
      indices.push_back(static_cast<index_t>(i));
      values.push_back(left[i] * right[i]);
    }
    offsets[i + 1] = indices.size();
  }
  return SparseMatrix<double>(n, n, std::move(offsets), std::move(indices),
                              std::move(values));
}

}  // namespace detail

/// D~^-1/2 (A + I) D~^-1/2.
inline Propagator sym_norm_propagator(const SparseGraph& g) {
  std::vector<double> s(g.num_nodes());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  return {detail::scaled_with_self_loops(g, s, s), PropagatorKind::SymNorm, 0.0};
}

/// D~^-1 (A + I); row-stochastic.
inline Propagator rw_norm_propagator(const SparseGraph& g) {
  std::vector<double> inv(g.num_nodes());
  for (std::size_t i = 0; i < inv.size(); ++i)
    inv[i] = 1.0 / static_cast<double>(g.degree(i) + 1);
  const std::vector<double> ones(g.num_nodes(), 1.0);
  return {detail::scaled_with_self_loops(g, inv, ones), PropagatorKind::RwNorm,
          0.0};
}

inline Propagator raw_adjacency_propagator(const SparseGraph& g) {
  return {g.adjacency<double>(), PropagatorKind::RawAdjacency, 0.0};
}

/// beta * P + (1 - beta) * I.
inline Propagator residual_propagator(const Propagator& p, double beta) {
  require(beta > 0.0 && beta < 1.0, ErrorKind::Config,
          "residual beta must lie strictly between 0 and 1 (got " +
              std::to_string(beta) + ")");
  const auto eye = SparseMatrix<double>::identity(p.matrix.rows());
  return {linear_combination(beta, p.matrix, 1.0 - beta, eye),
          PropagatorKind::Residual, beta};
}

inline Propagator fused_shell_propagator(const FusedPropagator<double>& p) {
  return {fused_matrix(p), PropagatorKind::FusedShell, 0.0};
}

/// Exact 1^T A^l 1 for the binary adjacency of g.
inline WalkCount total_walks(const SparseGraph& g, std::size_t l) {
  const std::size_t n = g.num_nodes();
  std::vector<WalkCount> v(n, WalkCount(1)), next(n);
  for (std::size_t step = 0; step < l; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      WalkCount acc = 0;
      for (const index_t j : g.neighbors(i)) acc += v[j];
      next[i] = std::move(acc);
    }
    v.swap(next);
  }
  WalkCount total = 0;
  for (const auto& x : v) total += x;
  return total;
}

/// AvgNAT of the graph's binary adjacency, with exact integer accumulation.
inline double avg_nat(const SparseGraph& g, std::size_t l) {
  require(l >= 1, ErrorKind::Config, "avg_nat: power must be at least 1");
  return static_cast<double>(total_walks(g, l)) /
         static_cast<double>(g.num_nodes());
}

/// AvgNAT of a real matrix in 64-bit floating point, via l sparse
/// matrix-vector products. Entries of A^l are bounded by
/// n * (max row |sum|)^l; when that bound passes 2^53 integer-valued results
/// would lose exactness, so the call is rejected in favor of the exact
/// graph overload.
inline double avg_nat(const SparseMatrix<double>& a, std::size_t l) {
  require(l >= 1, ErrorKind::Config, "avg_nat: power must be at least 1");
  require(a.rows() == a.cols() && a.rows() > 0, ErrorKind::Input,
          "avg_nat: matrix must be square and non-empty");
  const std::size_t n = a.rows();
  double max_row = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const double v : a.row_values(i)) s += std::abs(v);
    max_row = std::max(max_row, s);
  }
  const double log2_bound = std::log2(static_cast<double>(n)) +
                            static_cast<double>(l) * std::log2(std::max(max_row, 1.0));
  require(log2_bound <= 53.0, ErrorKind::Resource,
          "avg_nat: walk totals may exceed 2^53 (bound 2^" +
              std::to_string(log2_bound) +
              "); use the exact integer mode on the graph");
  std::vector<double> v(n, 1.0), next(n);
  for (std::size_t step = 0; step < l; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = a.row_indices(i);
      const auto val = a.row_values(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < idx.size(); ++k) acc += val[k] * v[idx[k]];
      next[i] = acc;
    }
    v.swap(next);
  }
  double total = 0.0;
  for (const double x : v) total += x;
  return total / static_cast<double>(n);
}

namespace detail {

// Runs rows [begin, end) of A^k for k = 1..k_max and adds each row's
// diagonal fraction into fraction_sum[k - 1]. Row r of A^(k+1) is
// row r of A^k times A.
inline void sas_block(const SparseMatrix<double>& a, std::size_t begin,
                      std::size_t end, std::size_t k_max,
                      std::vector<double>& fraction_sum) {
  const std::size_t n = a.rows();
  const std::size_t width = end - begin;
  std::vector<double> cur(width * n, 0.0), nxt(width * n, 0.0);
  std::vector<double> fractions(width);
  for (std::size_t r = 0; r < width; ++r) {
    const auto idx = a.row_indices(begin + r);
    const auto val = a.row_values(begin + r);
    for (std::size_t e = 0; e < idx.size(); ++e) cur[r * n + idx[e]] = val[e];
  }
  for (std::size_t k = 1; k <= k_max; ++k) {
    parallel_for(width, [&](std::size_t rb, std::size_t re) {
      for (std::size_t r = rb; r < re; ++r) {
        const double* row = cur.data() + r * n;
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += row[j];
        if (!(total > 0.0))
          fail(ErrorKind::Numeric, "sas: row " + std::to_string(begin + r) +
                                       " of A^" + std::to_string(k) +
                                       " has non-positive sum");
        fractions[r] = row[begin + r] / total;
      }
    });
    for (std::size_t r = 0; r < width; ++r) fraction_sum[k - 1] += fractions[r];
    if (k == k_max) break;
    parallel_for(width, [&](std::size_t rb, std::size_t re) {
      for (std::size_t r = rb; r < re; ++r) {
        const double* row = cur.data() + r * n;
        double* out = nxt.data() + r * n;
        std::fill(out, out + n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          const double w = row[j];
          if (w == 0.0) continue;
          const auto idx = a.row_indices(j);
          const auto val = a.row_values(j);
          for (std::size_t e = 0; e < idx.size(); ++e) out[idx[e]] += w * val[e];
        }
      }
    });
    cur.swap(nxt);
  }
}

inline constexpr std::size_t kSasBlockRows = 256;

}  // namespace detail

/// SAS(A, k) for k = 1..k_max. Rows of A^k are produced in blocks of source
/// nodes, so memory is O(block * n) rather than O(n^2).
inline std::vector<double> sas_values(const SparseMatrix<double>& a,
                                      std::size_t k_max) {
  require(k_max >= 1, ErrorKind::Config, "sas: k must be at least 1");
  require(a.rows() == a.cols() && a.rows() > 0, ErrorKind::Input,
          "sas: matrix must be square and non-empty");
  const std::size_t n = a.rows();
  std::vector<double> fraction_sum(k_max, 0.0);
  for (std::size_t b = 0; b < n; b += detail::kSasBlockRows)
    detail::sas_block(a, b, std::min(n, b + detail::kSasBlockRows), k_max,
                      fraction_sum);
  for (auto& v : fraction_sum) v /= static_cast<double>(n);
  return fraction_sum;
}

inline double sas(const SparseMatrix<double>& a, std::size_t k) {
  return sas_values(a, k).back();
}

/// Smallest k <= k_limit with |SAS(A, k) - target| < tol, iterating all rows
/// in lockstep. Intended for graphs small enough to hold A^k densely.
inline std::optional<std::size_t> sas_band_entry(const SparseMatrix<double>& a,
                                                 double target, double tol,
                                                 std::size_t k_limit) {
  const std::size_t n = a.rows();
  require(n > 0 && n <= 4096, ErrorKind::Resource,
          "sas_band_entry: node count outside dense lockstep range");
  std::vector<double> cur = std::vector<double>(n * n, 0.0), nxt(n * n, 0.0);
  const auto dense = a.to_dense();
  std::copy(dense.values().begin(), dense.values().end(), cur.begin());
  for (std::size_t k = 1; k <= k_limit; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = cur.data() + r * n;
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += row[j];
      if (!(total > 0.0))
        fail(ErrorKind::Numeric,
             "sas: row " + std::to_string(r) + " has non-positive sum");
      sum += row[r] / total;
    }
    if (std::abs(sum / static_cast<double>(n) - target) < tol) return k;
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = cur.data() + r * n;
      double* out = nxt.data() + r * n;
      std::fill(out, out + n, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double w = row[j];
        if (w == 0.0) continue;
        const auto idx = a.row_indices(j);
        const auto val = a.row_values(j);
        for (std::size_t e = 0; e < idx.size(); ++e) out[idx[e]] += w * val[e];
      }
    }
    cur.swap(nxt);
  }
  return std::nullopt;
}

struct MetricReport {
  PropagatorKind kind = PropagatorKind::SymNorm;
  std::size_t n = 0;
  double avg_nat = 0.0;
  std::vector<double> sas;  // sas[k - 1] = SAS(P, k)
  double limit_gap = 0.0;   // |SAS(P, k_max) - 1/N|
};

/// SAS trajectory of a propagator. avg_nat is left at zero; see
/// make_metric_report.
inline MetricReport sas_trajectory(const Propagator& p, std::size_t k_max) {
  MetricReport report;
  report.kind = p.kind;
  report.n = p.matrix.rows();
  report.sas = sas_values(p.matrix, k_max);
  report.limit_gap =
      std::abs(report.sas.back() - 1.0 / static_cast<double>(report.n));
  return report;
}

/// Trajectory plus the aggregation count needed to reach every node: for
/// walk-based propagators AvgNAT(A, diameter) with exact integers; for the
/// fused shell propagator AvgNAT of the binary shell union at power 1.
inline MetricReport make_metric_report(const SparseGraph& g, const Propagator& p,
                                       std::size_t k_max,
                                       const ShellDecomposition* shells = nullptr) {
  MetricReport report = sas_trajectory(p, k_max);
  if (p.kind == PropagatorKind::FusedShell) {
    require(shells != nullptr, ErrorKind::Input,
            "metric report: fused propagator requires its shell decomposition");
    report.avg_nat = static_cast<double>(shells->total_entries()) /
                     static_cast<double>(g.num_nodes());
  } else {
    const auto diam = diameter(g);
    report.avg_nat = diam == 0 ? 0.0 : avg_nat(g, diam);
  }
  return report;
}

struct WalkBoundVerdict {
  std::size_t n = 0;
  std::uint32_t diameter = 0;
  WalkCount walk_total = 0;  // 1^T A^diameter 1
  double avg_nat = 0.0;
  bool lower_holds = false;  // N - 1 <= AvgNAT
  bool upper_holds = false;  // AvgNAT < 2^(N-2)
};

/// Evaluates AvgNAT(A, diameter) exactly and tests both walk-count bounds,
/// N - 1 <= AvgNAT < 2^(N-2), as integer comparisons on N * AvgNAT.
inline WalkBoundVerdict walk_bound_check(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  require(n >= 2, ErrorKind::Input, "walk bound check: need at least 2 nodes");
  require(is_connected(g), ErrorKind::Input,
          "walk bound check: graph must be connected");
  WalkBoundVerdict v;
  v.n = n;
  v.diameter = diameter(g);
  v.walk_total = total_walks(g, v.diameter);
  v.avg_nat = static_cast<double>(v.walk_total) / static_cast<double>(n);
  const WalkCount big_n(n);
  v.lower_holds = v.walk_total >= big_n * (big_n - 1);
  WalkCount pow2 = 1;
  pow2 <<= static_cast<unsigned>(n - 2);
  v.upper_holds = v.walk_total < big_n * pow2;
  return v;
}

}  // namespace shellprop
