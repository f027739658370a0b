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

#include "shellprop/shells.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "gtest/gtest.h"
#include "shellprop/rng.hpp"
#include "shellprop/synthetic.hpp"
#include "support/oracles.hpp"

namespace shellprop {
namespace {

using Pairs = std::set<std::pair<index_t, index_t>>;

Pairs pattern(const PatternMatrix& m) {
  Pairs out;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (const index_t c : m.row_indices(r)) out.emplace(static_cast<index_t>(r), c);
  return out;
}

TEST(CumulativeMatrix, PathExamples) {
  const auto p3 = path_graph(3);
  EXPECT_EQ(pattern(cumulative_matrix(p3, 1)),
            (Pairs{{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 0}, {1, 2}, {2, 1}}));
  EXPECT_EQ(cumulative_matrix(p3, 2).nnz(), 9u);
  EXPECT_EQ(cumulative_matrix(p3, 0).to_dense(),
            SparseMatrix<std::uint8_t>::identity(3).to_dense());
}

// Off-diagonal pattern of C_l equals f(A + ... + A^l) from dense powers.
TEST(CumulativeMatrix, MatchesMatrixPowerOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 39);
    const auto g = random_connected_graph(n, 0.04, rng);
    const auto a = testing::dense_adjacency(g);
    testing::Dense power = testing::Dense::identity(n);
    testing::Dense sum(n, n);
    for (std::uint32_t l = 1; l <= 5; ++l) {
      power = testing::dense_product(power, a);
      for (std::size_t i = 0; i < n * n; ++i) sum.values()[i] += power.values()[i];
      const auto c = cumulative_matrix(g, l);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) {
            EXPECT_EQ(c.at(i, j) != 0, sum(i, j) != 0.0);
          }
    }
  }
}

TEST(ShellDecompose, Examples) {
  const auto p3 = shell_decompose(path_graph(3));
  ASSERT_EQ(p3.l_max(), 2u);
  EXPECT_EQ(pattern(p3.shells[0]), (Pairs{{0, 1}, {1, 0}, {1, 2}, {2, 1}}));
  EXPECT_EQ(pattern(p3.shells[1]), (Pairs{{0, 2}, {2, 0}}));

  const auto k3 = shell_decompose(complete_graph(3));
  ASSERT_EQ(k3.l_max(), 1u);
  EXPECT_EQ(k3.shells[0].nnz(), 6u);

  const auto s4 = shell_decompose(star_graph(4));
  ASSERT_EQ(s4.l_max(), 2u);
  EXPECT_EQ(s4.shell_sizes(), (std::vector<std::size_t>{6, 6}));
  EXPECT_EQ(s4.total_entries(), 12u);
  EXPECT_EQ(pattern(s4.shells[0]),
            (Pairs{{0, 1}, {0, 2}, {0, 3}, {1, 0}, {2, 0}, {3, 0}}));
}

TEST(ShellDecompose, CapAndEdgeCases) {
  const auto capped = shell_decompose(path_graph(6), 2);
  EXPECT_EQ(capped.l_max(), 2u);
  EXPECT_EQ(capped.shells[1].nnz(), 8u);
  EXPECT_THROW(shell_decompose(path_graph(3), 0), Error);
  EXPECT_EQ(shell_decompose(build_graph({}, 3)).l_max(), 0u);
  // Disconnected: depth follows the largest component.
  const auto two = shell_decompose(build_graph({{0, 1}, {2, 3}, {3, 4}}, 5));
  EXPECT_EQ(two.l_max(), 2u);
  EXPECT_EQ(two.total_entries(), 2u + 6u);
}

TEST(ShellDecompose, DisjointExactCoverAgainstFloydWarshall) {
  Rng rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 59);
    const auto g = random_connected_graph(n, 0.08 * uniform01(rng), rng);
    const auto d = shell_decompose(g);
    const auto fw = testing::floyd_warshall(g);
    EXPECT_EQ(d.total_entries(), n * (n - 1));
    for (std::size_t l = 0; l < d.l_max(); ++l) {
      const auto& shell = d.shells[l];
      EXPECT_TRUE(shell.is_symmetric());
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          EXPECT_EQ(shell.at(i, j) != 0, i != j && fw[i][j] == l + 1);
    }
  }
}

TEST(ShellDecompose, ConsecutiveCumulativeDifference) {
  Rng rng(77);
  const auto g = random_connected_graph(30, 0.05, rng);
  const auto d = shell_decompose(g);
  for (std::uint32_t l = 1; l <= d.l_max(); ++l) {
    const auto hi = pattern(cumulative_matrix(g, l));
    const auto lo = pattern(cumulative_matrix(g, l - 1));
    Pairs diff;
    for (const auto& p : hi)
      if (!lo.contains(p)) diff.insert(p);
    EXPECT_EQ(diff, pattern(d.shells[l - 1]));
  }
}

TEST(ShellDecompose, PermutationEquivariance) {
  Rng rng(99);
  const auto g = random_connected_graph(25, 0.06, rng);
  std::vector<index_t> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(std::span<index_t>(perm), rng);
  const auto d = shell_decompose(g);
  const auto dp = shell_decompose(permute(g, perm));
  ASSERT_EQ(d.l_max(), dp.l_max());
  for (std::size_t l = 0; l < d.l_max(); ++l) {
    Pairs mapped;
    for (const auto& [i, j] : pattern(d.shells[l])) mapped.emplace(perm[i], perm[j]);
    EXPECT_EQ(mapped, pattern(dp.shells[l]));
  }
}

TEST(ShellDegreeProfile, Examples) {
  const auto p3 = shell_degree_profile(shell_decompose(path_graph(3)));
  ASSERT_EQ(p3.size(), 2u);
  EXPECT_DOUBLE_EQ(p3[0], 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(p3[1], 2.0 / 3.0);
  EXPECT_EQ(shell_degree_profile(shell_decompose(complete_graph(3))),
            std::vector<double>{2.0});
  EXPECT_EQ(shell_degree_profile(shell_decompose(star_graph(4))),
            (std::vector<double>{1.5, 1.5}));
}

TEST(NormalizeShell, Examples) {
  const PatternMatrix empty = PatternMatrix::from_entries(2, 2, {});
  EXPECT_EQ(normalize_shell(empty).to_dense(), DenseMatrix<double>::identity(2));

  const auto k2 = shell_decompose(complete_graph(2)).shells[0];
  const auto nk2 = normalize_shell(k2).to_dense();
  for (const double v : nk2.values()) EXPECT_DOUBLE_EQ(v, 0.5);

  // P3 first shell: T + I has row sums (2, 3, 2).
  const auto np3 = normalize_shell(shell_decompose(path_graph(3)).shells[0]);
  EXPECT_NEAR(np3.at(0, 1), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(np3.at(1, 2), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(np3.at(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(np3.at(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(np3.at(0, 2), 0.0);
}

TEST(NormalizeShell, RejectsAsymmetricOrDiagonal) {
  EXPECT_THROW(normalize_shell(PatternMatrix::from_entries(2, 2, {{0, 1, 1}})), Error);
  EXPECT_THROW(normalize_shell(PatternMatrix::from_entries(2, 2, {{0, 0, 1}})), Error);
}

// Spectral radius by power iteration on a symmetric non-negative matrix.
double spectral_radius(const SparseMatrix<double>& m) {
  DenseMatrix<double> v(m.rows(), 1, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    auto w = spmm(m, v);
    double norm = 0.0;
    for (const double x : w.values()) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    lambda = norm;
    for (auto& x : w.values()) x /= norm;
    v = std::move(w);
  }
  return lambda;
}

TEST(NormalizeShell, SymmetricWithSpectralRadiusAtMostOne) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_connected_graph(3 + uniform_below(rng, 25), 0.1, rng);
    for (const auto& shell : shell_decompose(g).shells) {
      const auto t = normalize_shell(shell);
      EXPECT_TRUE(t.is_symmetric(1e-12));
      for (std::size_t i = 0; i < t.rows(); ++i) EXPECT_GT(t.at(i, i), 0.0);
      EXPECT_LE(spectral_radius(t), 1.0 + 1e-9);
    }
  }
}

TEST(PprCoefficients, Examples) {
  EXPECT_EQ(ppr_coefficients(2.0, 3), (std::vector<double>{0.5, 0.25, 0.125}));
  const auto c = ppr_coefficients(10.0, 2);
  EXPECT_NEAR(c[0], 0.9, 1e-15);
  EXPECT_NEAR(c[1], 0.81, 1e-15);
  EXPECT_THROW(ppr_coefficients(1.0, 3), Error);
  EXPECT_THROW(ppr_coefficients(0.5, 3), Error);
  try {
    ppr_coefficients(1.0, 1);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(PprCoefficients, StrictlyDecreasingInUnitInterval) {
  for (const double alpha : {1.5, 2.0, 5.0, 10.0}) {
    const auto c = ppr_coefficients(alpha, 12);
    for (std::size_t l = 0; l < c.size(); ++l) {
      EXPECT_GT(c[l], 0.0);
      EXPECT_LT(c[l], 1.0);
      if (l) {
        EXPECT_LT(c[l], c[l - 1]);
      }
    }
  }
}

TEST(FusedPropagate, SingleShellIdentityInput) {
  const auto d = shell_decompose(complete_graph(4));
  FusedPropagator<double> p;
  p.n = 4;
  p.normalized_shells = {normalize_shell(d.shells[0])};
  p.coefficients = {1.0};
  const auto out = fused_propagate(p, DenseMatrix<double>::identity(4));
  EXPECT_EQ(out, p.normalized_shells[0].to_dense());
}

TEST(FusedPropagate, PathMatchesDenseFusionOracle) {
  const auto g = path_graph(3);
  const auto p = make_fused_propagator(shell_decompose(g), 2.0);
  const auto out = fused_propagate(p, DenseMatrix<double>::identity(3));
  EXPECT_LT(max_abs_diff(out, testing::dense_fused(g, 2.0)), 1e-15);
  // 0.5 * That_1 + 0.25 * That_2 by hand at (0, 2): That_2 = 0.5 * [[1,0,1],...].
  EXPECT_NEAR(out(0, 2), 0.25 * 0.5, 1e-15);
  EXPECT_NEAR(out(0, 1), 0.5 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(out(1, 1), 0.5 / 3.0 + 0.25 * 1.0, 1e-15);
}

TEST(FusedPropagate, RandomGraphsMatchDenseOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + uniform_below(rng, 30);
    const auto g = random_connected_graph(n, 0.05, rng);
    const double alpha = 1.5 + 8.0 * uniform01(rng);
    const auto p = make_fused_propagator(shell_decompose(g), alpha);
    DenseMatrix<double> z(n, 5);
    for (auto& v : z.values()) v = standard_normal(rng);
    const auto expected = testing::dense_product(testing::dense_fused(g, alpha), z);
    EXPECT_LT(max_abs_diff(fused_propagate(p, z), expected), 1e-10);
    EXPECT_LT(max_abs_diff(spmm(fused_matrix(p), z), expected), 1e-10);
  }
}

TEST(FusedPropagate, ZeroInputAndShapeMismatch) {
  const auto p = make_fused_propagator(shell_decompose(path_graph(5)), 3.0);
  const DenseMatrix<double> zero(5, 3);
  EXPECT_EQ(fused_propagate(p, zero), zero);
  EXPECT_THROW(fused_propagate(p, DenseMatrix<double>(4, 3)), Error);
}

TEST(FusedPropagate, Linear) {
  Rng rng(31);
  const auto g = random_connected_graph(20, 0.1, rng);
  const auto p = make_fused_propagator(shell_decompose(g), 5.0);
  DenseMatrix<double> z1(20, 3), z2(20, 3), mix(20, 3);
  for (auto& v : z1.values()) v = standard_normal(rng);
  for (auto& v : z2.values()) v = standard_normal(rng);
  const double a = 1.7, b = -0.4;
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix.values()[i] = a * z1.values()[i] + b * z2.values()[i];
  const auto f1 = fused_propagate(p, z1), f2 = fused_propagate(p, z2);
  DenseMatrix<double> expected(20, 3);
  for (std::size_t i = 0; i < expected.size(); ++i)
    expected.values()[i] = a * f1.values()[i] + b * f2.values()[i];
  EXPECT_LT(max_abs_diff(fused_propagate(p, mix), expected), 1e-10);
}

TEST(FusedPropagate, RowSubsetAndAdjointAgreeWithFullProduct) {
  Rng rng(41);
  const auto g = random_connected_graph(30, 0.05, rng);
  const auto p = make_fused_propagator(shell_decompose(g), 2.0);
  DenseMatrix<double> z(30, 4);
  for (auto& v : z.values()) v = standard_normal(rng);
  const std::vector<index_t> rows = {29, 3, 17};
  const auto full = fused_propagate(p, z);
  const auto part = fused_propagate_rows(p, z, rows);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(part(k, c), full(rows[k], c));

  DenseMatrix<double> grad(rows.size(), 4), scattered(30, 4);
  for (auto& v : grad.values()) v = standard_normal(rng);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t c = 0; c < 4; ++c) scattered(rows[k], c) = grad(k, c);
  const auto dense_t = testing::dense_fused(g, 2.0);
  const auto expected = testing::dense_product(dense_t, scattered);  // symmetric
  EXPECT_LT(max_abs_diff(fused_adjoint_from_rows(p, rows, grad), expected), 1e-12);
}

TEST(FusedPropagate, PermutationEquivariance) {
  Rng rng(52);
  const auto g = random_connected_graph(18, 0.1, rng);
  std::vector<index_t> perm(18);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(std::span<index_t>(perm), rng);
  DenseMatrix<double> z(18, 2), zp(18, 2);
  for (auto& v : z.values()) v = standard_normal(rng);
  for (std::size_t i = 0; i < 18; ++i)
    for (std::size_t c = 0; c < 2; ++c) zp(perm[i], c) = z(i, c);
  const auto out = fused_propagate(make_fused_propagator(shell_decompose(g), 2.0), z);
  const auto outp = fused_propagate(
      make_fused_propagator(shell_decompose(permute(g, perm)), 2.0), zp);
  for (std::size_t i = 0; i < 18; ++i)
    for (std::size_t c = 0; c < 2; ++c)
      EXPECT_NEAR(outp(perm[i], c), out(i, c), 1e-12);
}

}  // namespace
}  // namespace shellprop
