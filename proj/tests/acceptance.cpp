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

// Acceptance suite. Prints one PASS/FAIL line per criterion.
//   acceptance core   criteria 1-8 and 11 (self-contained)
//   acceptance cora   criteria 9-10 (needs the Cora dataset directory)

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "shellprop/shellprop.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

#ifndef SHELLPROP_DEFAULT_CORA_DIR
#define SHELLPROP_DEFAULT_CORA_DIR "data/cora"
#endif

namespace sp = shellprop;
namespace st = shellprop::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body,
            double time_limit = 0.0) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = seconds_since(start);
  std::ostringstream line;
  if (time_limit > 0.0 && secs >= time_limit) {
    o.pass = false;
    o.detail += "; over time limit of " + std::to_string(time_limit) + " s";
  }
  line << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": "
       << o.detail << " [" << secs << " s]";
  std::cout << line.str() << std::endl;
  if (!o.pass) ++failures;
}

// 1. Shells are disjoint, equal the exact-distance pairs, and cover N(N-1).
Outcome shell_correctness() {
  sp::Rng rng(20260101);
  std::size_t graphs = 0, mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + sp::uniform_below(rng, 199);
    const double extra = 3.0 * sp::uniform01(rng) / static_cast<double>(n);
    const auto g = sp::random_connected_graph(n, extra, rng);
    const auto d = sp::shell_decompose(g);
    const auto fw = st::floyd_warshall(g);
    std::vector<std::uint8_t> seen(n * n, 0);
    bool ok = d.total_entries() == n * (n - 1);
    for (std::size_t l = 0; l < d.l_max() && ok; ++l)
      for (std::size_t i = 0; i < n && ok; ++i)
        for (const sp::index_t j : d.shells[l].row_indices(i)) {
          if (seen[i * n + j]++ || fw[i][j] != l + 1) ok = false;
        }
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !seen[i * n + j]) ok = false;
    ++graphs;
    if (!ok) ++mismatches;
  }
  return {mismatches == 0, std::to_string(graphs) + " graphs (n <= 200), " +
                               std::to_string(mismatches) + " mismatching"};
}

// 2. Cumulative pattern from truncated BFS equals the support of A + ... + A^l.
Outcome cumulative_equivalence() {
  sp::Rng rng(20260102);
  std::size_t checks = 0, mismatches = 0;
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + sp::uniform_below(rng, 39);
    const auto g = sp::random_connected_graph(n, 0.1 * sp::uniform01(rng), rng);
    const auto a = st::dense_adjacency(g);
    auto power = st::Dense::identity(n);
    st::Dense sum(n, n);
    for (std::uint32_t l = 1; l <= 5; ++l) {
      power = st::dense_product(power, a);
      for (std::size_t i = 0; i < n * n; ++i) sum.values()[i] += power.values()[i];
      const auto c = sp::cumulative_matrix(g, l);
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j && (c.at(i, j) != 0) != (sum(i, j) != 0.0)) ok = false;
      ++checks;
      if (!ok) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(checks) + " (graph, l) pairs, " +
                               std::to_string(mismatches) + " mismatching"};
}

// 3. Aggregation count of the fused shells is exactly N - 1.
Outcome shell_aggregation_count() {
  sp::Rng rng(20260103);
  std::vector<sp::SparseGraph> graphs = {sp::path_graph(5), sp::complete_graph(6),
                                         sp::star_graph(7), sp::path_graph(2)};
  for (int t = 0; t < 40; ++t)
    graphs.push_back(sp::random_connected_graph(2 + sp::uniform_below(rng, 150), 0.02, rng));
  for (int t = 0; t < 20; ++t) graphs.push_back(sp::random_tree(2 + sp::uniform_below(rng, 60), rng));
  std::size_t bad = 0;
  for (const auto& g : graphs) {
    const std::size_t n = g.num_nodes();
    const auto d = sp::shell_decompose(g);
    auto shell_union = sp::SparseMatrix<double>::from_entries(n, n, {});
    for (const auto& s : d.shells)
      shell_union = sp::linear_combination(1.0, shell_union, 1.0, s.cast<double>());
    const double via_matrix = sp::avg_nat(shell_union, 1);
    if (d.total_entries() != n * (n - 1) || via_matrix != static_cast<double>(n - 1)) ++bad;
  }
  return {bad == 0, std::to_string(graphs.size()) + " connected graphs, " +
                        std::to_string(bad) + " with AvgNAT != N - 1"};
}

// 4. N - 1 <= AvgNAT(A, diameter) < 2^(N-2) on sampled graphs n <= 20.
Outcome walk_bounds() {
  sp::Rng rng(20260104);
  std::vector<std::pair<std::string, sp::SparseGraph>> graphs = {
      {"K4", sp::complete_graph(4)}, {"P5", sp::path_graph(5)}};
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 4 + sp::uniform_below(rng, 17);
    graphs.emplace_back("random n=" + std::to_string(n),
                        sp::random_connected_graph(n, 0.3 * sp::uniform01(rng), rng));
  }
  for (int t = 0; t < 20; ++t) graphs.emplace_back("tree n=10", sp::random_tree(10, rng));

  std::size_t lower_fail = 0, upper_fail = 0, oracle_mismatch = 0;
  std::string examples;
  for (const auto& [name, g] : graphs) {
    const auto v = sp::walk_bound_check(g);
    const auto total = st::big_total(st::big_power(g, v.diameter));
    if (total != v.walk_total) ++oracle_mismatch;
    const st::BigInt n(g.num_nodes());
    st::BigInt pow2 = 1;
    pow2 <<= static_cast<unsigned>(g.num_nodes() - 2);
    const bool lower = total >= n * (n - 1);
    const bool upper = total < n * pow2;
    if (!lower) ++lower_fail;
    if (!upper) {
      ++upper_fail;
      if (upper_fail <= 3)
        examples += " " + name + " (diam " + std::to_string(v.diameter) + ": AvgNAT " +
                    sp::format_real(v.avg_nat) + " vs 2^" + std::to_string(g.num_nodes() - 2) + ")";
    }
  }
  std::string detail = std::to_string(graphs.size()) + " graphs; lower bound violated " +
                       std::to_string(lower_fail) + "x, upper bound violated " +
                       std::to_string(upper_fail) + "x, oracle mismatches " +
                       std::to_string(oracle_mismatch);
  if (!examples.empty()) detail += "; e.g." + examples;
  return {lower_fail == 0 && upper_fail == 0 && oracle_mismatch == 0, detail};
}

// 5. SAS of both normalizations enters |SAS - 1/N| < 1e-6 within 10 n^2 powers.
Outcome sas_limit() {
  sp::Rng rng(20260105);
  std::size_t runs = 0, missed = 0, worst_k = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + sp::uniform_below(rng, 49);
    const auto g = sp::random_connected_graph(n, 0.1 * sp::uniform01(rng), rng);
    for (const auto& p : {sp::sym_norm_propagator(g), sp::rw_norm_propagator(g)}) {
      const auto k = sp::sas_band_entry(p.matrix, 1.0 / static_cast<double>(n), 1e-6, 10 * n * n);
      ++runs;
      if (!k) ++missed;
      else worst_k = std::max(worst_k, *k);
    }
  }
  return {missed == 0, std::to_string(runs) + " (graph, propagator) runs, " +
                           std::to_string(missed) + " never within 1e-6; slowest entry k = " +
                           std::to_string(worst_k)};
}

// 6. Residual mixing strictly raises SAS at every sampled (graph, beta, k).
Outcome residual_sas() {
  sp::Rng rng(20260106);
  std::size_t triples = 0, violations = 0;
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 3 + sp::uniform_below(rng, 48);
    const auto g = sp::random_connected_graph(n, 0.1 * sp::uniform01(rng), rng);
    for (const auto& base : {sp::sym_norm_propagator(g), sp::rw_norm_propagator(g)}) {
      const auto plain = sp::sas_values(base.matrix, 10);
      for (const double beta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const auto res = sp::sas_values(sp::residual_propagator(base, beta).matrix, 10);
        for (std::size_t k = 0; k < 10; ++k) {
          ++triples;
          if (!(res[k] > plain[k])) ++violations;
        }
      }
    }
  }
  return {violations == 0, std::to_string(triples) + " (graph, propagator, beta, k) samples, " +
                               std::to_string(violations) + " violations"};
}

// 7. Analytic gradients agree with central differences.
Outcome gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    worst = std::max(worst, st::max_gradient_relative_error(st::make_grad_instance(1000 + seed)));
  return {worst < 1e-4, "20 instances, max relative error " + sp::format_real(worst)};
}

struct Planted {
  sp::Dataset ds;
  sp::Split split;
};

Planted planted_instance() {
  auto pp = sp::synth_planted_partition(10, 2, 0.8, 0.05, 7);
  Planted p{std::move(pp.dataset), {}};
  p.split = sp::make_split(p.ds.labels, 2, 4, 0, 12, 7);
  return p;
}

// 8. Planted partition is learned to >= 0.9 test accuracy within 200 epochs.
Outcome synthetic_learning() {
  const auto p = planted_instance();
  sp::TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 1;
  const auto exp = sp::run_experiment<double>(p.ds, p.split, cfg);
  const double acc = exp.test->accuracy;
  return {acc >= 0.9, "test accuracy " + sp::format_real(acc) + " after " +
                          std::to_string(exp.trained.history.epochs.size()) + " epochs"};
}

std::string metrics_bytes(const Planted& p, std::uint64_t seed) {
  sp::TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = seed;
  const auto exp = sp::run_experiment<double>(p.ds, p.split, cfg);
  return sp::train_metrics_json(exp.test, exp.val, exp.trained.history, exp.l_max).dump(2) +
         sp::history_csv(exp.trained.history);
}

// 11. Identical seeds give byte-identical metrics.
Outcome determinism() {
  const auto p = planted_instance();
  const auto a = metrics_bytes(p, 11), b = metrics_bytes(p, 11);
  return {a == b, a == b ? "two runs identical (digest " + sp::fnv1a_hex(a) + ")"
                         : "runs differ: " + sp::fnv1a_hex(a) + " vs " + sp::fnv1a_hex(b)};
}

std::filesystem::path cora_dir() {
  if (const char* env = std::getenv("SHELLPROP_CORA_DIR"); env && *env) return env;
  return SHELLPROP_DEFAULT_CORA_DIR;
}

sp::Split cora_split(const sp::Dataset& ds) {
  return ds.split ? *ds.split : sp::make_split(ds.labels, ds.num_classes, 20, 500, 1000, 0);
}

int run_cora() {
  const auto dir = cora_dir();
  if (!std::filesystem::is_directory(dir)) {
    const std::string why = "Cora dataset not found at " + dir.string() +
                            " (set SHELLPROP_CORA_DIR; see README for the conversion recipe)";
    report(9, "cora accuracy", [&] { return Outcome{false, why}; });
    report(10, "cora layer sweep", [&] { return Outcome{false, why}; });
    return 1;
  }
  const auto ds = sp::load_dataset(dir);
  const auto split = cora_split(ds);
  const auto full = sp::shell_decompose(ds.graph);
  const auto diam = sp::diameter(ds.graph);
  auto accuracy = [&](double alpha, std::uint64_t seed, std::optional<std::uint32_t> layers,
                      double& seconds) {
    sp::TrainConfig cfg;
    cfg.alpha = alpha;
    cfg.seed = seed;
    cfg.l_cap = layers;
    const auto start = Clock::now();
    const auto exp = sp::run_experiment<double>(ds, split, cfg, &full);
    seconds = seconds_since(start);
    return exp.test->accuracy;
  };

  report(9, "cora accuracy", [&] {
    std::ostringstream detail;
    bool ok = true;
    double slowest = 0.0;
    for (const double alpha : {2.0, 5.0}) {
      double sum = 0.0;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        double secs = 0.0;
        sum += accuracy(alpha, seed, std::nullopt, secs);
        slowest = std::max(slowest, secs);
      }
      const double mean = sum / 5.0;
      ok = ok && mean >= 0.80 && mean <= 0.86;
      detail << "alpha " << alpha << " mean test accuracy " << sp::format_real(mean) << "; ";
    }
    ok = ok && slowest < 300.0;
    detail << "slowest run " << slowest << " s (limit 300)";
    return Outcome{ok, detail.str()};
  });

  report(10, "cora layer sweep", [&] {
    double at2 = 0.0, at_diam = 0.0, secs = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      at2 += accuracy(2.0, seed, 2u, secs) / 5.0;
      at_diam += accuracy(2.0, seed, diam, secs) / 5.0;
    }
    return Outcome{at_diam >= at2 - 0.02,
                   "mean accuracy L=2 " + sp::format_real(at2) + ", L=diameter(" +
                       std::to_string(diam) + ") " + sp::format_real(at_diam)};
  });
  return failures == 0 ? 0 : 1;
}

int run_core() {
  report(1, "shell correctness", shell_correctness, 30.0);
  report(2, "cumulative pattern equivalence", cumulative_equivalence, 10.0);
  report(3, "shell aggregation count", shell_aggregation_count);
  report(4, "walk-count bounds", walk_bounds);
  report(5, "SAS limit", sas_limit, 60.0);
  report(6, "residual SAS", residual_sas);
  report(7, "gradient integrity", gradients);
  report(8, "synthetic learnability", synthetic_learning, 5.0);
  report(11, "determinism", determinism);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "core";
  if (mode == "core") return run_core();
  if (mode == "cora") return run_cora();
  std::cerr << "usage: acceptance [core|cora]\n";
  return 2;
}
