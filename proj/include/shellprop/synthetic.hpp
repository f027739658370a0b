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

// Seeded graph and dataset generators for tests and demos.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "shellprop/dataset.hpp"
#include "shellprop/error.hpp"
#include "shellprop/graph.hpp"
#include "shellprop/rng.hpp"

namespace shellprop {

inline SparseGraph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.emplace_back(static_cast<index_t>(i), static_cast<index_t>(i + 1));
  return build_graph(edges, n);
}

inline SparseGraph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      edges.emplace_back(static_cast<index_t>(i), static_cast<index_t>(j));
  return build_graph(edges, n);
}

// Node 0 is the center.
inline SparseGraph star_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i)
    edges.emplace_back(0, static_cast<index_t>(i));
  return build_graph(edges, n);
}

/// Uniform random recursive tree: node i attaches to a uniform earlier node.
inline SparseGraph random_tree(std::size_t n, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i)
    edges.emplace_back(static_cast<index_t>(uniform_below(rng, i)),
                       static_cast<index_t>(i));
  return build_graph(edges, n);
}

/// Random tree plus every other pair independently with probability
/// `extra_p`; always connected.
inline SparseGraph random_connected_graph(std::size_t n, double extra_p, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i)
    edges.emplace_back(static_cast<index_t>(uniform_below(rng, i)),
                       static_cast<index_t>(i));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < extra_p)
        edges.emplace_back(static_cast<index_t>(i), static_cast<index_t>(j));
  return build_graph(edges, n);
}

struct PlantedPartition {
  Dataset dataset;
  bool connected = false;
  std::size_t components = 0;
};

/// Block-structured random graph. Labels are block ids; features are the
/// one-hot block indicator plus Gaussian noise of standard deviation
/// `feature_noise`. No split is attached.
inline PlantedPartition synth_planted_partition(std::size_t n_per_block,
                                                std::size_t blocks, double p_in,
                                                double p_out, std::uint64_t seed,
                                                double feature_noise = 1.0) {
  require(n_per_block >= 1 && blocks >= 1, ErrorKind::Config,
          "planted partition: need at least one block of one node");
  require(0.0 <= p_out && p_out < p_in && p_in <= 1.0, ErrorKind::Config,
          "planted partition: need 0 <= p_out < p_in <= 1");
  require(feature_noise >= 0.0, ErrorKind::Config,
          "planted partition: feature noise must be non-negative");
  Rng rng(seed);
  const std::size_t n = n_per_block * blocks;
  PlantedPartition out;
  auto& ds = out.dataset;
  ds.num_classes = blocks;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    ds.labels[i] = static_cast<std::int32_t>(i / n_per_block);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = ds.labels[i] == ds.labels[j] ? p_in : p_out;
      if (uniform01(rng) < p)
        edges.emplace_back(static_cast<index_t>(i), static_cast<index_t>(j));
    }
  ds.graph = build_graph(edges, n);
  ds.features = DenseMatrix<double>(n, blocks);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < blocks; ++c)
      ds.features(i, c) = (static_cast<std::size_t>(ds.labels[i]) == c ? 1.0 : 0.0) +
                          feature_noise * standard_normal(rng);
  out.components = count_components(ds.graph);
  out.connected = out.components == 1;
  return out;
}

}  // namespace shellprop
