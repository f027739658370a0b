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

#include <cstddef>
#include <cstdint>
#include <optional>

#include "shellprop/dataset.hpp"
#include "shellprop/error.hpp"
#include "shellprop/model.hpp"
#include "shellprop/shells.hpp"

namespace shellprop {

/// First `layers` shells of a decomposition (all of them when it has fewer).
inline ShellDecomposition truncate_shells(const ShellDecomposition& d,
                                          std::size_t layers) {
  ShellDecomposition out;
  out.n = d.n;
  const std::size_t keep = std::min(layers, d.l_max());
  out.shells.assign(d.shells.begin(),
                    d.shells.begin() + static_cast<std::ptrdiff_t>(keep));
  return out;
}

template <class T>
struct Experiment {
  TrainResult<T> trained;
  std::size_t l_max = 0;
  Scores val;
  std::optional<Scores> test;
};

/// Decomposes the graph (or truncates `full_depth` when given), trains, and
/// scores the selected parameters.
template <class T>
Experiment<T> run_experiment(const Dataset& ds, const Split& split,
                             const TrainConfig& config,
                             const ShellDecomposition* full_depth = nullptr) {
  config.validate();
  split.validate(ds.num_nodes());
  const ShellDecomposition shells =
      full_depth ? truncate_shells(*full_depth,
                                   config.l_cap ? *config.l_cap : full_depth->l_max())
                 : shell_decompose(ds.graph, config.l_cap);
  const auto propagator = make_fused_propagator<T>(shells, config.alpha);
  const auto x = ds.features.cast<T>();

  Experiment<T> out;
  out.l_max = shells.l_max();
  out.trained = train(x, ds.labels, ds.num_classes, propagator, split.train,
                      split.val, config);
  const auto& params = out.trained.params;
  out.val = split.val.empty()
                ? evaluate(params, x, propagator, ds.labels, split.train)
                : evaluate(params, x, propagator, ds.labels, split.val);
  if (!split.test.empty())
    out.test = evaluate(params, x, propagator, ds.labels, split.test);
  return out;
}

}  // namespace shellprop
