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

// Two-stage classifier around the fused shell propagator:
//   Z = relu(dropout(X) W1 + b1)
//   S = That Z
//   logits = dropout(S) W2 + b2,  Yhat = softmax(logits)
// trained with summed cross-entropy over the labeled nodes, coupled L2 on the
// weight matrices, and Adam.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shellprop/dense_matrix.hpp"
#include "shellprop/error.hpp"
#include "shellprop/parallel.hpp"
#include "shellprop/rng.hpp"
#include "shellprop/shells.hpp"
#include "shellprop/sparse_matrix.hpp"

namespace shellprop {

template <class T>
struct ModelParams {
  DenseMatrix<T> w1;  // d x h
  std::vector<T> b1;  // h
  DenseMatrix<T> w2;  // h x C
  std::vector<T> b2;  // C

  static ModelParams zeros(std::size_t d, std::size_t h, std::size_t c) {
    return {DenseMatrix<T>(d, h), std::vector<T>(h), DenseMatrix<T>(h, c),
            std::vector<T>(c)};
  }

  std::size_t input_dim() const noexcept { return w1.rows(); }
  std::size_t hidden() const noexcept { return w1.cols(); }
  std::size_t num_classes() const noexcept { return w2.cols(); }

  std::array<std::span<T>, 4> tensors() {
    return {w1.values(), std::span<T>(b1), w2.values(), std::span<T>(b2)};
  }
  std::array<std::span<const T>, 4> tensors() const {
    return {w1.values(), std::span<const T>(b1), w2.values(),
            std::span<const T>(b2)};
  }

  void check_shapes() const {
    require(b1.size() == w1.cols() && w2.rows() == w1.cols() &&
                b2.size() == w2.cols(),
            ErrorKind::Input, "model parameters have inconsistent shapes");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Glorot-uniform weights, zero biases.
template <class T>
ModelParams<T> init_params(std::size_t d, std::size_t h, std::size_t c, Rng& rng) {
  auto params = ModelParams<T>::zeros(d, h, c);
  auto fill = [&](DenseMatrix<T>& w) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (auto& v : w.values())
      v = static_cast<T>((2.0 * uniform01(rng) - 1.0) * limit);
  };
  fill(params.w1);
  fill(params.w2);
  return params;
}

struct TrainConfig {
  double alpha = 2.0;
  std::optional<std::uint32_t> l_cap;
  std::size_t hidden = 64;
  double dropout = 0.5;
  double lr = 1e-2;
  double weight_decay = 5e-3;
  std::size_t epochs = 500;
  std::size_t patience = 100;
  std::uint64_t seed = 0;

  void validate() const {
    require(std::isfinite(alpha) && alpha > 1.0, ErrorKind::Config,
            "alpha must be > 1 (alpha = 1 zeroes every shell weight "
            "(1 - 1/alpha)^l)");
    require(!l_cap || *l_cap >= 1, ErrorKind::Config, "lcap must be >= 1");
    require(hidden >= 1, ErrorKind::Config, "hidden width must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorKind::Config,
            "dropout must lie in [0, 1)");
    require(lr > 0.0 && std::isfinite(lr), ErrorKind::Config,
            "learning rate must be positive");
    require(weight_decay >= 0.0 && std::isfinite(weight_decay),
            ErrorKind::Config, "weight decay must be non-negative");
    require(epochs >= 1, ErrorKind::Config, "epochs must be >= 1");
    require(patience >= 1, ErrorKind::Config, "patience must be >= 1");
  }
};

struct Dropout {
  double rate = 0.0;
  bool active = false;  // false in evaluation mode
};

/// Intermediate values of one forward pass, restricted to a set of output
/// rows. The hidden layer is always computed for every node because the
/// propagator mixes all of them.
template <class T>
struct ForwardPass {
  std::vector<index_t> rows;
  Dropout dropout;
  std::vector<std::uint8_t> input_keep;  // n x d, empty when inactive
  DenseMatrix<T> pre_activation;         // n x h
  DenseMatrix<T> hidden;                 // n x h
  DenseMatrix<T> propagated;             // |rows| x h, before dropout
  std::vector<std::uint8_t> propagated_keep;  // |rows| x h
  DenseMatrix<T> logits;                 // |rows| x C
  DenseMatrix<T> probabilities;          // |rows| x C
};

namespace detail {

template <class T>
void softmax_rows(const DenseMatrix<T>& logits, DenseMatrix<T>& probs) {
  probs = DenseMatrix<T>(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    auto out = probs.row(r);
    const T peak = *std::max_element(in.begin(), in.end());
    T total{};
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - peak);
      total += out[c];
    }
    for (auto& v : out) v /= total;
  }
}

template <class T>
void require_finite(const DenseMatrix<T>& m, const char* what) {
  require(m.all_finite(), ErrorKind::Numeric,
          std::string("non-finite value in ") + what);
}

inline std::vector<std::uint8_t> draw_keep_mask(std::size_t count, double rate,
                                                Rng& rng) {
  std::vector<std::uint8_t> keep(count);
  for (auto& k : keep) k = uniform01(rng) >= rate ? 1 : 0;
  return keep;
}

}  // namespace detail

template <class T>
ForwardPass<T> forward_rows(const ModelParams<T>& params, const DenseMatrix<T>& x,
                            const FusedPropagator<T>& p,
                            std::span<const index_t> rows, Dropout dropout,
                            Rng& rng) {
  params.check_shapes();
  require(x.cols() == params.input_dim(), ErrorKind::Input,
          "forward: feature width " + std::to_string(x.cols()) +
              " does not match model input " +
              std::to_string(params.input_dim()));
  require(x.rows() == p.n, ErrorKind::Input,
          "forward: feature rows do not match propagator size");
  const bool drop = dropout.active && dropout.rate > 0.0;
  const T scale = drop ? static_cast<T>(1.0 / (1.0 - dropout.rate)) : T{1};
  const std::size_t n = x.rows(), d = x.cols(), h = params.hidden();

  ForwardPass<T> pass;
  pass.rows.assign(rows.begin(), rows.end());
  pass.dropout = dropout;
  if (drop) {
    // Only non-zero inputs consume a draw; zero entries stay zero either way.
    pass.input_keep.assign(n * d, 0);
    for (std::size_t i = 0; i < n * d; ++i)
      if (x.values()[i] != T{}) pass.input_keep[i] = uniform01(rng) >= dropout.rate;
  }

  pass.pre_activation = DenseMatrix<T>(n, h);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto out = pass.pre_activation.row(i);
      std::copy(params.b1.begin(), params.b1.end(), out.begin());
      const auto xi = x.row(i);
      for (std::size_t k = 0; k < d; ++k) {
        if (xi[k] == T{}) continue;
        if (drop && !pass.input_keep[i * d + k]) continue;
        const T v = xi[k] * scale;
        const auto w = params.w1.row(k);
        for (std::size_t j = 0; j < h; ++j) out[j] += v * w[j];
      }
    }
  });
  pass.hidden = pass.pre_activation;
  for (auto& v : pass.hidden.values()) v = std::max(v, T{});
  detail::require_finite(pass.hidden, "hidden layer");

  pass.propagated = fused_propagate_rows(p, pass.hidden, rows);
  if (drop)
    pass.propagated_keep =
        detail::draw_keep_mask(pass.propagated.size(), dropout.rate, rng);

  const std::size_t c = params.num_classes();
  pass.logits = DenseMatrix<T>(rows.size(), c);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto out = pass.logits.row(r);
    std::copy(params.b2.begin(), params.b2.end(), out.begin());
    const auto s = pass.propagated.row(r);
    for (std::size_t k = 0; k < h; ++k) {
      if (drop && !pass.propagated_keep[r * h + k]) continue;
      const T v = s[k] * scale;
      const auto w = params.w2.row(k);
      for (std::size_t j = 0; j < c; ++j) out[j] += v * w[j];
    }
  }
  detail::require_finite(pass.logits, "logits");
  detail::softmax_rows(pass.logits, pass.probabilities);
  return pass;
}

template <class T>
struct ForwardOutput {
  DenseMatrix<T> logits;         // n x C
  DenseMatrix<T> probabilities;  // n x C
};

/// Full forward pass over every node.
template <class T>
ForwardOutput<T> forward(const ModelParams<T>& params, const DenseMatrix<T>& x,
                         const FusedPropagator<T>& p, Dropout dropout, Rng& rng) {
  std::vector<index_t> all(x.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<index_t>(i);
  auto pass = forward_rows(params, x, p, all, dropout, rng);
  return {std::move(pass.logits), std::move(pass.probabilities)};
}

inline constexpr double kProbabilityFloor = 1e-12;

/// -sum_{i in mask} ln Yhat[i, y_i], summed rather than averaged.
/// `probabilities` is indexed by node id.
template <class T>
double cross_entropy(const DenseMatrix<T>& probabilities,
                     std::span<const std::int32_t> labels,
                     std::span<const index_t> mask) {
  require(!mask.empty(), ErrorKind::Input, "loss: mask is empty");
  double total = 0.0;
  for (const index_t i : mask) {
    require(i < probabilities.rows() && i < labels.size(), ErrorKind::Input,
            "loss: mask index out of range");
    const auto y = static_cast<std::size_t>(labels[i]);
    require(y < probabilities.cols(), ErrorKind::Input,
            "loss: label out of range");
    total -= std::log(std::max(static_cast<double>(probabilities(i, y)),
                               kProbabilityFloor));
  }
  return total;
}

template <class T>
struct BackwardResult {
  ModelParams<T> gradients;
  double loss = 0.0;  // cross-entropy only, without the L2 term
};

/// Gradients of cross-entropy over pass.rows plus (weight_decay / 2) *
/// (|W1|^2 + |W2|^2), reusing the dropout masks recorded in `pass`.
template <class T>
BackwardResult<T> backward_from_pass(const ModelParams<T>& params,
                                     const DenseMatrix<T>& x,
                                     const FusedPropagator<T>& p,
                                     const ForwardPass<T>& pass,
                                     std::span<const std::int32_t> labels,
                                     double weight_decay) {
  const std::size_t n = x.rows(), d = x.cols(), h = params.hidden(),
                    c = params.num_classes();
  const std::size_t m = pass.rows.size();
  const bool drop = pass.dropout.active && pass.dropout.rate > 0.0;
  const T scale = drop ? static_cast<T>(1.0 / (1.0 - pass.dropout.rate)) : T{1};

  BackwardResult<T> out{ModelParams<T>::zeros(d, h, c), 0.0};
  auto& g = out.gradients;

  DenseMatrix<T> dlogits = pass.probabilities;
  for (std::size_t r = 0; r < m; ++r) {
    const auto y = static_cast<std::size_t>(labels[pass.rows[r]]);
    require(y < c, ErrorKind::Input, "backward: label out of range");
    out.loss -= std::log(std::max(static_cast<double>(pass.probabilities(r, y)),
                                  kProbabilityFloor));
    dlogits(r, y) -= T{1};
  }

  // Second affine stage.
  DenseMatrix<T> dprop(m, h);
  for (std::size_t r = 0; r < m; ++r) {
    const auto dl = dlogits.row(r);
    for (std::size_t j = 0; j < c; ++j) g.b2[j] += dl[j];
    const auto s = pass.propagated.row(r);
    auto ds = dprop.row(r);
    for (std::size_t k = 0; k < h; ++k) {
      if (drop && !pass.propagated_keep[r * h + k]) continue;
      const auto w = params.w2.row(k);
      auto gw = g.w2.row(k);
      const T sk = s[k] * scale;
      T acc{};
      for (std::size_t j = 0; j < c; ++j) {
        gw[j] += sk * dl[j];
        acc += dl[j] * w[j];
      }
      ds[k] = acc * scale;
    }
  }

  // Through the propagator and the ReLU.
  DenseMatrix<T> dhidden = fused_adjoint_from_rows(p, pass.rows, dprop);
  for (std::size_t i = 0; i < dhidden.size(); ++i)
    if (!(pass.pre_activation.values()[i] > T{})) dhidden.values()[i] = T{};

  // First affine stage.
  for (std::size_t i = 0; i < n; ++i) {
    const auto da = dhidden.row(i);
    for (std::size_t j = 0; j < h; ++j) g.b1[j] += da[j];
    const auto xi = x.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      if (xi[k] == T{}) continue;
      if (drop && !pass.input_keep[i * d + k]) continue;
      const T v = xi[k] * scale;
      auto gw = g.w1.row(k);
      for (std::size_t j = 0; j < h; ++j) gw[j] += v * da[j];
    }
  }

  if (weight_decay != 0.0) {
    const T wd = static_cast<T>(weight_decay);
    for (std::size_t i = 0; i < g.w1.size(); ++i)
      g.w1.values()[i] += wd * params.w1.values()[i];
    for (std::size_t i = 0; i < g.w2.size(); ++i)
      g.w2.values()[i] += wd * params.w2.values()[i];
  }
  return out;
}

/// Forward over the labeled rows followed by the analytic backward pass.
template <class T>
BackwardResult<T> backward(const ModelParams<T>& params, const DenseMatrix<T>& x,
                           const FusedPropagator<T>& p,
                           std::span<const std::int32_t> labels,
                           std::span<const index_t> mask, Dropout dropout,
                           double weight_decay, Rng& rng) {
  require(!mask.empty(), ErrorKind::Input, "backward: mask is empty");
  require(labels.size() == x.rows(), ErrorKind::Input,
          "backward: label count does not match node count");
  const auto pass = forward_rows(params, x, p, mask, dropout, rng);
  return backward_from_pass(params, x, p, pass, labels, weight_decay);
}

template <class T>
struct AdamState {
  ModelParams<T> m;
  ModelParams<T> v;
  std::uint64_t step = 0;

  static AdamState like(const ModelParams<T>& params) {
    const auto z = ModelParams<T>::zeros(params.input_dim(), params.hidden(),
                                         params.num_classes());
    return {z, z, 0};
  }
};

struct AdamHyper {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update.
template <class T>
void adam_step(AdamState<T>& state, ModelParams<T>& params,
               const ModelParams<T>& grads, const AdamHyper& hp) {
  ++state.step;
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  auto p = params.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  const auto g = grads.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      const double gi = static_cast<double>(g[t][i]);
      const double mi = hp.beta1 * static_cast<double>(m[t][i]) + (1.0 - hp.beta1) * gi;
      const double vi =
          hp.beta2 * static_cast<double>(v[t][i]) + (1.0 - hp.beta2) * gi * gi;
      m[t][i] = static_cast<T>(mi);
      v[t][i] = static_cast<T>(vi);
      const double mhat = mi / c1;
      const double vhat = vi / c2;
      p[t][i] -= static_cast<T>(hp.lr * mhat / (std::sqrt(vhat) + hp.eps));
    }
  }
}

/// Argmax per row; ties go to the lowest class index.
template <class T>
std::vector<std::int32_t> argmax_rows(const DenseMatrix<T>& scores) {
  std::vector<std::int32_t> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    const auto row = scores.row(r);
    out[r] = static_cast<std::int32_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

struct Scores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

/// Accuracy and macro-F1 over `num_classes` classes; a class with no true
/// positives, false positives or false negatives scores F1 = 0.
inline Scores classification_scores(std::span<const std::int32_t> predicted,
                                    std::span<const std::int32_t> truth,
                                    std::size_t num_classes) {
  require(!truth.empty(), ErrorKind::Input, "evaluate: mask is empty");
  require(predicted.size() == truth.size(), ErrorKind::Input,
          "evaluate: prediction and label counts differ");
  std::vector<std::size_t> tp(num_classes), fp(num_classes), fn(num_classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto p = static_cast<std::size_t>(predicted[i]);
    const auto t = static_cast<std::size_t>(truth[i]);
    require(p < num_classes && t < num_classes, ErrorKind::Input,
            "evaluate: class id out of range");
    if (p == t) {
      ++correct;
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom > 0) f1_sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  return {static_cast<double>(correct) / static_cast<double>(truth.size()),
          f1_sum / static_cast<double>(num_classes)};
}

/// Evaluation-mode predictions for `mask`, scored against labels.
template <class T>
Scores evaluate(const ModelParams<T>& params, const DenseMatrix<T>& x,
                const FusedPropagator<T>& p, std::span<const std::int32_t> labels,
                std::span<const index_t> mask) {
  require(!mask.empty(), ErrorKind::Input, "evaluate: mask is empty");
  Rng unused(0);
  const auto pass = forward_rows(params, x, p, mask, Dropout{}, unused);
  const auto predicted = argmax_rows(pass.probabilities);
  std::vector<std::int32_t> truth;
  truth.reserve(mask.size());
  for (const index_t i : mask) truth.push_back(labels[i]);
  return classification_scores(predicted, truth, params.num_classes());
}

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double wall_time_seconds = 0.0;
};

template <class T>
struct TrainResult {
  ModelParams<T> params;
  TrainHistory history;
};

/// Full-graph training with Adam and early stopping on validation accuracy.
/// The parameters from the first epoch reaching the best validation accuracy
/// are returned. When `val` is empty, training accuracy drives selection.
template <class T>
TrainResult<T> train(const DenseMatrix<T>& x, std::span<const std::int32_t> labels,
                     std::size_t num_classes, const FusedPropagator<T>& p,
                     std::span<const index_t> train_rows,
                     std::span<const index_t> val_rows, const TrainConfig& config) {
  config.validate();
  require(!train_rows.empty(), ErrorKind::Input, "train: training set is empty");
  require(labels.size() == x.rows(), ErrorKind::Input,
          "train: label count does not match feature rows");
  const auto started = std::chrono::steady_clock::now();

  Rng rng(config.seed);
  TrainResult<T> result{init_params<T>(x.cols(), config.hidden, num_classes, rng),
                        {}};
  auto state = AdamState<T>::like(result.params);
  const AdamHyper hp{config.lr, 0.9, 0.999, 1e-8};
  const auto selection_rows = val_rows.empty() ? train_rows : val_rows;

  ModelParams<T> params = result.params;
  double best_accuracy = -1.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    BackwardResult<T> step;
    double val_acc = 0.0;
    try {
      step = backward(params, x, p, labels, train_rows,
                      Dropout{config.dropout, true}, config.weight_decay, rng);
      require(std::isfinite(step.loss), ErrorKind::Numeric, "non-finite loss");
      adam_step(state, params, step.gradients, hp);
      val_acc = evaluate(params, x, p, labels, selection_rows).accuracy;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numeric) throw;
      fail(ErrorKind::Numeric, "training diverged at epoch " +
                                   std::to_string(epoch) + ": " + e.what());
    }
    result.history.epochs.push_back({epoch, step.loss, val_acc});
    if (val_acc > best_accuracy) {
      best_accuracy = val_acc;
      result.history.best_epoch = epoch;
      result.params = params;
    } else if (epoch - result.history.best_epoch >= config.patience) {
      break;
    }
  }
  result.history.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

}  // namespace shellprop
