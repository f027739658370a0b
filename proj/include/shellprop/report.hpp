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

// Machine-readable outputs: JSON reports and CSV trajectories.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "shellprop/metrics.hpp"
#include "shellprop/model.hpp"
#include "shellprop/shells.hpp"

namespace shellprop {

inline nlohmann::ordered_json shell_report_json(const ShellDecomposition& d,
                                                std::uint32_t graph_diameter) {
  nlohmann::ordered_json j;
  j["n"] = d.n;
  j["l_max"] = d.l_max();
  j["shell_sizes"] = d.shell_sizes();
  j["avg_degree_per_layer"] = shell_degree_profile(d);
  j["diameter"] = graph_diameter;
  return j;
}

inline nlohmann::ordered_json metric_report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["propagator"] = std::string(to_string(r.kind));
  j["n"] = r.n;
  j["avg_nat"] = r.avg_nat;
  auto traj = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.sas.size(); ++k) traj.push_back({k + 1, r.sas[k]});
  j["sas_trajectory"] = std::move(traj);
  j["limit_gap"] = r.limit_gap;
  return j;
}

inline nlohmann::ordered_json train_metrics_json(const std::optional<Scores>& test,
                                                 const Scores& val,
                                                 const TrainHistory& history,
                                                 std::size_t l_max) {
  nlohmann::ordered_json j;
  j["test_acc"] = test ? nlohmann::ordered_json(test->accuracy) : nullptr;
  j["macro_f1"] = test ? nlohmann::ordered_json(test->macro_f1) : nullptr;
  j["val_acc"] = val.accuracy;
  j["best_epoch"] = history.best_epoch;
  j["epochs_run"] = history.epochs.size();
  j["l_max"] = l_max;
  return j;
}

inline std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string history_csv(const TrainHistory& h) {
  std::string out = "epoch,train_loss,val_acc\n";
  for (const auto& e : h.epochs)
    out += std::to_string(e.epoch) + "," + format_real(e.train_loss) + "," +
           format_real(e.val_accuracy) + "\n";
  return out;
}

inline std::string sas_csv(const MetricReport& r) {
  std::string out = "k,sas\n";
  for (std::size_t k = 0; k < r.sas.size(); ++k)
    out += std::to_string(k + 1) + "," + format_real(r.sas[k]) + "\n";
  return out;
}

/// FNV-1a 64-bit, hex encoded.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace shellprop
