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

// Dataset directory layout (UTF-8, '\t' separators, '\n' line endings):
//   edges.tsv     u<TAB>v per line; '#' comment lines allowed
//   features.tsv  N rows of d reals
//   labels.tsv    N class ids, one per line
//   split.json    optional {"train": [...], "val": [...], "test": [...]}
// Row i of every file describes node i.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shellprop/dense_matrix.hpp"
#include "shellprop/error.hpp"
#include "shellprop/graph.hpp"
#include "shellprop/rng.hpp"

namespace shellprop {

struct Split {
  std::vector<index_t> train;
  std::vector<index_t> val;
  std::vector<index_t> test;
  bool shrunk = false;  // val/test were scaled down to fit the node count

  void validate(std::size_t n) const {
    require(!train.empty(), ErrorKind::Input, "split: training set is empty");
    std::vector<std::uint8_t> owner(n, 0);
    const auto mark = [&](const std::vector<index_t>& ids, std::uint8_t tag,
                          const char* name) {
      for (const index_t i : ids) {
        require(i < n, ErrorKind::Input,
                std::string("split: ") + name + " id " + std::to_string(i) +
                    " outside [0," + std::to_string(n) + ")");
        require(owner[i] == 0, ErrorKind::Input,
                std::string("split: node ") + std::to_string(i) +
                    " appears more than once (in " + name + ")");
        owner[i] = tag;
      }
    };
    mark(train, 1, "train");
    mark(val, 2, "val");
    mark(test, 3, "test");
  }

  friend bool operator==(const Split&, const Split&) = default;
};

struct Dataset {
  SparseGraph graph;
  DenseMatrix<double> features;  // N x d
  std::vector<std::int32_t> labels;
  std::size_t num_classes = 0;
  std::optional<Split> split;

  std::size_t num_nodes() const noexcept { return labels.size(); }

  void validate() const {
    const std::size_t n = labels.size();
    require(n > 0, ErrorKind::Input, "dataset: no nodes");
    require(graph.num_nodes() == n && features.rows() == n, ErrorKind::Input,
            "dataset: graph, feature and label node counts differ");
    require(features.all_finite(), ErrorKind::Input,
            "dataset: features contain non-finite values");
    for (const auto y : labels)
      require(y >= 0 && static_cast<std::size_t>(y) < num_classes,
              ErrorKind::Input, "dataset: label out of range");
    if (split) split->validate(n);
  }
};

namespace detail {

inline std::string where(const std::filesystem::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Input,
          "cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

template <class Num>
Num parse_number(std::string_view tok, const std::filesystem::path& file,
                 std::size_t line) {
  Num v{};
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  require(!tok.empty() && ec == std::errc{} && ptr == end, ErrorKind::Input,
          where(file, line) + ": cannot parse '" + std::string(tok) + "'");
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::vector<index_t> read_id_array(const nlohmann::json& doc,
                                          const char* key,
                                          const std::filesystem::path& file) {
  std::vector<index_t> ids;
  if (!doc.contains(key)) return ids;
  const auto& arr = doc.at(key);
  require(arr.is_array(), ErrorKind::Input,
          file.string() + ": '" + key + "' must be an array");
  for (const auto& v : arr) {
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0),
            ErrorKind::Input,
            file.string() + ": '" + key + "' holds a non-integer or negative id");
    ids.push_back(v.get<index_t>());
  }
  return ids;
}

}  // namespace detail

inline Dataset load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), ErrorKind::Input,
          "dataset directory not found: " + dir.string());
  for (const char* name : {"edges.tsv", "features.tsv", "labels.tsv"})
    require(fs::is_regular_file(dir / name), ErrorKind::Input,
            "missing dataset file: " + (dir / name).string());

  Dataset ds;

  const auto labels_path = dir / "labels.tsv";
  const auto label_lines = detail::read_lines(labels_path);
  for (std::size_t i = 0; i < label_lines.size(); ++i) {
    const auto y =
        detail::parse_number<std::int64_t>(label_lines[i], labels_path, i + 1);
    require(y >= 0 && y < INT32_MAX, ErrorKind::Input,
            detail::where(labels_path, i + 1) + ": label " + std::to_string(y) +
                " out of range");
    ds.labels.push_back(static_cast<std::int32_t>(y));
  }
  const std::size_t n = ds.labels.size();
  require(n > 0, ErrorKind::Input, labels_path.string() + ": no labels");
  ds.num_classes =
      static_cast<std::size_t>(*std::max_element(ds.labels.begin(), ds.labels.end())) + 1;

  const auto features_path = dir / "features.tsv";
  const auto feature_lines = detail::read_lines(features_path);
  require(feature_lines.size() == n, ErrorKind::Input,
          features_path.string() + ": " + std::to_string(feature_lines.size()) +
              " rows but labels.tsv has " + std::to_string(n) + " nodes");
  std::size_t width = 0;
  std::vector<double> values;
  for (std::size_t i = 0; i < n; ++i) {
    std::string_view line = feature_lines[i];
    std::size_t count = 0;
    while (true) {
      const auto tab = line.find('\t');
      values.push_back(detail::parse_number<double>(line.substr(0, tab),
                                                    features_path, i + 1));
      ++count;
      if (tab == std::string_view::npos) break;
      line.remove_prefix(tab + 1);
    }
    if (i == 0) width = count;
    require(count == width, ErrorKind::Input,
            detail::where(features_path, i + 1) + ": ragged row with " +
                std::to_string(count) + " values, expected " +
                std::to_string(width));
  }
  ds.features = DenseMatrix<double>(n, width);
  std::copy(values.begin(), values.end(), ds.features.values().begin());

  const auto edges_path = dir / "edges.tsv";
  const auto edges = read_edge_list(edges_path.string());
  require(edges.implied_nodes <= n, ErrorKind::Input,
          edges_path.string() + ": node id " +
              std::to_string(edges.implied_nodes - 1) +
              " exceeds the node count " + std::to_string(n) +
              " given by labels.tsv");
  ds.graph = build_graph(edges.edges, n);

  const auto split_path = dir / "split.json";
  if (fs::exists(split_path)) {
    std::ifstream in(split_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Input, split_path.string() + ": " + e.what());
    }
    require(doc.is_object(), ErrorKind::Input,
            split_path.string() + ": expected a JSON object");
    Split split;
    split.train = detail::read_id_array(doc, "train", split_path);
    split.val = detail::read_id_array(doc, "val", split_path);
    split.test = detail::read_id_array(doc, "test", split_path);
    try {
      split.validate(n);
    } catch (const Error& e) {
      fail(ErrorKind::Input, split_path.string() + ": " + e.what());
    }
    ds.split = std::move(split);
  }
  ds.validate();
  return ds;
}

inline nlohmann::json split_to_json(const Split& s) {
  return {{"train", s.train}, {"val", s.val}, {"test", s.test}};
}

/// Writes the directory layout read by load_dataset. Values round-trip
/// exactly (shortest round-trip formatting).
inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv", std::ios::binary);
    write_edge_list(out, ds.graph);
  }
  {
    std::ofstream out(dir / "features.tsv", std::ios::binary);
    for (std::size_t i = 0; i < ds.features.rows(); ++i) {
      const auto row = ds.features.row(i);
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) out << '\t';
        out << detail::format_double(row[k]);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.tsv", std::ios::binary);
    for (const auto y : ds.labels) out << y << '\n';
  }
  if (ds.split) {
    std::ofstream out(dir / "split.json", std::ios::binary);
    out << split_to_json(*ds.split).dump() << '\n';
  }
}

/// `per_class` training nodes from every class, then `val` and `test` nodes
/// drawn uniformly from the remainder. When the remainder is too small, val
/// and test shrink proportionally and `shrunk` is set.
inline Split make_split(std::span<const std::int32_t> labels,
                        std::size_t num_classes, std::size_t per_class,
                        std::size_t val, std::size_t test, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<index_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < num_classes,
            ErrorKind::Input, "make_split: label out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<index_t>(i));
  }
  Split split;
  std::vector<std::uint8_t> taken(labels.size(), 0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& members = by_class[c];
    require(members.size() >= per_class, ErrorKind::Input,
            "make_split: class " + std::to_string(c) + " has " +
                std::to_string(members.size()) + " nodes, fewer than " +
                std::to_string(per_class) + " requested per class");
    shuffle(std::span<index_t>(members), rng);
    for (std::size_t k = 0; k < per_class; ++k) {
      split.train.push_back(members[k]);
      taken[members[k]] = 1;
    }
  }
  std::vector<index_t> rest;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!taken[i]) rest.push_back(static_cast<index_t>(i));
  shuffle(std::span<index_t>(rest), rng);
  if (val + test > rest.size()) {
    split.shrunk = true;
    const double ratio =
        static_cast<double>(rest.size()) / static_cast<double>(val + test);
    val = static_cast<std::size_t>(std::floor(static_cast<double>(val) * ratio));
    test = std::min(rest.size() - val,
                    static_cast<std::size_t>(std::floor(static_cast<double>(test) * ratio)));
  }
  split.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(val));
  split.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(val),
                    rest.begin() + static_cast<std::ptrdiff_t>(val + test));
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace shellprop
