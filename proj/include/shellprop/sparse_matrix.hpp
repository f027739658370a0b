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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "shellprop/dense_matrix.hpp"
#include "shellprop/error.hpp"
#include "shellprop/parallel.hpp"

namespace shellprop {

using index_t = std::uint32_t;
using offset_t = std::uint64_t;

/// Compressed sparse row matrix with sorted, unique column indices per row.
template <class T>
class SparseMatrix {
 public:
  using value_type = T;

  struct Entry {
    index_t row;
    index_t col;
    T value;
  };

  SparseMatrix() : offsets_(1, 0) {}

  // Takes ownership of an already-valid CSR layout. Structure is checked.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<offset_t> offsets,
               std::vector<index_t> indices, std::vector<T> values)
      : rows_(rows),
        cols_(cols),
        offsets_(std::move(offsets)),
        indices_(std::move(indices)),
        values_(std::move(values)) {
    validate();
  }

  // Duplicate coordinates are summed.
  static SparseMatrix from_entries(std::size_t rows, std::size_t cols,
                                   std::vector<Entry> entries) {
    for (const auto& e : entries)
      require(e.row < rows && e.col < cols, ErrorKind::Input,
              "sparse entry (" + std::to_string(e.row) + "," +
                  std::to_string(e.col) + ") outside " + std::to_string(rows) +
                  "x" + std::to_string(cols));
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    std::vector<offset_t> offsets(rows + 1, 0);
    std::vector<index_t> indices;
    std::vector<T> values;
    indices.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& e = entries[k];
      if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
        values.back() += e.value;
        continue;
      }
      indices.push_back(e.col);
      values.push_back(e.value);
      ++offsets[e.row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
    return SparseMatrix(rows, cols, std::move(offsets), std::move(indices),
                        std::move(values));
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<offset_t> offsets(n + 1);
    std::vector<index_t> indices(n);
    for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
    for (std::size_t i = 0; i < n; ++i) indices[i] = static_cast<index_t>(i);
    return SparseMatrix(n, n, std::move(offsets), std::move(indices),
                        std::vector<T>(n, T{1}));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return indices_.size(); }

  std::span<const offset_t> offsets() const noexcept { return offsets_; }
  std::span<const index_t> indices() const noexcept { return indices_; }
  std::span<const T> values() const noexcept { return values_; }

  std::span<const index_t> row_indices(std::size_t r) const {
    return {indices_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::span<const T> row_values(std::size_t r) const {
    return {values_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }

  // Zero when the coordinate is not stored.
  T at(std::size_t r, std::size_t c) const {
    const auto idx = row_indices(r);
    const auto it = std::lower_bound(idx.begin(), idx.end(), c);
    if (it == idx.end() || *it != c) return T{};
    return row_values(r)[static_cast<std::size_t>(it - idx.begin())];
  }

  DenseMatrix<T> to_dense() const {
    DenseMatrix<T> out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto idx = row_indices(r);
      const auto val = row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) out(r, idx[k]) = val[k];
    }
    return out;
  }

  SparseMatrix transpose() const {
    std::vector<offset_t> offsets(cols_ + 1, 0);
    for (const index_t c : indices_) ++offsets[c + 1];
    for (std::size_t c = 0; c < cols_; ++c) offsets[c + 1] += offsets[c];
    std::vector<index_t> indices(nnz());
    std::vector<T> values(nnz());
    std::vector<offset_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (offset_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
        const offset_t dst = cursor[indices_[k]]++;
        indices[dst] = static_cast<index_t>(r);
        values[dst] = values_[k];
      }
    }
    return SparseMatrix(cols_, rows_, std::move(offsets), std::move(indices),
                        std::move(values));
  }

  bool is_symmetric(T tol = T{}) const {
    if (rows_ != cols_) return false;
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto idx = row_indices(r);
      const auto val = row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto other = row_indices(idx[k]);
        if (!std::binary_search(other.begin(), other.end(),
                                static_cast<index_t>(r)))
          return false;
        if (std::abs(at(idx[k], r) - val[k]) > tol) return false;
      }
    }
    return true;
  }

  template <class U>
  SparseMatrix<U> cast() const {
    std::vector<U> values(values_.size());
    for (std::size_t k = 0; k < values_.size(); ++k)
      values[k] = static_cast<U>(values_[k]);
    return SparseMatrix<U>(rows_, cols_, offsets_, indices_, std::move(values));
  }

 private:
  void validate() const {
    require(offsets_.size() == rows_ + 1 && offsets_.front() == 0 &&
                offsets_.back() == indices_.size() &&
                values_.size() == indices_.size(),
            ErrorKind::Input, "sparse matrix: inconsistent CSR arrays");
    for (std::size_t r = 0; r < rows_; ++r) {
      require(offsets_[r] <= offsets_[r + 1], ErrorKind::Input,
              "sparse matrix: row offsets decrease at row " + std::to_string(r));
      for (offset_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
        require(indices_[k] < cols_, ErrorKind::Input,
                "sparse matrix: column out of range in row " +
                    std::to_string(r));
        require(k == offsets_[r] || indices_[k - 1] < indices_[k],
                ErrorKind::Input,
                "sparse matrix: unsorted or duplicate column in row " +
                    std::to_string(r));
      }
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<offset_t> offsets_;
  std::vector<index_t> indices_;
  std::vector<T> values_;
};

namespace detail {

// out_row += scale * (m row r) * x, accumulated in column order of the row.
template <class T>
inline void accumulate_row(const SparseMatrix<T>& m, std::size_t r,
                           const DenseMatrix<T>& x, T scale, std::span<T> out) {
  const auto idx = m.row_indices(r);
  const auto val = m.row_values(r);
  const std::size_t width = out.size();
  T* dst = out.data();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const T w = scale * val[k];
    const T* src = x.row(idx[k]).data();
    for (std::size_t j = 0; j < width; ++j) dst[j] += w * src[j];
  }
}

}  // namespace detail

/// Sparse-dense product m * x.
template <class T>
DenseMatrix<T> spmm(const SparseMatrix<T>& m, const DenseMatrix<T>& x) {
  require(m.cols() == x.rows(), ErrorKind::Input,
          "spmm: sparse has " + std::to_string(m.cols()) +
              " columns but dense has " + std::to_string(x.rows()) + " rows");
  DenseMatrix<T> out(m.rows(), x.cols());
  parallel_for(m.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r)
      detail::accumulate_row(m, r, x, T{1}, out.row(r));
  });
  return out;
}

/// a * A + b * B for same-shaped sparse matrices; union pattern.
template <class T>
SparseMatrix<T> linear_combination(T a, const SparseMatrix<T>& lhs, T b,
                                   const SparseMatrix<T>& rhs) {
  require(lhs.rows() == rhs.rows() && lhs.cols() == rhs.cols(), ErrorKind::Input,
          "linear_combination: shape mismatch");
  std::vector<offset_t> offsets(lhs.rows() + 1, 0);
  std::vector<index_t> indices;
  std::vector<T> values;
  indices.reserve(lhs.nnz() + rhs.nnz());
  values.reserve(lhs.nnz() + rhs.nnz());
  for (std::size_t r = 0; r < lhs.rows(); ++r) {
    const auto li = lhs.row_indices(r), ri = rhs.row_indices(r);
    const auto lv = lhs.row_values(r), rv = rhs.row_values(r);
    std::size_t p = 0, q = 0;
    while (p < li.size() || q < ri.size()) {
      if (q == ri.size() || (p < li.size() && li[p] < ri[q])) {
        indices.push_back(li[p]);
        values.push_back(a * lv[p++]);
      } else if (p == li.size() || ri[q] < li[p]) {
        indices.push_back(ri[q]);
        values.push_back(b * rv[q++]);
      } else {
        indices.push_back(li[p]);
        values.push_back(a * lv[p++] + b * rv[q++]);
      }
    }
    offsets[r + 1] = indices.size();
  }
  return SparseMatrix<T>(lhs.rows(), lhs.cols(), std::move(offsets),
                         std::move(indices), std::move(values));
}

}  // namespace shellprop
