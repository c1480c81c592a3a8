//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/sparse.hpp"

#include <algorithm>
#include <string>

#include "brt/errors.hpp"

namespace brt {

DepositionMatrix::DepositionMatrix(int rows, int cols,
                                   std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw config_error("deposition matrix dimensions must be nonnegative");
  }
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw config_error("deposition entry (" + std::to_string(t.row) + "," +
                         std::to_string(t.col) + ") outside " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (t.value < 0.0) {
      throw config_error("deposition entries must be nonnegative");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });

  row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
  col_idx_.reserve(entries.size());
  values_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size();) {
    const int row = entries[i].row;
    const int col = entries[i].col;
    double value = 0.0;
    while (i < entries.size() && entries[i].row == row &&
           entries[i].col == col) {
      value += entries[i].value;
      ++i;
    }
    if (value > 0.0) {
      col_idx_.push_back(col);
      values_.push_back(value);
      ++row_ptr_[static_cast<std::size_t>(row) + 1];
    }
  }
  for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) {
    row_ptr_[r + 1] += row_ptr_[r];
  }

  // Transpose in column-then-row order; this fixes the gradient kernel's
  // summation order.
  tr_ptr_.assign(static_cast<std::size_t>(cols) + 1, 0);
  for (int col : col_idx_) ++tr_ptr_[static_cast<std::size_t>(col) + 1];
  for (std::size_t c = 0; c < static_cast<std::size_t>(cols); ++c) {
    tr_ptr_[c + 1] += tr_ptr_[c];
  }
  tr_idx_.resize(col_idx_.size());
  tr_values_.resize(values_.size());
  std::vector<std::size_t> cursor(tr_ptr_.begin(), tr_ptr_.end() - 1);
  for (int row = 0; row < rows; ++row) {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) {
      const std::size_t slot = cursor[col_idx_[k]]++;
      tr_idx_[slot] = row;
      tr_values_[slot] = values_[k];
    }
  }
}

void DepositionMatrix::apply(std::span<const double> fluence,
                             std::span<double> dose) const {
  for (int row = 0; row < rows_; ++row) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) {
      acc += values_[k] * fluence[col_idx_[k]];
    }
    dose[row] = acc;
  }
}

void DepositionMatrix::apply_transpose(std::span<const double> voxel_weights,
                                       std::span<double> out) const {
  for (int col = 0; col < cols_; ++col) {
    double acc = 0.0;
    for (std::size_t k = tr_ptr_[col]; k < tr_ptr_[col + 1]; ++k) {
      acc += tr_values_[k] * voxel_weights[tr_idx_[k]];
    }
    out[col] = acc;
  }
}

bool DepositionMatrix::row_empty(int row) const {
  return row_ptr_[row] == row_ptr_[static_cast<std::size_t>(row) + 1];
}

double DepositionMatrix::max_column_abs_sum() const {
  double best = 0.0;
  for (int col = 0; col < cols_; ++col) {
    double acc = 0.0;
    for (std::size_t k = tr_ptr_[col]; k < tr_ptr_[col + 1]; ++k) {
      acc += tr_values_[k];
    }
    best = std::max(best, acc);
  }
  return best;
}

std::vector<Triplet> DepositionMatrix::to_triplets() const {
  std::vector<Triplet> out;
  out.reserve(values_.size());
  for (int row = 0; row < rows_; ++row) {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) {
      out.push_back({row, col_idx_[k], values_[k]});
    }
  }
  return out;
}

std::vector<double> dose(const DepositionMatrix& matrix,
                         std::span<const double> fluence) {
  if (static_cast<int>(fluence.size()) != matrix.cols()) {
    throw config_error("fluence length " + std::to_string(fluence.size()) +
                       " does not match deposition matrix columns " +
                       std::to_string(matrix.cols()));
  }
  std::vector<double> result(static_cast<std::size_t>(matrix.rows()));
  matrix.apply(fluence, result);
  return result;
}

}  // namespace brt
