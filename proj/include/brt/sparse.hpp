//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace brt {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Sparse nonnegative voxel x beamlet matrix, Gy per unit fluence. Stored in
// CSR form together with an explicit transpose so both the dose product and
// the gradient accumulation run as row-major kernels with a fixed summation
// order (bitwise-reproducible results).
class DepositionMatrix {
 public:
  DepositionMatrix() = default;

  // Zero-valued triplets are dropped, duplicates are summed, negative values
  // are rejected.
  DepositionMatrix(int rows, int cols, std::vector<Triplet> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzero_count() const { return values_.size(); }

  // dose = D * fluence
  void apply(std::span<const double> fluence, std::span<double> dose) const;
  // out = D^T * voxel_weights
  void apply_transpose(std::span<const double> voxel_weights,
                       std::span<double> out) const;

  bool row_empty(int row) const;
  double max_column_abs_sum() const;  // induced 1-norm

  std::vector<Triplet> to_triplets() const;  // row-major order

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
  std::vector<std::size_t> tr_ptr_;
  std::vector<int> tr_idx_;
  std::vector<double> tr_values_;
};

// Convenience wrapper with dimension checking.
std::vector<double> dose(const DepositionMatrix& matrix,
                         std::span<const double> fluence);

}  // namespace brt
