#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <span>
#include <vector>

namespace adsgd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Entry {
  Index row;
  Index col;
  double value;
};

/**
 * Sparse design matrix A (n x d) with both row (per-sample) and column
 * (per-feature) compressed storage, plus the response vector y.
 *
 * Immutable after construction; safe to share between concurrent solves.
 */
class Dataset {
 public:
  /// Builds from coordinate entries. Rejects out-of-range and duplicate
  /// (row, col) pairs.
  Dataset(Index n, Index d, std::vector<Entry> entries, Vector y);

  /// Builds from an already-compressed row matrix (no validation of
  /// duplicates, which compressed storage cannot represent).
  Dataset(RowMatrix rows, Vector y);

  Index n() const { return rows_.rows(); }
  Index d() const { return rows_.cols(); }
  const RowMatrix& rows() const { return rows_; }
  const ColMatrix& cols() const { return cols_; }
  const Vector& y() const { return y_; }

  /// Copy of the dataset keeping only the listed columns (sorted, unique),
  /// renumbered 0..features.size()-1.
  Dataset select_columns(std::span<const Index> features) const;

 private:
  RowMatrix rows_;
  ColMatrix cols_;
  Vector y_;
};

}  // namespace adsgd
