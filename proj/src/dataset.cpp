#include "adsgd/dataset.hpp"

#include <algorithm>
#include <string>

#include "adsgd/errors.hpp"

namespace adsgd {

Dataset::Dataset(Index n, Index d, std::vector<Entry> entries, Vector y)
    : y_(std::move(y)) {
  if (n < 0 || d < 0) throw InvalidArgument("dataset: negative dimensions");
  if (y_.size() != n)
    throw InvalidArgument("dataset: y has " + std::to_string(y_.size()) +
                          " entries, expected " + std::to_string(n));
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= d)
      throw InvalidArgument("dataset: entry (" + std::to_string(e.row) + "," +
                            std::to_string(e.col) + ") out of range");
    if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col)
      throw InvalidArgument("dataset: duplicate entry (" +
                            std::to_string(e.row) + "," +
                            std::to_string(e.col) + ")");
    triplets.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col),
                          e.value);
  }
  rows_.resize(n, d);
  rows_.setFromTriplets(triplets.begin(), triplets.end());
  rows_.makeCompressed();
  cols_ = rows_;
  cols_.makeCompressed();
}

Dataset::Dataset(RowMatrix rows, Vector y)
    : rows_(std::move(rows)), y_(std::move(y)) {
  if (y_.size() != rows_.rows())
    throw InvalidArgument("dataset: y length does not match row count");
  rows_.makeCompressed();
  cols_ = rows_;
  cols_.makeCompressed();
}

Dataset Dataset::select_columns(std::span<const Index> features) const {
  std::vector<int> local(static_cast<std::size_t>(d()), -1);
  for (std::size_t k = 0; k < features.size(); ++k) {
    const Index f = features[k];
    if (f < 0 || f >= d() || (k > 0 && features[k - 1] >= f))
      throw InvalidArgument("select_columns: features must be sorted, unique and in range");
    local[static_cast<std::size_t>(f)] = static_cast<int>(k);
  }
  RowMatrix sub(n(), static_cast<Index>(features.size()));
  std::vector<int> counts(static_cast<std::size_t>(n()), 0);
  for (Index i = 0; i < n(); ++i)
    for (RowMatrix::InnerIterator it(rows_, i); it; ++it)
      if (local[static_cast<std::size_t>(it.col())] >= 0) ++counts[static_cast<std::size_t>(i)];
  sub.reserve(counts);
  for (Index i = 0; i < n(); ++i)
    for (RowMatrix::InnerIterator it(rows_, i); it; ++it) {
      const int c = local[static_cast<std::size_t>(it.col())];
      if (c >= 0) sub.insert(i, c) = it.value();
    }
  return Dataset(std::move(sub), y_);
}

}  // namespace adsgd
