#pragma once

#include <algorithm>

#include "adsgd/dataset.hpp"
#include "adsgd/partition.hpp"

namespace adsgd::detail {

inline double row_dot(const RowMatrix& A, Index i, const Vector& x) {
  const int* idx = A.innerIndexPtr();
  const double* val = A.valuePtr();
  double acc = 0.0;
  for (int k = A.outerIndexPtr()[i]; k < A.outerIndexPtr()[i + 1]; ++k) acc += val[k] * x[idx[k]];
  return acc;
}

/// Calls fn(slot, a_ik) for each stored entry of row i whose column k lies in
/// block j; slot is k's position within the group.
template <class Fn>
void for_each_in_block(const RowMatrix& A, Index i, const BlockPartition& p, Index j, Fn&& fn) {
  const int* idx = A.innerIndexPtr();
  const double* val = A.valuePtr();
  const int* begin = idx + A.outerIndexPtr()[i];
  const int* end = idx + A.outerIndexPtr()[i + 1];
  const auto group = p.group(j);
  if (p.is_contiguous(j)) {
    const Index lo = group.front();
    const Index hi = group.back();
    for (const int* it = std::lower_bound(begin, end, static_cast<int>(lo)); it != end && *it <= hi; ++it)
      fn(static_cast<Index>(*it) - lo, val[it - idx]);
    return;
  }
  const int* from = begin;
  for (std::size_t s = 0; s < group.size(); ++s) {
    const int* it = std::lower_bound(from, end, static_cast<int>(group[s]));
    if (it == end) break;
    if (*it == group[s]) fn(static_cast<Index>(s), val[it - idx]);
    from = it;
  }
}

}  // namespace adsgd::detail
