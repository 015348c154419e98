#pragma once

#include <span>
#include <vector>

#include "adsgd/dataset.hpp"

namespace adsgd {

/**
 * Partition of the coordinates {0..d-1} into q disjoint, non-empty, sorted
 * groups. Block ids follow the order the groups were given in.
 */
class BlockPartition {
 public:
  BlockPartition(std::vector<std::vector<Index>> groups, Index dim);

  /// q contiguous ranges whose sizes differ by at most one.
  static BlockPartition contiguous(Index dim, Index q);
  static BlockPartition singletons(Index dim) { return contiguous(dim, dim); }

  Index size() const { return static_cast<Index>(groups_.size()); }
  Index dim() const { return static_cast<Index>(block_of_.size()); }

  std::span<const Index> group(Index j) const { return groups_[static_cast<std::size_t>(j)]; }
  const std::vector<std::vector<Index>>& groups() const { return groups_; }

  Index block_of(Index coord) const { return block_of_[static_cast<std::size_t>(coord)]; }
  /// Position of `coord` inside its group.
  Index slot_of(Index coord) const { return slot_[static_cast<std::size_t>(coord)]; }
  /// True when group j is a run of consecutive coordinates.
  bool is_contiguous(Index j) const { return contiguous_[static_cast<std::size_t>(j)]; }

 private:
  std::vector<std::vector<Index>> groups_;
  std::vector<Index> block_of_;
  std::vector<Index> slot_;
  std::vector<bool> contiguous_;
};

}  // namespace adsgd
