#include "adsgd/partition.hpp"

#include <algorithm>
#include <string>

#include "adsgd/errors.hpp"

namespace adsgd {

BlockPartition::BlockPartition(std::vector<std::vector<Index>> groups, Index dim)
    : groups_(std::move(groups)),
      block_of_(static_cast<std::size_t>(std::max<Index>(dim, 0)), -1),
      slot_(block_of_.size(), -1) {
  if (dim < 1) throw InvalidArgument("partition: dimension must be positive");
  contiguous_.reserve(groups_.size());
  for (std::size_t j = 0; j < groups_.size(); ++j) {
    auto& g = groups_[j];
    if (g.empty()) throw InvalidArgument("partition: group " + std::to_string(j) + " is empty");
    std::sort(g.begin(), g.end());
    for (std::size_t s = 0; s < g.size(); ++s) {
      const Index c = g[s];
      if (c < 0 || c >= dim)
        throw InvalidArgument("partition: coordinate " + std::to_string(c) + " out of range");
      if (block_of_[static_cast<std::size_t>(c)] != -1)
        throw InvalidArgument("partition: coordinate " + std::to_string(c) +
                              " appears in more than one group");
      block_of_[static_cast<std::size_t>(c)] = static_cast<Index>(j);
      slot_[static_cast<std::size_t>(c)] = static_cast<Index>(s);
    }
    contiguous_.push_back(g.back() - g.front() + 1 == static_cast<Index>(g.size()));
  }
  for (std::size_t c = 0; c < block_of_.size(); ++c)
    if (block_of_[c] == -1)
      throw InvalidArgument("partition: coordinate " + std::to_string(c) + " not covered");
}

BlockPartition BlockPartition::contiguous(Index dim, Index q) {
  if (dim < 1 || q < 1 || q > dim)
    throw InvalidArgument("partition: need 1 <= q <= d (q=" + std::to_string(q) +
                          ", d=" + std::to_string(dim) + ")");
  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(q));
  const Index base = dim / q;
  const Index extra = dim % q;
  Index next = 0;
  for (Index j = 0; j < q; ++j) {
    const Index len = base + (j < extra ? 1 : 0);
    auto& g = groups[static_cast<std::size_t>(j)];
    g.resize(static_cast<std::size_t>(len));
    for (Index s = 0; s < len; ++s) g[static_cast<std::size_t>(s)] = next++;
  }
  return BlockPartition(std::move(groups), dim);
}

}  // namespace adsgd
