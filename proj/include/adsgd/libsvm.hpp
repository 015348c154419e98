#pragma once

#include <filesystem>
#include <istream>
#include <memory>

#include "adsgd/dataset.hpp"
#include "adsgd/loss.hpp"

namespace adsgd {

/**
 * Reads LIBSVM text ("label idx:val idx:val ..."), 1-based ascending indices,
 * one sample per line in file order. Blank lines and '#' comments are
 * skipped. d is the largest index seen (at least `min_features`).
 *
 * For the logistic model labels are binarized: labels already in {0, 1}
 * are kept; otherwise the sorted distinct labels are split so that the
 * first half of the classes maps to 0 and the rest to 1 ({-1, +1} -> {0, 1}).
 * Squared-error labels are kept verbatim.
 *
 * Throws ParseError (with the 1-based line number) on malformed tokens,
 * index 0, or indices that do not strictly increase within a line.
 */
std::shared_ptr<const Dataset> parse_libsvm(std::istream& in, LossKind model, Index min_features = 0);

/// Opens `path` and parses it; throws InvalidArgument if it cannot be read.
std::shared_ptr<const Dataset> load_libsvm(const std::filesystem::path& path, LossKind model,
                                           Index min_features = 0);

}  // namespace adsgd
