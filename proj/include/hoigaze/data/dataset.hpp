#pragma once

#include <cstddef>
#include <vector>

#include "hoigaze/data/frame.hpp"

namespace hoigaze::data {

/// Loads every sequence of the manifest, cuts windows and normalises them.
/// Windows are ordered by (sequence id, start) whatever the manifest order.
std::vector<FrameWindow> load_windows(const DatasetManifest& manifest, std::size_t length = kDefaultWindow,
                                      std::size_t stride = kTrainStride);

/// Same as load_windows for sequences already in memory.
std::vector<FrameWindow> collect_windows(const std::vector<Sequence>& sequences, std::size_t length = kDefaultWindow,
                                         std::size_t stride = kTrainStride);

}  // namespace hoigaze::data
