#include "hoigaze/data/dataset.hpp"

#include <algorithm>

#include "hoigaze/data/sequence_io.hpp"
#include "hoigaze/data/windows.hpp"

namespace hoigaze::data {

std::vector<FrameWindow> collect_windows(const std::vector<Sequence>& sequences, std::size_t length,
                                         std::size_t stride) {
  std::vector<FrameWindow> out;
  for (const Sequence& seq : sequences)
    for (FrameWindow& w : split_windows(seq, length, stride)) out.push_back(normalize_window(std::move(w)));
  std::stable_sort(out.begin(), out.end(), [](const FrameWindow& a, const FrameWindow& b) {
    return a.sequence_id != b.sequence_id ? a.sequence_id < b.sequence_id : a.start < b.start;
  });
  return out;
}

std::vector<FrameWindow> load_windows(const DatasetManifest& manifest, std::size_t length, std::size_t stride) {
  std::vector<Sequence> sequences;
  for (const auto& path : manifest.sequences) sequences.push_back(load_sequence(path, manifest.info));
  return collect_windows(sequences, length, stride);
}

}  // namespace hoigaze::data
