#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "hoigaze/data/frame.hpp"

namespace hoigaze::data {

/// Values per frame row: 18 fixed + 6N hand + 3J object coordinates.
std::size_t row_width(const SequenceInfo& info);

/// Parses `hoigaze-seq v1 N=.. J=.. fps=30 hand_mode=..`.
SequenceInfo parse_header(const std::string& line, const std::string& source = "<header>");
std::string format_header(const SequenceInfo& info);

/// Reads a sequence file. Directions are renormalised when within 1e-2 of
/// unit length and rejected otherwise. When `expected` is given, the header
/// must agree with it on N and J.
Sequence read_sequence(std::istream& in, const std::string& source,
                       const std::optional<SequenceInfo>& expected = std::nullopt);
Sequence load_sequence(const std::filesystem::path& path,
                       const std::optional<SequenceInfo>& expected = std::nullopt);

/// Writes values at float32 precision.
void write_sequence(std::ostream& out, const Sequence& sequence);
void save_sequence(const std::filesystem::path& path, const Sequence& sequence);

/// One sequence path per line; blank lines and `#` comments are skipped.
/// Relative paths resolve against the manifest's directory. Every header is
/// read to fill `info`, and all sequences must share N and J.
DatasetManifest load_manifest(const std::filesystem::path& path);
/// Writes paths relative to the manifest's directory where possible.
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace hoigaze::data
