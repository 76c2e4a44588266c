#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hoigaze/nd/graph.hpp"

namespace hoigaze::nd {

/// Text container for model weights:
///
///   hoigaze-ckpt v1 kind=<kind> key=value ...
///   <param name> shape=d0,d1,...
///   v v v ...
///
/// Values are written at float32 precision.
struct Checkpoint {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, NdArray>> params;

  /// Throws DataError when the key is absent.
  const std::string& get(const std::string& key) const;
};

void write_checkpoint(std::ostream& out, const std::string& kind,
                      const std::vector<std::pair<std::string, std::string>>& config, const ParamSet& params);
void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::vector<std::pair<std::string, std::string>>& config, const ParamSet& params);

Checkpoint read_checkpoint(std::istream& in, const std::string& source);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored values into `params`. Names and shapes must match one to one.
void restore_params(ParamSet& params, const Checkpoint& checkpoint);

}  // namespace hoigaze::nd
