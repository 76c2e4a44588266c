#pragma once

#include <functional>
#include <string>

namespace hoigaze {

/// Receives warnings raised by library code. Defaults to stderr.
using WarningSink = std::function<void(const std::string&)>;

void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace hoigaze
