#include "hoigaze/training.hpp"

#include <algorithm>
#include <numeric>

#include "hoigaze/errors.hpp"

namespace hoigaze {

std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t count, std::size_t batch, nd::Rng& rng) {
  if (batch == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with explicit draws.
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < count; i += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(count, i + batch)));
  return out;
}

}  // namespace hoigaze
