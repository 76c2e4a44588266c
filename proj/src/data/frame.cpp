#include "hoigaze/data/frame.hpp"

#include "hoigaze/errors.hpp"

namespace hoigaze::data {

const char* to_string(HandMode mode) { return mode == HandMode::Static ? "static" : "dynamic"; }

HandMode parse_hand_mode(const std::string& text) {
  if (text == "dynamic") return HandMode::Dynamic;
  if (text == "static") return HandMode::Static;
  throw DataError("unknown hand mode '" + text + "'");
}

char side_letter(Side side) { return side == Side::Left ? 'L' : 'R'; }
Side other(Side side) { return side == Side::Left ? Side::Right : Side::Left; }

}  // namespace hoigaze::data
