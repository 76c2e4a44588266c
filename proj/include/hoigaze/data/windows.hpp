#pragma once

#include <cstddef>
#include <vector>

#include "hoigaze/data/frame.hpp"
#include "hoigaze/nd/ndarray.hpp"

namespace hoigaze::data {

/// Windows at offsets 0, stride, 2*stride, ...; floor((len - T) / stride) + 1
/// of them. A sequence shorter than T yields none and a warning.
std::vector<FrameWindow> split_windows(const Sequence& sequence, std::size_t length = kDefaultWindow,
                                       std::size_t stride = kTrainStride);

/// Translates every position by -head_pos of the first frame.
FrameWindow normalize_window(FrameWindow window);

/// Mean of a hand's joint positions.
Vec3 hand_centre(const Frame& frame, Side side);

/// Angle (radians) between the gaze and the eye-to-hand-centre direction;
/// pi when the centre sits on the eye.
double gaze_hand_angle(const Frame& frame, Side side);

/// Per-frame attended hand (smaller gaze angle; exact ties go Left) and the
/// window majority (ties go Right).
AttendedLabel label_attended_hand(const FrameWindow& window);

/// Majority vote with ties going Right.
Side majority_side(const std::vector<Side>& per_frame);

/// The K objects with the smallest mean joint-to-centre distance over all
/// frames and attended-hand joints, ascending by score then index.
std::vector<std::size_t> nearest_objects(const FrameWindow& window, Side attended, std::size_t count = 1);

struct RecognizerInputs {
  nd::NdArray head;   // 3 x T head directions
  nd::NdArray left;   // 3 x (N+3) x T
  nd::NdArray right;  // 3 x (N+3) x T
};

/// Node order: head, left wrist, right wrist, hand joints 0..N-1.
RecognizerInputs build_recognizer_inputs(const FrameWindow& window);

/// 3 x (N+3+K) x T: head, left wrist, right wrist, attended joints, objects.
nd::NdArray build_estimator_input(const FrameWindow& window, Side attended,
                                  const std::vector<std::size_t>& object_indices);

nd::NdArray head_directions(const FrameWindow& window);  // 3 x T
nd::NdArray gaze_directions(const FrameWindow& window);  // 3 x T

}  // namespace hoigaze::data
