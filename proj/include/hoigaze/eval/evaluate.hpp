#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hoigaze/data/frame.hpp"
#include "hoigaze/estimator/estimator.hpp"
#include "hoigaze/nd/ndarray.hpp"
#include "hoigaze/recognizer/recognizer.hpp"

namespace hoigaze::eval {

/// Degrees between two directions, renormalised first. Throws DataError
/// for a (near) zero vector.
double angular_error(const data::Vec3& a, const data::Vec3& b);

/// Per-frame angular errors between 3 x T direction arrays.
std::vector<double> frame_errors(const nd::NdArray& pred, const nd::NdArray& truth);

/// Predicts 3 x T gaze for a normalised window given the attended hand.
using GazePredictor = std::function<nd::NdArray(const data::FrameWindow&, data::Side)>;

/// Returns the window's head directions.
nd::NdArray head_direction_baseline(const data::FrameWindow& window);
GazePredictor head_direction_predictor();
/// The estimator must outlive the predictor.
GazePredictor estimator_predictor(const estimator::Estimator& model);

struct CdfPoint {
  double threshold_deg = 0.0;
  double fraction = 0.0;  // share of errors <= threshold
};

/// Thresholds 0, step, ..., max.
std::vector<CdfPoint> error_cdf(std::span<const double> errors, double max_deg = 180.0, double step_deg = 0.5);

struct WindowResult {
  std::string sequence_id;
  std::size_t start = 0;
  data::Side attended = data::Side::Right;  // side handed to the predictor
  data::Side label = data::Side::Right;     // ground-truth window label
  double error_deg = 0.0;                   // mean over the window's frames
};

struct EvalReport {
  std::size_t window_count = 0;
  double mean_error_deg = 0.0;
  std::vector<WindowResult> windows;  // ordered by (sequence id, start)
  std::vector<CdfPoint> cdf;
  bool has_recognizer = false;
  double recognizer_accuracy = 0.0;
  std::size_t correct_windows = 0;
  std::size_t wrong_windows = 0;
  std::optional<double> mean_error_correct;
  std::optional<double> mean_error_wrong;

  std::vector<double> errors() const;
};

/// Mean over windows of the mean per-frame angular error. With a
/// recogniser, its decision picks the attended hand and the report carries
/// its window accuracy and the correct/wrong split; otherwise the
/// ground-truth label is used. Throws DataError on an empty set.
EvalReport evaluate(const std::vector<data::FrameWindow>& windows, const GazePredictor& predictor,
                    const recognizer::Recognizer* recognizer = nullptr);

/// `key value` summary lines. The split is included when `with_split` and
/// a recogniser was used.
void write_summary(std::ostream& out, const EvalReport& report, bool with_split);

/// Two columns `threshold_deg fraction`.
void export_cdf(std::span<const double> errors, const std::filesystem::path& path, double max_deg = 180.0,
                double step_deg = 0.5);
/// One error per line.
void export_raw_errors(std::span<const double> errors, const std::filesystem::path& path);

}  // namespace hoigaze::eval
