#include "hoigaze/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "hoigaze/data/windows.hpp"
#include "hoigaze/errors.hpp"

namespace hoigaze::eval {
namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

double angular_error(const data::Vec3& a, const data::Vec3& b) {
  const double na = data::norm(a), nb = data::norm(b);
  if (na < 1e-12 || nb < 1e-12) throw DataError("angular_error: zero-length direction");
  const double c = std::clamp(data::dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

std::vector<double> frame_errors(const nd::NdArray& pred, const nd::NdArray& truth) {
  if (pred.rank() != 2 || pred.dim(0) != 3 || pred.shape() != truth.shape())
    throw ShapeError("frame_errors: expected two 3 x T arrays");
  std::vector<double> out(pred.dim(1));
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = angular_error({pred.at(0, t), pred.at(1, t), pred.at(2, t)},
                           {truth.at(0, t), truth.at(1, t), truth.at(2, t)});
  }
  return out;
}

nd::NdArray head_direction_baseline(const data::FrameWindow& window) { return data::head_directions(window); }

GazePredictor head_direction_predictor() {
  return [](const data::FrameWindow& w, data::Side) { return head_direction_baseline(w); };
}

GazePredictor estimator_predictor(const estimator::Estimator& model) {
  return [&model](const data::FrameWindow& w, data::Side side) { return model.predict(w, side); };
}

std::vector<CdfPoint> error_cdf(std::span<const double> errors, double max_deg, double step_deg) {
  if (errors.empty()) throw DataError("error_cdf: no errors");
  if (!(step_deg > 0.0) || !(max_deg >= 0.0)) throw ConfigError("error_cdf: need step > 0 and max >= 0");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  const auto count = static_cast<std::size_t>(std::floor(max_deg / step_deg + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) {
    const double threshold = static_cast<double>(i) * step_deg;
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), threshold) - sorted.begin();
    out.push_back({threshold, static_cast<double>(below) / static_cast<double>(sorted.size())});
  }
  return out;
}

std::vector<double> EvalReport::errors() const {
  std::vector<double> out;
  out.reserve(windows.size());
  for (const WindowResult& w : windows) out.push_back(w.error_deg);
  return out;
}

EvalReport evaluate(const std::vector<data::FrameWindow>& windows, const GazePredictor& predictor,
                    const recognizer::Recognizer* recognizer) {
  if (windows.empty()) throw DataError("evaluate: empty test set");
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& wa = windows[a];
    const auto& wb = windows[b];
    return wa.sequence_id != wb.sequence_id ? wa.sequence_id < wb.sequence_id : wa.start < wb.start;
  });

  EvalReport report;
  report.has_recognizer = recognizer != nullptr;
  double total = 0.0, correct_total = 0.0, wrong_total = 0.0;
  for (std::size_t index : order) {
    const data::FrameWindow& w = windows[index];
    WindowResult r;
    r.sequence_id = w.sequence_id;
    r.start = w.start;
    r.label = data::label_attended_hand(w).window;
    r.attended = recognizer != nullptr ? recognizer::infer_attended(recognizer->predict(w)).side : r.label;
    const std::vector<double> errors = frame_errors(predictor(w, r.attended), data::gaze_directions(w));
    r.error_deg = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    total += r.error_deg;
    if (r.attended == r.label) {
      ++report.correct_windows;
      correct_total += r.error_deg;
    } else {
      ++report.wrong_windows;
      wrong_total += r.error_deg;
    }
    report.windows.push_back(std::move(r));
  }
  const double n = static_cast<double>(windows.size());
  report.window_count = windows.size();
  report.mean_error_deg = total / n;
  report.cdf = error_cdf(report.errors());
  if (recognizer != nullptr) {
    report.recognizer_accuracy = static_cast<double>(report.correct_windows) / n;
    if (report.correct_windows > 0)
      report.mean_error_correct = correct_total / static_cast<double>(report.correct_windows);
    if (report.wrong_windows > 0) report.mean_error_wrong = wrong_total / static_cast<double>(report.wrong_windows);
  }
  return report;
}

void write_summary(std::ostream& out, const EvalReport& report, bool with_split) {
  out << "windows " << report.window_count << '\n';
  out << "mean_angular_error_deg " << fixed(report.mean_error_deg) << '\n';
  if (!report.has_recognizer) return;
  out << "recognizer_accuracy " << fixed(report.recognizer_accuracy) << '\n';
  if (!with_split) return;
  out << "correct_windows " << report.correct_windows << '\n';
  out << "wrong_windows " << report.wrong_windows << '\n';
  out << "mean_error_correct_deg " << (report.mean_error_correct ? fixed(*report.mean_error_correct) : "n/a") << '\n';
  out << "mean_error_wrong_deg " << (report.mean_error_wrong ? fixed(*report.mean_error_wrong) : "n/a") << '\n';
}

void export_cdf(std::span<const double> errors, const std::filesystem::path& path, double max_deg, double step_deg) {
  const std::vector<CdfPoint> cdf = error_cdf(errors, max_deg, step_deg);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char line[64];
  for (const CdfPoint& p : cdf) {
    std::snprintf(line, sizeof line, "%.6g %.9g\n", p.threshold_deg, p.fraction);
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void export_raw_errors(std::span<const double> errors, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char line[64];
  for (double e : errors) {
    std::snprintf(line, sizeof line, "%.17g\n", e);
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hoigaze::eval
