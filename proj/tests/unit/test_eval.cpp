#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hoigaze/data/dataset.hpp"
#include "hoigaze/data/windows.hpp"
#include "hoigaze/errors.hpp"
#include "hoigaze/eval/evaluate.hpp"
#include "hoigaze/synth/generator.hpp"
#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

namespace data = hoigaze::data;
namespace nd = hoigaze::nd;
namespace ev = hoigaze::eval;
using hoigaze::testing::TempDir;

namespace {

std::vector<data::FrameWindow> synth_windows(double head_follow, std::size_t sequences = 2) {
  hoigaze::synth::SynthConfig c;
  c.num_sequences = sequences;
  c.frames_per_sequence = 150;
  c.joints = 4;
  c.objects = 2;
  c.head_follow = head_follow;
  std::vector<data::Sequence> seqs;
  for (std::size_t i = 0; i < sequences; ++i) seqs.push_back(hoigaze::synth::generate_sequence(c, i).sequence);
  return data::collect_windows(seqs, 15, 15);
}

// Rodrigues rotation of every column about a fixed axis perpendicular to it.
nd::NdArray rotate_columns(const nd::NdArray& dirs, double degrees) {
  nd::NdArray out(dirs.shape());
  const double a = degrees * std::numbers::pi / 180.0;
  for (std::size_t t = 0; t < dirs.dim(1); ++t) {
    const data::Vec3 v{dirs.at(0, t), dirs.at(1, t), dirs.at(2, t)};
    const data::Vec3 helper = std::abs(v[0]) < 0.9 ? data::Vec3{1, 0, 0} : data::Vec3{0, 1, 0};
    const data::Vec3 k = data::normalized(data::cross(v, helper));
    const data::Vec3 r = std::cos(a) * v + std::sin(a) * data::cross(k, v);
    for (std::size_t d = 0; d < 3; ++d) out.at(d, t) = r[d];
  }
  return out;
}

}  // namespace

TEST_CASE("angular_error on the trivial cases") {
  CHECK(ev::angular_error({1, 0, 0}, {1, 0, 0}) == 0.0);
  CHECK(ev::angular_error({1, 0, 0}, {0, 1, 0}) == 90.0);
  CHECK(ev::angular_error({0, 0, 1}, {0, 0, -1}) == 180.0);
  CHECK(ev::angular_error({2, 0, 0}, {0, 0, 5}) == 90.0);
  CHECK(ev::angular_error({1, 1, 0}, {1, 0, 0}) == doctest::Approx(45.0).epsilon(1e-12));
  CHECK_THROWS_AS(ev::angular_error({0, 0, 0}, {1, 0, 0}), hoigaze::DataError);
  CHECK_THROWS_AS(ev::angular_error({1, 0, 0}, {0, 0, 0}), hoigaze::DataError);
}

TEST_CASE("frame_errors checks shapes") {
  const nd::NdArray a({3, 2}, {1, 0, 0, 1, 0, 0});
  const auto errors = ev::frame_errors(a, a);
  CHECK(errors == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(ev::frame_errors(a, nd::NdArray({3, 3})), hoigaze::ShapeError);
  CHECK_THROWS_AS(ev::frame_errors(nd::NdArray({2, 2}), nd::NdArray({2, 2})), hoigaze::ShapeError);
}

TEST_CASE("a predictor rotated by 10 degrees scores 10 degrees") {
  const auto windows = synth_windows(0.02);
  const ev::GazePredictor rotated = [](const data::FrameWindow& w, data::Side) {
    return rotate_columns(data::gaze_directions(w), 10.0);
  };
  const auto report = ev::evaluate(windows, rotated);
  CHECK(report.window_count == windows.size());
  CHECK(report.mean_error_deg == doctest::Approx(10.0).epsilon(1e-9));
  for (const auto& w : report.windows) CHECK(w.error_deg == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("head-direction baseline is near zero when the head tracks gaze") {
  // The eye moves with the head, so gaze is re-resolved after the head turns
  // and the two never coincide exactly.
  const auto report = ev::evaluate(synth_windows(1.0), ev::head_direction_predictor());
  CHECK(report.mean_error_deg < 1.0);
  const auto lagging = ev::evaluate(synth_windows(0.02), ev::head_direction_predictor());
  CHECK(lagging.mean_error_deg > 5.0);
}

TEST_CASE("error_cdf is a monotone step function ending at one") {
  const std::vector<double> errors{0.0, 0.5, 0.7, 3.0, 3.0, 179.9};
  const auto cdf = ev::error_cdf(errors);
  REQUIRE(cdf.size() == 361);
  CHECK(cdf.front().threshold_deg == 0.0);
  CHECK(cdf.back().threshold_deg == 180.0);
  CHECK(cdf.back().fraction == 1.0);
  for (std::size_t i = 1; i < cdf.size(); ++i) CHECK(cdf[i].fraction >= cdf[i - 1].fraction);
  // Errors equal to a threshold count as below it.
  CHECK(cdf[0].fraction == doctest::Approx(1.0 / 6.0));
  CHECK(cdf[1].fraction == doctest::Approx(2.0 / 6.0));
  CHECK(cdf[6].fraction == doctest::Approx(5.0 / 6.0));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  std::vector<double> many(500);
  for (double& e : many) e = u(rng);
  const auto coarse = ev::error_cdf(many, 60.0, 2.5);
  for (const auto& p : coarse) {
    const auto below = std::count_if(many.begin(), many.end(), [&](double e) { return e <= p.threshold_deg; });
    CHECK(p.fraction == doctest::Approx(static_cast<double>(below) / 500.0));
  }
  CHECK(coarse.back().fraction == 1.0);
  CHECK_THROWS_AS(ev::error_cdf(std::vector<double>{}), hoigaze::DataError);
  CHECK_THROWS_AS(ev::error_cdf(errors, 10.0, 0.0), hoigaze::ConfigError);
}

TEST_CASE("evaluate orders windows and splits by recogniser correctness") {
  auto windows = synth_windows(0.02, 3);
  std::reverse(windows.begin(), windows.end());
  hoigaze::recognizer::RecognizerConfig rc;
  rc.joints = 4;
  rc.gcn_blocks = 1;
  rc.seed = 2;
  const hoigaze::recognizer::Recognizer recognizer(rc);
  const auto report = ev::evaluate(windows, ev::head_direction_predictor(), &recognizer);
  for (std::size_t i = 1; i < report.windows.size(); ++i) {
    const auto& a = report.windows[i - 1];
    const auto& b = report.windows[i];
    CHECK((a.sequence_id < b.sequence_id || (a.sequence_id == b.sequence_id && a.start < b.start)));
  }
  CHECK(report.has_recognizer);
  CHECK(report.correct_windows + report.wrong_windows == report.window_count);
  CHECK(report.recognizer_accuracy ==
        doctest::Approx(static_cast<double>(report.correct_windows) / static_cast<double>(report.window_count)));
  double recombined = 0.0;
  if (report.mean_error_correct) recombined += *report.mean_error_correct * static_cast<double>(report.correct_windows);
  if (report.mean_error_wrong) recombined += *report.mean_error_wrong * static_cast<double>(report.wrong_windows);
  recombined /= static_cast<double>(report.window_count);
  CHECK(std::abs(recombined - report.mean_error_deg) < 1e-9);

  for (const auto& w : report.windows) {
    const auto it = std::find_if(windows.begin(), windows.end(), [&](const data::FrameWindow& fw) {
      return fw.sequence_id == w.sequence_id && fw.start == w.start;
    });
    REQUIRE(it != windows.end());
    CHECK(w.label == data::label_attended_hand(*it).window);
    CHECK(w.attended == hoigaze::recognizer::infer_attended(recognizer.predict(*it)).side);
  }

  const auto plain = ev::evaluate(windows, ev::head_direction_predictor());
  CHECK_FALSE(plain.has_recognizer);
  CHECK(plain.mean_error_deg == doctest::Approx(report.mean_error_deg).epsilon(1e-12));
  CHECK_THROWS_AS(ev::evaluate({}, ev::head_direction_predictor()), hoigaze::DataError);
}

TEST_CASE("evaluate passes the ground-truth side without a recogniser") {
  const auto windows = synth_windows(0.02);
  std::size_t calls = 0;
  const ev::GazePredictor spy = [&](const data::FrameWindow& w, data::Side side) {
    CHECK(side == data::label_attended_hand(w).window);
    ++calls;
    return data::gaze_directions(w);
  };
  const auto report = ev::evaluate(windows, spy);
  CHECK(calls == windows.size());
  CHECK(report.mean_error_deg < 1e-6);
}

TEST_CASE("write_summary and the export files") {
  const auto windows = synth_windows(0.02);
  const auto report = ev::evaluate(windows, ev::head_direction_predictor());
  std::ostringstream summary;
  ev::write_summary(summary, report, true);
  CHECK(summary.str().find("windows " + std::to_string(windows.size())) != std::string::npos);
  CHECK(summary.str().find("mean_angular_error_deg") != std::string::npos);
  CHECK(summary.str().find("recognizer_accuracy") == std::string::npos);

  TempDir dir("eval_export");
  const auto errors = report.errors();
  ev::export_raw_errors(errors, dir / "errors.txt");
  ev::export_cdf(errors, dir / "cdf.txt");
  std::ifstream raw(dir / "errors.txt");
  std::vector<double> back;
  for (double e; raw >> e;) back.push_back(e);
  CHECK(back == errors);
  std::ifstream cdf(dir / "cdf.txt");
  std::size_t rows = 0;
  double threshold = 0.0, fraction = 0.0, last = 0.0;
  while (cdf >> threshold >> fraction) {
    CHECK(fraction >= last);
    last = fraction;
    ++rows;
  }
  CHECK(rows == 361);
  CHECK(last == 1.0);
  CHECK_THROWS_AS(ev::export_raw_errors(errors, dir / "missing" / "x.txt"), hoigaze::IoError);
}
