#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hoigaze::nd {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Enables the finiteness check on arrays built from external data.
/// On by default.
void set_checked_mode(bool enabled);
bool checked_mode();

/// Dense row-major array of doubles.
class NdArray {
 public:
  NdArray() = default;

  /// Zero-filled array. Every dimension must be positive.
  explicit NdArray(Shape shape);

  /// Wraps existing data. Throws ShapeError when the sizes disagree and,
  /// in checked mode, DataError on NaN/Inf.
  NdArray(Shape shape, std::vector<double> data);

  static NdArray filled(Shape shape, double value);
  static NdArray scalar(double value) { return NdArray({1}, {value}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Same data, new shape of equal size.
  NdArray reshaped(Shape shape) const;

  void fill(double value);
  /// this += scale * other (shapes must match).
  void add_scaled(const NdArray& other, double scale = 1.0);

  bool all_finite() const;

  friend bool operator==(const NdArray& a, const NdArray& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace hoigaze::nd
