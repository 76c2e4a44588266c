#include "hoigaze/nd/ndarray.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "hoigaze/errors.hpp"

namespace hoigaze::nd {
namespace {

std::atomic<bool> g_checked{true};

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("array shape must have at least one axis");
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("array dimensions must be positive, got " + shape_string(shape));
  }
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void set_checked_mode(bool enabled) { g_checked = enabled; }
bool checked_mode() { return g_checked; }

NdArray::NdArray(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_size(shape_), 0.0);
}

NdArray::NdArray(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_size(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
  if (g_checked && !all_finite()) throw DataError("array contains NaN or Inf");
}

NdArray NdArray::filled(Shape shape, double value) {
  NdArray out(std::move(shape));
  out.fill(value);
  return out;
}

std::size_t NdArray::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape_));
  }
  return shape_[axis];
}

NdArray NdArray::reshaped(Shape shape) const {
  validate_shape(shape);
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  NdArray out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

void NdArray::fill(double value) {
  for (double& v : data_) v = value;
}

void NdArray::add_scaled(const NdArray& other, double scale) {
  if (other.shape_ != shape_) {
    throw ShapeError("add: " + shape_string(shape_) + " vs " + shape_string(other.shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

bool NdArray::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace hoigaze::nd
