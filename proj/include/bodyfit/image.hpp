#pragma once

#include <cstdint>
#include <vector>

#include "bodyfit/error.hpp"

namespace bodyfit {

/// Row-major single-channel image; (x, y) = (column, row).
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Image& other) const { return width_ == other.width_ && height_ == other.height_; }
  template <typename U>
  bool same_shape(const Image<U>& other) const { return width_ == other.width() && height_ == other.height(); }

  bool operator==(const Image& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Binary masks hold 0 or 1.
using Mask = Image<std::uint8_t>;

std::size_t count_set(const Mask& mask);

/// Depth in model units (larger z is closer to the viewer); valid(x, y) != 0
/// marks pixels that carry a depth sample.
struct DepthMap {
  Image<double> depth;
  Mask valid;

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
};

}  // namespace bodyfit
