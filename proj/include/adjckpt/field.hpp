#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adjckpt {

/// Dense row-major array of doubles with its shape.
struct Field {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Field() = default;
  explicit Field(std::vector<std::size_t> shape, double fill = 0.0);
  /// Throws InvalidArgument when values.size() does not match the shape.
  Field(std::vector<std::size_t> shape, std::vector<double> values);

  std::size_t size() const noexcept { return values.size(); }
  std::size_t bytes() const noexcept { return values.size() * sizeof(double); }
  std::span<double> span() noexcept { return values; }
  std::span<const double> span() const noexcept { return values; }
};

std::size_t element_count(std::span<const std::size_t> shape);

/// Same shape and identical bit patterns in every element.
bool bitwise_equal(const Field& a, const Field& b);

double max_abs_difference(const Field& a, const Field& b);

}  // namespace adjckpt
