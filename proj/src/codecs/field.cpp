#include "adjckpt/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "adjckpt/error.hpp"

namespace adjckpt {

std::size_t element_count(std::span<const std::size_t> shape) {
  std::size_t count = 1;
  for (std::size_t extent : shape) count *= extent;
  return count;
}

Field::Field(std::vector<std::size_t> shape_, double fill)
    : shape(std::move(shape_)), values(element_count(shape), fill) {}

Field::Field(std::vector<std::size_t> shape_, std::vector<double> values_)
    : shape(std::move(shape_)), values(std::move(values_)) {
  if (element_count(shape) != values.size()) {
    throw InvalidArgument("field has " + std::to_string(values.size()) +
                          " values but its shape holds " + std::to_string(element_count(shape)));
  }
}

bool bitwise_equal(const Field& a, const Field& b) {
  return a.shape == b.shape && a.values.size() == b.values.size() &&
         std::memcmp(a.values.data(), b.values.data(), a.bytes()) == 0;
}

double max_abs_difference(const Field& a, const Field& b) {
  if (a.values.size() != b.values.size()) throw InvalidArgument("field sizes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  }
  return worst;
}

}  // namespace adjckpt
