#include "lakenet/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "lakenet/errors.hpp"

namespace lakenet::nn {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("tensor buffer of length " + std::to_string(values_.size()) +
                     " does not match shape [" + std::to_string(rows) + ", " +
                     std::to_string(cols) + "]");
  }
}

std::string Tensor::shape_string() const {
  return "[" + std::to_string(rows_) + ", " + std::to_string(cols_) + "]";
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_string());
  return values_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

void Tensor::add_inplace(const Tensor& other) {
  if (!same_shape(other)) {
    throw ShapeError("add_inplace shape mismatch " + shape_string() + " vs " + other.shape_string());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
}

}  // namespace lakenet::nn
