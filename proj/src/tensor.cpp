#include "avf/tensor.hpp"

#include <functional>
#include <numeric>

#include "avf/error.hpp"

namespace avf {

namespace {

std::size_t element_count(const Tensor::Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const Tensor::Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0 && !(shape.size() == 1)) {
      throw ShapeError("tensor shape " + shape_string(shape) + " has a zero extent");
    }
  }
}

}  // namespace

std::string shape_string(const Tensor::Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("shape " + avf::shape_string(shape_) + " needs " + std::to_string(element_count(shape_)) +
                     " values, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) { return vector(std::vector<double>(values)); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(Shape{r, c}, std::move(data));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string());
  return data_[0];
}

std::string Tensor::shape_string() const { return avf::shape_string(shape_); }

}  // namespace avf
