#include "medn/array.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "medn/errors.hpp"

namespace medn {

std::string shape_string(const Shape& shape) {
    std::string text = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            text += "x";
        }
        text += std::to_string(shape[i]);
    }
    return text + "]";
}

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

DenseArray::DenseArray(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

DenseArray::DenseArray(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_size(shape_) != data_.size()) {
        throw DimensionError("array shape " + shape_string(shape_) + " holds " +
                             std::to_string(shape_size(shape_)) + " values, got " +
                             std::to_string(data_.size()));
    }
}

DenseArray DenseArray::vector(std::initializer_list<double> values) {
    return DenseArray({values.size()}, std::vector<double>(values));
}

DenseArray DenseArray::matrix(std::size_t rows, std::size_t cols,
                              std::initializer_list<double> values) {
    return DenseArray({rows, cols}, std::vector<double>(values));
}

std::size_t DenseArray::rows() const noexcept {
    return shape_.size() == 2 ? shape_[0] : 1;
}

std::size_t DenseArray::cols() const noexcept {
    if (shape_.size() == 2) {
        return shape_[1];
    }
    return data_.size();
}

bool DenseArray::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void DenseArray::fill(double value) {
    std::fill(data_.begin(), data_.end(), value);
}

} // namespace medn
