#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace medn {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major array of doubles. Rank 1 and 2 are the only ranks the
// networks use; higher ranks are stored but only elementwise ops apply.
class DenseArray {
public:
    DenseArray() = default;
    explicit DenseArray(Shape shape, double fill = 0.0);
    DenseArray(Shape shape, std::vector<double> data);

    static DenseArray vector(std::initializer_list<double> values);
    static DenseArray matrix(std::size_t rows, std::size_t cols,
                             std::initializer_list<double> values);
    static DenseArray scalar(double value) { return DenseArray({1}, {value}); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }

    // For rank-2 arrays; rank-1 arrays are treated as a single row.
    std::size_t rows() const noexcept;
    std::size_t cols() const noexcept;

    double& operator[](std::size_t i) { return data_[i]; }
    const double& operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t r) const { return data().subspan(r * cols(), cols()); }

    bool all_finite() const noexcept;
    void fill(double value);

    bool operator==(const DenseArray& other) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

} // namespace medn
