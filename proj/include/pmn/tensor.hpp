#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pmn {

/// Scalar type used everywhere in the project. All tolerances assume IEEE double.
using Real = double;

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major tensor. Rank 2 is used for row collections (m x C),
/// rank 3 for feature volumes (C x h x w).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, Real fill = 0.0);
    Tensor(Shape shape, std::vector<Real> values);

    static Tensor matrix(std::size_t rows, std::size_t cols, Real fill = 0.0) {
        return Tensor({rows, cols}, fill);
    }
    static Tensor volume(std::size_t channels, std::size_t height, std::size_t width, Real fill = 0.0) {
        return Tensor({channels, height, width}, fill);
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<Real> values() noexcept { return data_; }
    std::span<const Real> values() const noexcept { return data_; }
    Real* data() noexcept { return data_.data(); }
    const Real* data() const noexcept { return data_.data(); }

    Real& operator[](std::size_t i) noexcept { return data_[i]; }
    Real operator[](std::size_t i) const noexcept { return data_[i]; }

    // rank-2 access
    Real& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * shape_[1] + j]; }
    Real operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * shape_[1] + j]; }

    // rank-3 access
    Real& operator()(std::size_t c, std::size_t y, std::size_t x) noexcept {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    Real operator()(std::size_t c, std::size_t y, std::size_t x) const noexcept {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }

    /// Row i of a rank-2 tensor.
    std::span<Real> row(std::size_t i);
    std::span<const Real> row(std::size_t i) const;

    /// Plane c of a rank-3 tensor.
    std::span<Real> plane(std::size_t c);
    std::span<const Real> plane(std::size_t c) const;

    bool all_finite() const noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<Real> data_;
};

}  // namespace pmn
