#include "pmn/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "pmn/errors.hpp"

namespace pmn {

std::string shape_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, Real fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
    for (auto d : shape_) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape_));
    }
}

Tensor::Tensor(Shape shape, std::vector<Real> values) : shape_(std::move(shape)), data_(std::move(values)) {
    for (auto d : shape_) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape_));
    }
    if (shape_size(shape_) != data_.size()) {
        throw DimensionError("shape " + shape_string(shape_) + " does not hold " + std::to_string(data_.size()) +
                             " values");
    }
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_string(shape_));
    }
    return shape_[axis];
}

std::span<Real> Tensor::row(std::size_t i) {
    return std::span<Real>(data_).subspan(i * shape_[1], shape_[1]);
}

std::span<const Real> Tensor::row(std::size_t i) const {
    return std::span<const Real>(data_).subspan(i * shape_[1], shape_[1]);
}

std::span<Real> Tensor::plane(std::size_t c) {
    const std::size_t n = shape_[1] * shape_[2];
    return std::span<Real>(data_).subspan(c * n, n);
}

std::span<const Real> Tensor::plane(std::size_t c) const {
    const std::size_t n = shape_[1] * shape_[2];
    return std::span<const Real>(data_).subspan(c * n, n);
}

bool Tensor::all_finite() const noexcept {
    for (Real v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace pmn
