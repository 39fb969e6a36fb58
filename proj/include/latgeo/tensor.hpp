#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "latgeo/errors.hpp"

namespace latgeo {

// Dense row-major array of 64-bit reals. Rank 1 is a vector, rank 2 a matrix.
class Tensor {
public:
    Tensor() = default;

    Tensor(std::vector<int> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (numel_from(shape_) != data_.size()) {
            throw DimensionError("tensor: shape " + shape_str(shape_) + " does not match data length " +
                                 std::to_string(data_.size()));
        }
    }

    static Tensor zeros(std::vector<int> shape) {
        std::size_t n = numel_from(shape);
        return Tensor(std::move(shape), std::vector<double>(n, 0.0));
    }

    static Tensor full(std::vector<int> shape, double v) {
        std::size_t n = numel_from(shape);
        return Tensor(std::move(shape), std::vector<double>(n, v));
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor vector(std::vector<double> v) {
        int n = static_cast<int>(v.size());
        return Tensor({n}, std::move(v));
    }

    static Tensor matrix(int rows, int cols, std::vector<double> v) {
        return Tensor({rows, cols}, std::move(v));
    }

    static Tensor identity(int n) {
        Tensor t = zeros({n, n});
        for (int i = 0; i < n; ++i) t.data_[static_cast<std::size_t>(i) * n + i] = 1.0;
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::size_t numel() const { return data_.size(); }

    int rows() const { return rank() >= 1 ? shape_[0] : 1; }
    int cols() const {
        if (rank() == 2) return shape_[1];
        if (rank() == 1) return shape_[0];
        return 1;
    }

    bool is_scalar() const { return numel() == 1; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
    double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }

    double value() const {
        if (!is_scalar()) throw DimensionError("tensor: value() on non-scalar of shape " + shape_str(shape_));
        return data_[0];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    void require_finite(const std::string& context) const {
        if (!all_finite()) throw NumericError(context + ": non-finite value in tensor of shape " + shape_str(shape_));
    }

    static std::string shape_str(const std::vector<int>& s) {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) os << 'x';
            os << s[i];
        }
        os << ']';
        return os.str();
    }

    std::string shape_str() const { return shape_str(shape_); }

private:
    static std::size_t numel_from(const std::vector<int>& shape) {
        std::size_t n = 1;
        for (int d : shape) {
            if (d <= 0) throw DimensionError("tensor: non-positive dimension in shape " + shape_str(shape));
            n *= static_cast<std::size_t>(d);
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<int> shape_;
    std::vector<double> data_;
};

}  // namespace latgeo
