#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alilab/rng.hpp"

namespace alilab {

// Dense row-major tensor of doubles. Rank 1 or 2 in practice.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, double value);
    static Tensor from(std::vector<int> shape, std::vector<double> data);
    static Tensor scalar(double value) { return from({1}, {value}); }
    static Tensor randn(std::vector<int> shape, Rng& rng, double sigma = 1.0);

    const std::vector<int>& shape() const { return shape_; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    // 2-D accessors; throw ShapeError if the tensor is not rank 2.
    int rows() const;
    int cols() const;
    Tensor row(int r) const; // copy of row r as a [1, cols] tensor

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
    double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
    int cols_ = 0; // cached for at(); equals shape_.back() when rank 2
};

std::string shape_str(const Tensor& t);

// Raw kernels shared by the tape and the untaped forward path so both produce
// bit-identical results. All require pre-sized outputs.
void mm_nn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate);
void mm_nt(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate); // a * b^T
void mm_tn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate); // a^T * b

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);

} // namespace alilab
