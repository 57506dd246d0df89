#include "alilab/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "alilab/error.hpp"

namespace alilab {

namespace {

std::int64_t shape_product(const std::vector<int>& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one axis");
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor axis extents must be positive, got " + std::to_string(d));
        n *= d;
    }
    return n;
}

} // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
    return full(std::move(shape), 0.0);
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t;
    const std::int64_t n = shape_product(shape);
    t.shape_ = std::move(shape);
    t.data_.assign(static_cast<std::size_t>(n), value);
    t.cols_ = t.shape_.size() == 2 ? t.shape_[1] : 0;
    return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> data) {
    const std::int64_t n = shape_product(shape);
    if (n != static_cast<std::int64_t>(data.size()))
        throw ShapeError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape product " + std::to_string(n));
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    t.cols_ = t.shape_.size() == 2 ? t.shape_[1] : 0;
    return t;
}

Tensor Tensor::randn(std::vector<int> shape, Rng& rng, double sigma) {
    Tensor t = zeros(std::move(shape));
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = sigma * rng.normal();
    return t;
}

int Tensor::rows() const {
    if (shape_.size() != 2) throw ShapeError("rank-2 tensor required, got " + shape_str(*this));
    return shape_[0];
}

int Tensor::cols() const {
    if (shape_.size() != 2) throw ShapeError("rank-2 tensor required, got " + shape_str(*this));
    return shape_[1];
}

Tensor Tensor::row(int r) const {
    const int n = rows();
    if (r < 0 || r >= n)
        throw ShapeError("row " + std::to_string(r) + " out of range for " + shape_str(*this));
    const int c = cols();
    Tensor out = Tensor::zeros({1, c});
    for (int j = 0; j < c; ++j) out.at(0, j) = at(r, j);
    return out;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string shape_str(const Tensor& t) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < t.shape().size(); ++i) {
        if (i) os << "x";
        os << t.shape()[i];
    }
    os << "]";
    return os.str();
}

void mm_nn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
    const int m = a.rows(), k = a.cols(), n = b.cols();
    const double* A = a.data();
    const double* B = b.data();
    double* C = out.data();
    if (!accumulate)
        for (std::int64_t i = 0; i < out.size(); ++i) C[i] = 0.0;
    for (int i = 0; i < m; ++i) {
        double* Crow = C + static_cast<std::int64_t>(i) * n;
        const double* Arow = A + static_cast<std::int64_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double av = Arow[p];
            const double* Brow = B + static_cast<std::int64_t>(p) * n;
            for (int j = 0; j < n; ++j) Crow[j] += av * Brow[j];
        }
    }
}

void mm_nt(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
    const int m = a.rows(), k = a.cols(), n = b.rows();
    const double* A = a.data();
    const double* B = b.data();
    double* C = out.data();
    for (int i = 0; i < m; ++i) {
        const double* Arow = A + static_cast<std::int64_t>(i) * k;
        double* Crow = C + static_cast<std::int64_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* Brow = B + static_cast<std::int64_t>(j) * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += Arow[p] * Brow[p];
            if (accumulate)
                Crow[j] += acc;
            else
                Crow[j] = acc;
        }
    }
}

void mm_tn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
    const int k = a.rows(), m = a.cols(), n = b.cols();
    const double* A = a.data();
    const double* B = b.data();
    double* C = out.data();
    if (!accumulate)
        for (std::int64_t i = 0; i < out.size(); ++i) C[i] = 0.0;
    for (int p = 0; p < k; ++p) {
        const double* Arow = A + static_cast<std::int64_t>(p) * m;
        const double* Brow = B + static_cast<std::int64_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const double av = Arow[i];
            double* Crow = C + static_cast<std::int64_t>(i) * n;
            for (int j = 0; j < n; ++j) Crow[j] += av * Brow[j];
        }
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul inner extents differ: " + shape_str(a) + " vs " + shape_str(b));
    Tensor out = Tensor::zeros({a.rows(), b.cols()});
    mm_nn(a, b, out, false);
    return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows())
        throw ShapeError("concat row counts differ: " + shape_str(a) + " vs " + shape_str(b));
    const int m = a.rows(), ka = a.cols(), kb = b.cols();
    Tensor out = Tensor::zeros({m, ka + kb});
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < ka; ++j) out.at(i, j) = a.at(i, j);
        for (int j = 0; j < kb; ++j) out.at(i, ka + j) = b.at(i, j);
    }
    return out;
}

} // namespace alilab
