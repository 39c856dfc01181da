#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "survhsic/error.hpp"

namespace survhsic {

enum class KernelTag { distance, min };

/// Distance-induced kernel |x| + |x'| - |x - x'| (without the conventional 1/2).
inline double distance_kernel(double x, double xp) {
    return std::abs(x) + std::abs(xp) - std::abs(x - xp);
}

inline double min_kernel(double a, double b) {
    if (a < 0.0 || b < 0.0) throw DataError("min kernel is defined on nonnegative reals only");
    return a < b ? a : b;
}

inline double evaluate_kernel(KernelTag tag, double a, double b) {
    return tag == KernelTag::distance ? distance_kernel(a, b) : min_kernel(a, b);
}

/// Dense symmetric n x n kernel matrix, row-major.
class GramMatrix {
public:
    GramMatrix() = default;
    GramMatrix(std::size_t n, KernelTag tag) : n_(n), tag_(tag), data_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    KernelTag tag() const { return tag_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
    std::span<const double> data() const { return data_; }

    double sum() const {
        double s = 0.0;
        for (double v : data_) s += v;
        return s;
    }

private:
    std::size_t n_ = 0;
    KernelTag tag_ = KernelTag::distance;
    std::vector<double> data_;
};

inline GramMatrix gram(std::span<const double> values, KernelTag tag) {
    if (values.empty()) throw DataError("gram matrix of an empty sample");
    if (tag == KernelTag::min)
        for (double v : values)
            if (v < 0.0) throw DataError("min kernel is defined on nonnegative reals only");
    const std::size_t n = values.size();
    GramMatrix k(n, tag);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = evaluate_kernel(tag, values[i], values[j]);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

}  // namespace survhsic
