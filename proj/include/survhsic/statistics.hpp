#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "survhsic/dataset.hpp"
#include "survhsic/error.hpp"
#include "survhsic/kaplan_meier.hpp"
#include "survhsic/kernels.hpp"

namespace survhsic {

enum class StatisticKind { hsic, whsic, zhsic, wmmd, logrank, cox_wald };

inline const char* to_string(StatisticKind k) {
    switch (k) {
        case StatisticKind::hsic: return "HSIC";
        case StatisticKind::whsic: return "WHSIC";
        case StatisticKind::zhsic: return "ZHSIC";
        case StatisticKind::wmmd: return "WMMD";
        case StatisticKind::logrank: return "LOGRANK";
        case StatisticKind::cox_wald: return "COX-WALD";
    }
    return "?";
}

struct StatisticValue {
    double value = 0.0;
    StatisticKind kind = StatisticKind::hsic;
    std::size_t n = 0;
};

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b) {
    if (a != b)
        throw DataError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace detail

/// Biased HSIC with the distance-induced kernel on both coordinates (equal to
/// distance covariance). The triple-sum term is evaluated through row sums.
inline StatisticValue hsic_biased(std::span<const double> x, std::span<const double> y) {
    detail::require_same_length(x.size(), y.size());
    const std::size_t n = x.size();
    if (n < 2) throw DataError("HSIC needs at least 2 observations");

    std::vector<double> row_k(n, 0.0), row_l(n, 0.0);
    double sum_kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double kii = distance_kernel(x[i], x[i]);
        const double lii = distance_kernel(y[i], y[i]);
        sum_kl += kii * lii;
        row_k[i] += kii;
        row_l[i] += lii;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = distance_kernel(x[i], x[j]);
            const double l = distance_kernel(y[i], y[j]);
            sum_kl += 2.0 * k * l;
            row_k[i] += k;
            row_k[j] += k;
            row_l[i] += l;
            row_l[j] += l;
        }
    }
    double sum_k = 0.0, sum_l = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_k += row_k[i];
        sum_l += row_l[i];
        cross += row_k[i] * row_l[i];
    }
    const double nn = static_cast<double>(n);
    const double n2 = nn * nn;
    const double value = sum_kl / n2 + (sum_k / n2) * (sum_l / n2) - 2.0 * cross / (n2 * nn);
    return {value, StatisticKind::hsic, n};
}

/// HSIC of (covariate, observed time), ignoring the indicators.
inline StatisticValue zhsic(std::span<const double> x, std::span<const double> z) {
    auto s = hsic_biased(x, z);
    s.kind = StatisticKind::zhsic;
    return s;
}

inline StatisticValue zhsic(const CensoredDataset& d) {
    const auto x = d.covariates();
    const auto z = d.times();
    return zhsic(x, z);
}

/// Weighted HSIC tr(H_w K H_w L) with H_w = diag(w) - w w^T. Both products
/// H_w K and H_w L are formed in O(n^2) as diagonal plus rank one.
inline StatisticValue whsic(std::span<const double> x, std::span<const double> z, std::span<const double> w) {
    detail::require_same_length(x.size(), z.size());
    detail::require_same_length(x.size(), w.size());
    const std::size_t n = x.size();
    const auto k = gram(x, KernelTag::distance);
    const auto l = gram(z, KernelTag::distance);

    // m_j = sum_r w_r K_rj, p_j = sum_r w_r L_rj
    std::vector<double> m(n, 0.0), p(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        if (w[r] == 0.0) continue;
        const auto kr = k.row(r);
        const auto lr = l.row(r);
        for (std::size_t j = 0; j < n; ++j) {
            m[j] += w[r] * kr[j];
            p[j] += w[r] * lr[j];
        }
    }
    // (H_w K)_ij = w_i (K_ij - m_j);  (H_w L)_ji = w_j (L_ji - p_i)
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] == 0.0) continue;
        const auto ki = k.row(i);
        const auto li = l.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += w[j] * (ki[j] - m[j]) * (li[j] - p[i]);
        value += w[i] * acc;
    }
    return {value, StatisticKind::whsic, n};
}

inline StatisticValue whsic(const CensoredDataset& d, std::span<const double> w) {
    const auto x = d.covariates();
    const auto z = d.times();
    return whsic(x, z, w);
}

/// sum_ij v_i v_j min(z_i, z_j) for ascending nonnegative z, via
/// min(a, b) = integral over t >= 0 of 1{a > t} 1{b > t}.
inline double min_kernel_quadratic_form_sorted(std::span<const double> z, std::span<const double> v) {
    detail::require_same_length(z.size(), v.size());
    const std::size_t n = z.size();
    double tail = 0.0, value = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        tail += v[k];
        const double below = k == 0 ? 0.0 : z[k - 1];
        value += (z[k] - below) * tail * tail;
    }
    return value;
}

inline double min_kernel_quadratic_form(std::span<const double> z, std::span<const double> v) {
    detail::require_same_length(z.size(), v.size());
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::sort(order, {}, [&](std::size_t i) { return z[i]; });
    std::vector<double> zs(z.size()), vs(z.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        zs[i] = z[order[i]];
        vs[i] = v[order[i]];
        if (zs[i] < 0.0) throw DataError("min kernel is defined on nonnegative reals only");
    }
    return min_kernel_quadratic_form_sorted(zs, vs);
}

/// || sum_i w0_i k(z0_i, .) - sum_j w1_j k(z1_j, .) ||^2 with k(a, b) = min(a, b).
inline StatisticValue wmmd_two_sample(const TwoSampleDataset& d, std::span<const double> w0,
                                      std::span<const double> w1) {
    detail::require_same_length(d.n0(), w0.size());
    detail::require_same_length(d.n1(), w1.size());
    std::vector<double> z, v;
    z.reserve(d.size());
    v.reserve(d.size());
    for (std::size_t i = 0; i < d.n0(); ++i) {
        z.push_back(d.group0()[i].z);
        v.push_back(w0[i]);
    }
    for (std::size_t i = 0; i < d.n1(); ++i) {
        z.push_back(d.group1()[i].z);
        v.push_back(-w1[i]);
    }
    return {min_kernel_quadratic_form(z, v), StatisticKind::wmmd, d.size()};
}

inline StatisticValue wmmd_two_sample(const TwoSampleDataset& d) {
    const auto [w0, w1] = km_weights_within_groups(d);
    return wmmd_two_sample(d, w0, w1);
}

/// sum_ij K_{pi(i) pi(j)} M_ij where K is the covariate Gram matrix and
/// M = H_w L H_w is fixed under covariate permutations. Evaluating this for a
/// permutation pi gives the (weighted) HSIC of {(x_pi(i), z_i)}.
class PermutedKernelStatistic {
public:
    PermutedKernelStatistic(std::span<const double> x, std::span<const double> z, std::span<const double> w)
        : k_(gram(x, KernelTag::distance)), m_(x.size() * x.size(), 0.0) {
        detail::require_same_length(x.size(), z.size());
        detail::require_same_length(x.size(), w.size());
        const std::size_t n = x.size();
        const auto l = gram(z, KernelTag::distance);
        // M_ij = w_i w_j (L_ij - q_i - q_j + s),  q = L w,  s = w^T L w
        std::vector<double> q(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto li = l.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += li[j] * w[j];
            q[i] = acc;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * q[i];
        // Centred entries below the rounding bound are zero, so a constant time
        // side gives exactly tied statistics instead of rounding noise.
        double l_max = 0.0, w_sum = 0.0;
        for (double v : l.data()) l_max = std::max(l_max, std::abs(v));
        for (double v : w) w_sum += std::abs(v);
        const double tol = 16.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * l_max *
                           std::max(1.0, w_sum * w_sum);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double c = l(i, j) - q[i] - q[j] + s;
                m_[i * n + j] = std::abs(c) <= tol ? 0.0 : w[i] * w[j] * c;
            }
    }

    std::size_t size() const { return k_.size(); }

    double operator()(std::span<const std::size_t> perm) const {
        const std::size_t n = k_.size();
        const double* kd = k_.data().data();
        double diag = 0.0, off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* krow = kd + perm[i] * n;
            const double* mrow = m_.data() + i * n;
            diag += krow[perm[i]] * mrow[i];
            double acc = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) acc += krow[perm[j]] * mrow[j];
            off += acc;
        }
        return diag + 2.0 * off;
    }

private:
    GramMatrix k_;
    std::vector<double> m_;
};

}  // namespace survhsic
