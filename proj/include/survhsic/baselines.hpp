#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "survhsic/dataset.hpp"
#include "survhsic/error.hpp"
#include "survhsic/statistics.hpp"

namespace survhsic {

namespace detail {

/// Logrank chi-square on a pooled sample sorted by ascending z. Deaths at a
/// tied time are pooled.
inline double logrank_chi2_sorted(std::span<const double> z, std::span<const unsigned char> event,
                                  std::span<const unsigned char> group) {
    const std::size_t n = z.size();
    std::size_t at_risk = n;
    std::size_t at_risk1 = static_cast<std::size_t>(std::count(group.begin(), group.end(), 1));
    double o_minus_e = 0.0, variance = 0.0;
    bool any_event = false;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i, d = 0, d1 = 0, leaving1 = 0;
        while (j < n && z[j] == z[i]) {
            if (event[j]) {
                ++d;
                if (group[j]) ++d1;
            }
            if (group[j]) ++leaving1;
            ++j;
        }
        if (d > 0) {
            any_event = true;
            const double r = static_cast<double>(at_risk);
            const double r1 = static_cast<double>(at_risk1);
            const double dd = static_cast<double>(d);
            o_minus_e += static_cast<double>(d1) - dd * r1 / r;
            if (at_risk > 1) variance += dd * (r1 / r) * (1.0 - r1 / r) * (r - dd) / (r - 1.0);
        }
        at_risk -= j - i;
        at_risk1 -= leaving1;
        i = j;
    }
    if (!any_event) throw DegenerateError("logrank needs at least one observed event");
    if (!(variance > 0.0)) throw DegenerateError("logrank variance is zero; statistic undefined");
    return o_minus_e * o_minus_e / variance;
}

}  // namespace detail

/// Classical two-sample logrank chi-square statistic (group 1 observed minus
/// expected, squared, over the hypergeometric variance).
inline StatisticValue logrank(const TwoSampleDataset& d) {
    const auto pooled = d.merged();
    std::vector<double> z(pooled.size());
    std::vector<unsigned char> ev(pooled.size()), g(pooled.size());
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        z[i] = pooled[i].z;
        ev[i] = pooled[i].event;
        g[i] = pooled[i].x == 1.0;
    }
    return {detail::logrank_chi2_sorted(z, ev, g), StatisticKind::logrank, d.size()};
}

struct CoxOptions {
    int max_iterations = 50;
    double gradient_tolerance = 1e-10;
};

struct CoxFit {
    double beta = 0.0;
    double standard_error = 0.0;
    double wald_statistic = 0.0;
    double score_statistic = 0.0;  // U(0)^2 / I(0)
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Upper tail of the chi-square distribution with one degree of freedom.
inline double chi2_1_upper_tail(double statistic) {
    return std::erfc(std::sqrt(std::max(0.0, statistic) / 2.0));
}

namespace detail {

struct CoxEvaluation {
    double log_likelihood = 0.0;
    double gradient = 0.0;
    double information = 0.0;
};

/// Breslow partial likelihood of a single centred covariate. Rows are in
/// canonical order; risk sets {j : z_j >= t} are accumulated from the end with
/// a running log-scale so that large |beta x| neither overflows nor underflows.
class CoxPartialLikelihood {
public:
    explicit CoxPartialLikelihood(const CensoredDataset& d) : z_(d.times()), x_(d.covariates()) {
        events_.resize(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) events_[i] = d[i].event;
        const double mean = std::accumulate(x_.begin(), x_.end(), 0.0) / static_cast<double>(x_.size());
        for (double& v : x_) v -= mean;
    }

    CoxEvaluation operator()(double beta) const {
        CoxEvaluation out;
        double scale = -std::numeric_limits<double>::infinity();
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        const std::size_t n = z_.size();
        for (std::size_t end = n; end > 0;) {
            std::size_t begin = end;
            while (begin > 0 && z_[begin - 1] == z_[end - 1]) --begin;
            double event_x = 0.0;
            std::size_t d = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const double e = beta * x_[i];
                if (e > scale) {
                    const double f = std::exp(scale - e);
                    s0 *= f;
                    s1 *= f;
                    s2 *= f;
                    scale = e;
                }
                const double a = std::exp(e - scale);
                s0 += a;
                s1 += a * x_[i];
                s2 += a * x_[i] * x_[i];
                if (events_[i]) {
                    event_x += x_[i];
                    ++d;
                }
            }
            if (d > 0) {
                const double dd = static_cast<double>(d);
                const double mean = s1 / s0;
                out.log_likelihood += beta * event_x - dd * (std::log(s0) + scale);
                out.gradient += event_x - dd * mean;
                out.information += dd * std::max(0.0, s2 / s0 - mean * mean);
            }
            end = begin;
        }
        return out;
    }

    /// +1 if the likelihood increases without bound in beta, -1 if it does so
    /// as beta -> -inf, 0 otherwise. Happens when every event time's failures
    /// sit at the maximum (minimum) covariate of their risk set.
    int monotone_direction() const {
        bool at_max = true, at_min = true;
        double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
        const std::size_t n = z_.size();
        for (std::size_t end = n; end > 0;) {
            std::size_t begin = end;
            while (begin > 0 && z_[begin - 1] == z_[end - 1]) --begin;
            for (std::size_t i = begin; i < end; ++i) {
                hi = std::max(hi, x_[i]);
                lo = std::min(lo, x_[i]);
            }
            for (std::size_t i = begin; i < end; ++i) {
                if (!events_[i]) continue;
                if (x_[i] < hi) at_max = false;
                if (x_[i] > lo) at_min = false;
            }
            end = begin;
        }
        if (at_max) return 1;
        if (at_min) return -1;
        return 0;
    }

private:
    std::vector<double> z_;
    std::vector<double> x_;
    std::vector<bool> events_;
};

}  // namespace detail

/// Newton-Raphson fit of the single-covariate Cox model (Breslow ties), with
/// step halving. Throws DegenerateError for constant covariates, data without
/// events and monotone likelihoods; ConvergenceError when iterations run out.
inline CoxFit cox_fit_score(const CensoredDataset& d, const CoxOptions& options = {}) {
    if (d.event_count() == 0) throw DegenerateError("no observed events");
    const auto x = d.covariates();
    if (std::ranges::all_of(x, [&](double v) { return v == x.front(); }))
        throw DegenerateError("degenerate covariate: constant across all rows");

    const detail::CoxPartialLikelihood likelihood(d);
    const auto at_zero = likelihood(0.0);
    if (!(at_zero.information > 0.0))
        throw DegenerateError("degenerate covariate: constant within every risk set");
    if (likelihood.monotone_direction() != 0)
        throw DegenerateError("monotone likelihood: covariate perfectly separates event order");

    CoxFit fit;
    fit.score_statistic = at_zero.gradient * at_zero.gradient / at_zero.information;

    double beta = 0.0;
    auto current = at_zero;
    for (int it = 0; it <= options.max_iterations; ++it) {
        fit.iterations = it;
        if (std::abs(current.gradient) < options.gradient_tolerance) {
            fit.converged = true;
            break;
        }
        if (it == options.max_iterations) break;
        if (!(current.information > 0.0)) break;
        double step = current.gradient / current.information;
        auto next = likelihood(beta + step);
        // halve only on a real decrease; near the optimum the change is below rounding
        const double slack = 1e-12 * (1.0 + std::abs(current.log_likelihood));
        for (int halving = 0; halving < 40 && !(next.log_likelihood >= current.log_likelihood - slack); ++halving) {
            step /= 2.0;
            next = likelihood(beta + step);
        }
        if (beta + step == beta) {
            // no representable progress; accept if the gradient is at noise level
            fit.converged = std::abs(current.gradient) < 1e3 * options.gradient_tolerance;
            break;
        }
        beta += step;
        current = next;
    }
    if (!fit.converged)
        throw ConvergenceError("Cox model did not converge in " + std::to_string(options.max_iterations) +
                               " iterations");

    fit.beta = beta;
    fit.log_likelihood = current.log_likelihood;
    fit.standard_error = 1.0 / std::sqrt(current.information);
    fit.wald_statistic = beta * beta * current.information;
    return fit;
}

}  // namespace survhsic
