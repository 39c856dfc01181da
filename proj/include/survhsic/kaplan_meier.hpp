#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "survhsic/dataset.hpp"

namespace survhsic {

/// Kaplan-Meier weights aligned to canonical row order.
using WeightVector = std::vector<double>;

enum class KmTarget { lifetime, censoring };

struct SurvivalStep {
    double time = 0.0;
    double survival = 1.0;
};

/// Right-continuous step function with one step per canonical row.
class SurvivalCurve {
public:
    SurvivalCurve() = default;
    explicit SurvivalCurve(std::vector<SurvivalStep> steps) : steps_(std::move(steps)) {}

    std::span<const SurvivalStep> steps() const { return steps_; }

    /// Product over all rows with z <= t.
    double operator()(double t) const {
        auto it = std::ranges::upper_bound(steps_, t, {}, &SurvivalStep::time);
        return it == steps_.begin() ? 1.0 : std::prev(it)->survival;
    }

    /// Product over all rows with z < t.
    double left_limit(double t) const {
        auto it = std::ranges::lower_bound(steps_, t, {}, &SurvivalStep::time);
        return it == steps_.begin() ? 1.0 : std::prev(it)->survival;
    }

private:
    std::vector<SurvivalStep> steps_;
};

namespace detail {

template <class Flags>
std::vector<double> km_products(const Flags& events) {
    const std::size_t n = std::size(events);
    std::vector<double> s(n);
    double prod = 1.0;
    std::size_t k = 0;
    for (bool e : events) {
        ++k;
        if (e) prod *= static_cast<double>(n - k) / static_cast<double>(n - k + 1);
        s[k - 1] = prod;
    }
    return s;
}

/// w_k = prod_{i<k} ((n-i)/(n-i+1))^{e_i} * (1/(n-k+1))^{e_k}, zero for censored rows.
template <class Flags>
WeightVector km_weights_from_flags(const Flags& events) {
    const std::size_t n = std::size(events);
    WeightVector w(n, 0.0);
    double prod = 1.0;
    std::size_t k = 0;
    for (bool e : events) {
        ++k;
        if (e) {
            const double at_risk = static_cast<double>(n - k + 1);
            w[k - 1] = prod / at_risk;
            prod *= (at_risk - 1.0) / at_risk;
        }
    }
    return w;
}

}  // namespace detail

inline SurvivalCurve km_survival(const CensoredDataset& d, KmTarget target = KmTarget::lifetime) {
    std::vector<bool> flags(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        flags[i] = target == KmTarget::lifetime ? d[i].event : !d[i].event;
    const auto s = detail::km_products(flags);
    std::vector<SurvivalStep> steps(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) steps[i] = {d[i].z, s[i]};
    return SurvivalCurve(std::move(steps));
}

inline WeightVector km_weights(const CensoredDataset& d) {
    std::vector<bool> flags(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) flags[i] = d[i].event;
    return detail::km_weights_from_flags(flags);
}

inline WeightVector km_weights(std::span<const SurvivalObservation> group) {
    std::vector<bool> flags(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) flags[i] = group[i].event;
    return detail::km_weights_from_flags(flags);
}

inline std::pair<WeightVector, WeightVector> km_weights_within_groups(const TwoSampleDataset& d) {
    return {km_weights(d.group0()), km_weights(d.group1())};
}

/// Kaplan-Meier estimate as a discrete law: atoms at the distinct times where
/// the curve drops, and the mass left beyond the last observation.
struct KmLaw {
    std::vector<double> atoms;
    std::vector<double> mass;
    double tail = 0.0;
};

/// Estimates the law of the lifetime or of the censoring time from one sample.
inline KmLaw km_law(std::span<const SurvivalObservation> obs, KmTarget target) {
    std::vector<bool> flags(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i)
        flags[i] = target == KmTarget::lifetime ? obs[i].event : !obs[i].event;
    // Ties of censoring "events" with lifetimes: re-order so flagged rows come first.
    std::vector<std::size_t> order(obs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
        if (obs[a].z != obs[b].z) return obs[a].z < obs[b].z;
        return flags[a] && !flags[b];
    });
    std::vector<bool> sorted_flags(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted_flags[i] = flags[order[i]];
    const auto w = detail::km_weights_from_flags(sorted_flags);

    KmLaw law;
    double total = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (w[i] <= 0.0) continue;
        const double t = obs[order[i]].z;
        if (!law.atoms.empty() && law.atoms.back() == t)
            law.mass.back() += w[i];
        else {
            law.atoms.push_back(t);
            law.mass.push_back(w[i]);
        }
        total += w[i];
    }
    law.tail = 1.0 - total > 1e-12 ? 1.0 - total : 0.0;
    return law;
}

}  // namespace survhsic
