#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "survhsic/error.hpp"

namespace survhsic {

/// One right-censored observation: covariate x, observed time z = min(T, C)
/// and the event indicator (true when the lifetime was observed).
struct CensoredRow {
    double x = 0.0;
    double z = 0.0;
    bool event = false;

    friend bool operator==(const CensoredRow&, const CensoredRow&) = default;
};

/// Canonical order: ascending z; at equal z events precede censorings, then
/// ascending x, then original position (the sort is stable).
inline bool canonical_less(const CensoredRow& a, const CensoredRow& b) {
    if (a.z != b.z) return a.z < b.z;
    if (a.event != b.event) return a.event;
    return a.x < b.x;
}

inline std::vector<CensoredRow> canonicalize(std::vector<CensoredRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), canonical_less);
    return rows;
}

/// An immutable, validated and canonically sorted censored sample (n >= 2).
class CensoredDataset {
public:
    CensoredDataset() = default;

    explicit CensoredDataset(std::vector<CensoredRow> rows) : rows_(std::move(rows)) {
        if (rows_.size() < 2)
            throw DataError("dataset needs at least 2 rows, got " + std::to_string(rows_.size()));
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto& r = rows_[i];
            if (!std::isfinite(r.x))
                throw DataError("row " + std::to_string(i + 1) + ": covariate is not finite");
            if (!std::isfinite(r.z) || r.z < 0.0)
                throw DataError("row " + std::to_string(i + 1) + ": observed time must be finite and >= 0");
        }
        rows_ = canonicalize(std::move(rows_));
    }

    std::size_t size() const { return rows_.size(); }
    const CensoredRow& operator[](std::size_t i) const { return rows_[i]; }
    std::span<const CensoredRow> rows() const { return rows_; }
    auto begin() const { return rows_.begin(); }
    auto end() const { return rows_.end(); }

    std::vector<double> covariates() const {
        std::vector<double> out(rows_.size());
        std::ranges::transform(rows_, out.begin(), &CensoredRow::x);
        return out;
    }
    std::vector<double> times() const {
        std::vector<double> out(rows_.size());
        std::ranges::transform(rows_, out.begin(), &CensoredRow::z);
        return out;
    }
    std::size_t event_count() const {
        return static_cast<std::size_t>(std::ranges::count(rows_, true, &CensoredRow::event));
    }

    /// Same (z, event) pairs with covariates replaced position-wise, i.e. the
    /// covariate-permuted dataset {(x'_i, z_i, delta_i)}. Re-canonicalizes.
    CensoredDataset with_covariates(std::span<const double> x) const {
        if (x.size() != rows_.size()) throw DataError("covariate count does not match dataset size");
        auto rows = rows_;
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i].x = x[i];
        return CensoredDataset(std::move(rows));
    }

    friend bool operator==(const CensoredDataset&, const CensoredDataset&) = default;

private:
    std::vector<CensoredRow> rows_;
};

/// Fully observed (covariate, time) pair produced by the transport transform.
struct SyntheticRow {
    double y = 0.0;
    double t = 0.0;

    friend bool operator==(const SyntheticRow&, const SyntheticRow&) = default;
    friend auto operator<=>(const SyntheticRow&, const SyntheticRow&) = default;
};

struct SyntheticDataset {
    std::vector<SyntheticRow> rows;

    std::size_t size() const { return rows.size(); }
    std::vector<double> covariates() const {
        std::vector<double> out(rows.size());
        std::ranges::transform(rows, out.begin(), &SyntheticRow::y);
        return out;
    }
    std::vector<double> times() const {
        std::vector<double> out(rows.size());
        std::ranges::transform(rows, out.begin(), &SyntheticRow::t);
        return out;
    }
};

/// Multiset of covariate values kept sorted; remove() deletes one instance.
class RiskSet {
public:
    RiskSet() = default;
    explicit RiskSet(std::vector<double> values) : values_(std::move(values)) {
        std::ranges::sort(values_);
    }

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Half-open range of sorted positions holding `value`.
    std::pair<std::size_t, std::size_t> equal_range(double value) const {
        auto [lo, hi] = std::ranges::equal_range(values_, value);
        return {static_cast<std::size_t>(lo - values_.begin()),
                static_cast<std::size_t>(hi - values_.begin())};
    }
    std::size_t count(double value) const {
        auto [lo, hi] = equal_range(value);
        return hi - lo;
    }
    bool contains(double value) const { return count(value) > 0; }

    void remove(double value) {
        auto it = std::ranges::lower_bound(values_, value);
        if (it == values_.end() || *it != value) throw DataError("value is not a member of the risk set");
        values_.erase(it);
    }
    void remove_at(std::size_t position) { values_.erase(values_.begin() + static_cast<std::ptrdiff_t>(position)); }

private:
    std::vector<double> values_;
};

/// (time, event) pair of a single group in a two-sample problem.
struct SurvivalObservation {
    double z = 0.0;
    bool event = false;

    friend bool operator==(const SurvivalObservation&, const SurvivalObservation&) = default;
};

/// Censored sample split by a binary covariate. Each group is sorted by z with
/// events first at ties.
class TwoSampleDataset {
public:
    TwoSampleDataset() = default;
    TwoSampleDataset(std::vector<SurvivalObservation> group0, std::vector<SurvivalObservation> group1)
        : groups_{std::move(group0), std::move(group1)} {
        for (int g = 0; g < 2; ++g) {
            if (groups_[g].empty()) throw DataError("group" + std::to_string(g) + " is empty");
            for (const auto& o : groups_[g])
                if (!std::isfinite(o.z) || o.z < 0.0)
                    throw DataError("observed time must be finite and >= 0");
            std::ranges::stable_sort(groups_[g], [](const SurvivalObservation& a, const SurvivalObservation& b) {
                if (a.z != b.z) return a.z < b.z;
                return a.event && !b.event;
            });
        }
    }

    std::span<const SurvivalObservation> group(int g) const {
        if (g != 0 && g != 1) throw DataError("group index must be 0 or 1");
        return groups_[g];
    }
    std::span<const SurvivalObservation> group0() const { return groups_[0]; }
    std::span<const SurvivalObservation> group1() const { return groups_[1]; }
    std::size_t n0() const { return groups_[0].size(); }
    std::size_t n1() const { return groups_[1].size(); }
    std::size_t size() const { return n0() + n1(); }

    /// Pooled dataset with covariate 0/1 marking the group.
    CensoredDataset merged() const {
        std::vector<CensoredRow> rows;
        rows.reserve(size());
        for (int g = 0; g < 2; ++g)
            for (const auto& o : groups_[g]) rows.push_back({static_cast<double>(g), o.z, o.event});
        return CensoredDataset(std::move(rows));
    }

    friend bool operator==(const TwoSampleDataset&, const TwoSampleDataset&) = default;

private:
    std::vector<SurvivalObservation> groups_[2];
};

inline TwoSampleDataset split_binary(const CensoredDataset& d) {
    std::vector<SurvivalObservation> g0, g1;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& r = d[i];
        if (r.x == 0.0)
            g0.push_back({r.z, r.event});
        else if (r.x == 1.0)
            g1.push_back({r.z, r.event});
        else
            throw DataError("row " + std::to_string(i + 1) + ": covariate is not binary (expected 0 or 1)");
    }
    if (g0.empty()) throw DataError("group0 is empty");
    if (g1.empty()) throw DataError("group1 is empty");
    return TwoSampleDataset(std::move(g0), std::move(g1));
}

}  // namespace survhsic
