#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "survhsic/dataset.hpp"
#include "survhsic/error.hpp"
#include "survhsic/random.hpp"

namespace survhsic {

struct CouplingEntry {
    std::size_t source = 0;  // sorted source slot
    std::size_t target = 0;  // sorted target slot
    std::uint64_t mass = 0;  // in units of 1/denominator
};

/// Discrete joint distribution between two multisets of reals. Masses are
/// exact integers over a common denominator; entries are ordered by
/// (source, target).
class Coupling {
public:
    Coupling(std::vector<double> source, std::vector<double> target, std::vector<CouplingEntry> entries,
             std::uint64_t denominator)
        : source_(std::move(source)), target_(std::move(target)), entries_(std::move(entries)),
          denominator_(denominator) {
        std::ranges::sort(entries_, [](const CouplingEntry& a, const CouplingEntry& b) {
            return a.source != b.source ? a.source < b.source : a.target < b.target;
        });
    }

    std::span<const double> source() const { return source_; }
    std::span<const double> target() const { return target_; }
    std::span<const CouplingEntry> entries() const { return entries_; }
    std::uint64_t denominator() const { return denominator_; }

    double mass(const CouplingEntry& e) const {
        return static_cast<double>(e.mass) / static_cast<double>(denominator_);
    }

    /// Dense source x target mass matrix.
    std::vector<std::vector<double>> matrix() const {
        std::vector<std::vector<double>> m(source_.size(), std::vector<double>(target_.size(), 0.0));
        for (const auto& e : entries_) m[e.source][e.target] += mass(e);
        return m;
    }

    std::vector<std::uint64_t> row_units() const {
        std::vector<std::uint64_t> r(source_.size(), 0);
        for (const auto& e : entries_) r[e.source] += e.mass;
        return r;
    }
    std::vector<std::uint64_t> column_units() const {
        std::vector<std::uint64_t> c(target_.size(), 0);
        for (const auto& e : entries_) c[e.target] += e.mass;
        return c;
    }

    /// Expected |Y - X| under the coupling.
    double cost() const {
        double c = 0.0;
        for (const auto& e : entries_) c += mass(e) * std::abs(source_[e.source] - target_[e.target]);
        return c;
    }

private:
    std::vector<double> source_;
    std::vector<double> target_;
    std::vector<CouplingEntry> entries_;
    std::uint64_t denominator_;
};

/// Optimal coupling of the uniform distributions on two multisets for the cost
/// |y - x|: sort both and pair mass monotonically (north-west corner). Source
/// atoms carry |target| units and target atoms |source| units, so the sets may
/// differ in size.
inline Coupling monotone_coupling(const RiskSet& source, const RiskSet& target) {
    if (source.empty() || target.empty()) throw DataError("coupling between empty sets");
    const std::size_t a = source.size();
    const std::size_t l = target.size();
    std::vector<CouplingEntry> entries;
    entries.reserve(a + l - 1);
    std::size_t i = 0, j = 0;
    std::uint64_t row_left = l, col_left = a;
    while (i < a && j < l) {
        const std::uint64_t m = std::min(row_left, col_left);
        entries.push_back({i, j, m});
        row_left -= m;
        col_left -= m;
        if (row_left == 0) {
            ++i;
            row_left = l;
        }
        if (col_left == 0) {
            ++j;
            col_left = a;
        }
    }
    return Coupling({source.values().begin(), source.values().end()},
                    {target.values().begin(), target.values().end()}, std::move(entries),
                    static_cast<std::uint64_t>(a) * l);
}

/// Independent coupling: every pair gets mass 1/(|source| |target|).
inline Coupling product_coupling(const RiskSet& source, const RiskSet& target) {
    if (source.empty() || target.empty()) throw DataError("coupling between empty sets");
    std::vector<CouplingEntry> entries;
    entries.reserve(source.size() * target.size());
    for (std::size_t i = 0; i < source.size(); ++i)
        for (std::size_t j = 0; j < target.size(); ++j) entries.push_back({i, j, 1});
    return Coupling({source.values().begin(), source.values().end()},
                    {target.values().begin(), target.values().end()}, std::move(entries),
                    static_cast<std::uint64_t>(source.size()) * target.size());
}

/// Draws Y | X = x. All source slots holding the value x are pooled, so the
/// conditional is that of the coupling viewed as a law on values. One uniform
/// integer draw per call.
inline double sample_conditional(const Coupling& c, double x, Rng& rng) {
    const auto src = c.source();
    const auto [lo_it, hi_it] = std::ranges::equal_range(src, x);
    if (lo_it == hi_it) throw DataError("value is not in the source support of the coupling");
    const std::size_t lo = static_cast<std::size_t>(lo_it - src.begin());
    const std::size_t hi = static_cast<std::size_t>(hi_it - src.begin());

    const auto entries = c.entries();
    auto first = std::ranges::lower_bound(entries, lo, {}, &CouplingEntry::source);
    auto last = std::ranges::lower_bound(entries, hi, {}, &CouplingEntry::source);
    std::uint64_t total = 0;
    for (auto it = first; it != last; ++it) total += it->mass;
    if (total == 0) throw DataError("conditional distribution has no mass");

    std::uint64_t r = uniform_below(rng, total);
    for (auto it = first; it != last; ++it) {
        if (r < it->mass) return c.target()[it->target];
        r -= it->mass;
    }
    return c.target()[std::prev(last)->target];
}

/// Same draw as sample_conditional(monotone_coupling(source, target), x, rng)
/// without building the coupling: the rows of x cover units [lo*l, hi*l) of the
/// mass line and target slot j covers [j*a, (j+1)*a). Returns the target slot.
inline std::size_t sample_monotone_conditional(const RiskSet& source, const RiskSet& target, double x, Rng& rng) {
    const auto [lo, hi] = source.equal_range(x);
    if (lo == hi) throw DataError("value is not in the source support of the coupling");
    if (target.empty()) throw DataError("coupling between empty sets");
    const std::uint64_t a = source.size();
    const std::uint64_t l = target.size();
    const std::uint64_t r = uniform_below(rng, (hi - lo) * l);
    return static_cast<std::size_t>((lo * l + r) / a);
}

struct TransformStep {
    double z = 0.0;            // observed event time
    double x = 0.0;            // covariate of the failing individual
    double y = 0.0;            // synthetic covariate assigned to z
    std::size_t risk_size = 0;  // |AR| when the coupling is built
    std::size_t pool_size = 0;  // |L| when the coupling is built
};

struct TransformTrace {
    std::vector<TransformStep> steps;
};

struct TransformResult {
    SyntheticDataset synthetic;
    TransformTrace trace;
};

/// Optimal-transport transformation of a censored dataset into an uncensored
/// synthetic one. Walks the rows in time order keeping the risk set AR and the
/// pool L of covariates not yet given a synthetic time. At each event the
/// covariate y ~ Y | X = x_i of the monotone coupling between uniform(AR) and
/// uniform(L) is assigned time z_i and removed from L; every row leaves AR after
/// its turn. Covariates left in L receive the last observed time.
inline TransformResult opt_transform(const CensoredDataset& d, Rng& rng) {
    RiskSet at_risk(d.covariates());
    RiskSet pool(d.covariates());
    TransformResult out;
    out.synthetic.rows.reserve(d.size());
    for (const auto& row : d) {
        if (row.event) {
            const std::size_t slot = sample_monotone_conditional(at_risk, pool, row.x, rng);
            const double y = pool[slot];
            out.trace.steps.push_back({row.z, row.x, y, at_risk.size(), pool.size()});
            out.synthetic.rows.push_back({y, row.z});
            pool.remove_at(slot);
        }
        at_risk.remove(row.x);
    }
    const double z_last = d[d.size() - 1].z;
    for (double y : pool.values()) out.synthetic.rows.push_back({y, z_last});
    return out;
}

}  // namespace survhsic
