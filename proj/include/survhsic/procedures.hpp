#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "survhsic/baselines.hpp"
#include "survhsic/dataset.hpp"
#include "survhsic/kaplan_meier.hpp"
#include "survhsic/permutation.hpp"
#include "survhsic/random.hpp"
#include "survhsic/statistics.hpp"
#include "survhsic/transport.hpp"

namespace survhsic {

namespace detail {

inline std::vector<double> uniform_weights(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

/// Pooled two-sample data in canonical order with 0/1 group labels.
struct PooledSample {
    std::vector<double> z;
    std::vector<unsigned char> event;
    std::vector<unsigned char> group;
    std::size_t n1 = 0;

    explicit PooledSample(const TwoSampleDataset& d) {
        const auto pooled = d.merged();
        for (const auto& r : pooled) {
            z.push_back(r.z);
            event.push_back(r.event);
            group.push_back(r.x == 1.0);
        }
        n1 = d.n1();
    }
    std::size_t size() const { return z.size(); }
};

/// Signed within-group Kaplan-Meier weights (+ group 0, - group 1) for rows in
/// ascending time order, events before censorings at ties.
inline void signed_group_weights(std::span<const unsigned char> event, std::span<const unsigned char> group,
                                 std::size_t n1, std::span<double> out) {
    const std::size_t n = event.size();
    const std::size_t size[2] = {n - n1, n1};
    std::size_t seen[2] = {0, 0};
    double prod[2] = {1.0, 1.0};
    for (std::size_t i = 0; i < n; ++i) {
        const int g = group[i] ? 1 : 0;
        const double at_risk = static_cast<double>(size[g] - seen[g]);
        ++seen[g];
        double w = 0.0;
        if (event[i]) {
            w = prod[g] / at_risk;
            prod[g] *= (at_risk - 1.0) / at_risk;
        }
        out[i] = g == 0 ? w : -w;
    }
}

}  // namespace detail

/// Transform with optimal transport, then the covariate-permutation HSIC test
/// on the synthetic uncensored data.
inline TestReport opt_hsic_test(const CensoredDataset& d, const PermutationOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = make_stream(mix_seed({options.seed, hash_string("opt-transform")}), 0);
    const auto transformed = opt_transform(d, rng);
    const auto y = transformed.synthetic.covariates();
    const auto t = transformed.synthetic.times();
    const PermutedKernelStatistic statistic(y, t, detail::uniform_weights(d.size()));
    auto report = permutation_test(d.size(), statistic, MethodTag::opt_hsic, options);
    report.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// Kaplan-Meier weighted HSIC; weights and the time-side matrix stay fixed
/// while covariates are permuted. Valid when censoring is independent of X.
inline TestReport whsic_test(const CensoredDataset& d, const PermutationOptions& options) {
    const auto x = d.covariates();
    const auto z = d.times();
    const PermutedKernelStatistic statistic(x, z, km_weights(d));
    return permutation_test(d.size(), statistic, MethodTag::whsic, options);
}

/// HSIC of (x, z) as if nothing were censored.
inline TestReport zhsic_test(const CensoredDataset& d, const PermutationOptions& options) {
    const auto x = d.covariates();
    const auto z = d.times();
    const PermutedKernelStatistic statistic(x, z, detail::uniform_weights(d.size()));
    return permutation_test(d.size(), statistic, MethodTag::zhsic, options);
}

/// Weighted MMD with the min kernel between the two groups; group labels are
/// permuted over the pooled sample and within-group weights recomputed for
/// every labelling.
inline TestReport whsic_two_sample_test(const TwoSampleDataset& d, const PermutationOptions& options) {
    const detail::PooledSample pooled(d);
    auto statistic = [&](std::span<const std::size_t> perm) {
        const std::size_t n = pooled.size();
        std::vector<unsigned char> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = pooled.group[perm[i]];
        std::vector<double> v(n);
        detail::signed_group_weights(pooled.event, labels, pooled.n1, v);
        return min_kernel_quadratic_form_sorted(pooled.z, v);
    };
    return permutation_test(pooled.size(), statistic, MethodTag::whsic_two_sample, options);
}

/// Row of the imputed two-sample data: group label, lifetime and one censoring
/// time per group. Infinite values lie beyond the support of their estimate.
struct ImputedRow {
    int group = 0;
    double t = 0.0;
    double c[2] = {0.0, 0.0};
};

struct ImputedDataset {
    std::vector<ImputedRow> rows;
    double cap = 0.0;  // largest observed time

    /// Censored observation of row i when it is assigned to `group`.
    SurvivalObservation recensor(std::size_t i, int group) const {
        const auto& r = rows[i];
        const double c = r.c[group];
        SurvivalObservation o{std::min(r.t, c), r.t <= c};
        if (o.z == std::numeric_limits<double>::infinity()) o = {cap, false};
        return o;
    }
};

namespace detail {

/// Draw from a Kaplan-Meier law conditioned on exceeding z; +inf when the draw
/// falls in the tail mass or when no mass lies above z.
inline double draw_above(const KmLaw& law, double z, Rng& rng) {
    auto first = std::ranges::upper_bound(law.atoms, z);
    const std::size_t k0 = static_cast<std::size_t>(first - law.atoms.begin());
    double total = law.tail;
    for (std::size_t k = k0; k < law.atoms.size(); ++k) total += law.mass[k];
    if (!(total > 0.0)) return std::numeric_limits<double>::infinity();
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    for (std::size_t k = k0; k < law.atoms.size(); ++k) {
        if (u < law.mass[k]) return law.atoms[k];
        u -= law.mass[k];
    }
    return law.tail > 0.0 ? std::numeric_limits<double>::infinity() : law.atoms.back();
}

}  // namespace detail

/// Imputation step of the ipx permutation scheme. Kaplan-Meier estimates of
/// the censoring law in each group and of the pooled lifetime law supply every
/// unobserved quantity. The row's own lifetime or censoring time is conditioned
/// on exceeding its observed time.
inline ImputedDataset ipx_impute(const TwoSampleDataset& d, Rng& rng) {
    const KmLaw censoring[2] = {km_law(d.group0(), KmTarget::censoring), km_law(d.group1(), KmTarget::censoring)};
    const auto pooled = d.merged();
    std::vector<SurvivalObservation> pooled_obs;
    pooled_obs.reserve(pooled.size());
    for (const auto& r : pooled) pooled_obs.push_back({r.z, r.event});
    const KmLaw lifetime = km_law(pooled_obs, KmTarget::lifetime);

    ImputedDataset out;
    out.rows.reserve(d.size());
    for (int g = 0; g < 2; ++g) {
        for (const auto& o : d.group(g)) {
            ImputedRow row;
            row.group = g;
            if (o.event) {
                row.t = o.z;
                row.c[g] = detail::draw_above(censoring[g], o.z, rng);
            } else {
                row.t = detail::draw_above(lifetime, o.z, rng);
                row.c[g] = o.z;
            }
            // the other group's censoring time is independent of this row
            row.c[1 - g] = detail::draw_above(censoring[1 - g], -std::numeric_limits<double>::infinity(), rng);
            out.rows.push_back(row);
            out.cap = std::max(out.cap, o.z);
        }
    }
    return out;
}

/// Two-sample weighted MMD with the ipx permutation scheme: impute once, then
/// permute group labels over imputed rows and re-censor each row with the
/// censoring time of its new group.
inline TestReport ipx_hsic_test(const TwoSampleDataset& d, const PermutationOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = make_stream(mix_seed({options.seed, hash_string("ipx-impute")}), 0);
    const auto imputed = ipx_impute(d, rng);
    const std::size_t n = imputed.rows.size();
    const std::size_t n1 = d.n1();

    auto statistic = [&](std::span<const std::size_t> perm) {
        struct Entry {
            double z;
            unsigned char event;
            unsigned char group;
        };
        std::vector<Entry> rows(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int g = imputed.rows[perm[i]].group;
            const auto o = imputed.recensor(i, g);
            rows[i] = {o.z, static_cast<unsigned char>(o.event), static_cast<unsigned char>(g)};
        }
        std::ranges::sort(rows, [](const Entry& a, const Entry& b) {
            if (a.z != b.z) return a.z < b.z;
            return a.event > b.event;
        });
        std::vector<double> z(n), v(n);
        std::vector<unsigned char> ev(n), gr(n);
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = rows[i].z;
            ev[i] = rows[i].event;
            gr[i] = rows[i].group;
        }
        detail::signed_group_weights(ev, gr, n1, v);
        return min_kernel_quadratic_form_sorted(z, v);
    };
    auto report = permutation_test(n, statistic, MethodTag::ipx_hsic, options);
    report.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// Group-label permutation test on the logrank chi-square.
inline TestReport logrank_test(const TwoSampleDataset& d, const PermutationOptions& options) {
    const detail::PooledSample pooled(d);
    auto statistic = [&](std::span<const std::size_t> perm) {
        std::vector<unsigned char> labels(pooled.size());
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = pooled.group[perm[i]];
        return detail::logrank_chi2_sorted(pooled.z, pooled.event, labels);
    };
    return permutation_test(pooled.size(), statistic, MethodTag::logrank, options);
}

/// Wald test of the Cox coefficient, chi-square(1) reference, no permutations.
inline TestReport cph_test(const CensoredDataset& d, double alpha = 0.05) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0, 1)");
    const auto start = std::chrono::steady_clock::now();
    const auto fit = cox_fit_score(d);
    TestReport report;
    report.method = MethodTag::cph;
    report.n = d.size();
    report.replicates = 0;
    report.statistic = fit.wald_statistic;
    report.rank = 0;
    report.p_value = std::max(chi2_1_upper_tail(fit.wald_statistic), std::numeric_limits<double>::min());
    report.alpha = alpha;
    report.rejected = report.p_value < alpha;
    report.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

inline bool is_two_sample_method(MethodTag m) {
    return m == MethodTag::whsic_two_sample || m == MethodTag::ipx_hsic || m == MethodTag::logrank;
}

/// Runs `method` on `d`; two-sample methods require a 0/1 covariate.
inline TestReport run_test(MethodTag method, const CensoredDataset& d, const PermutationOptions& options) {
    switch (method) {
        case MethodTag::opt_hsic: return opt_hsic_test(d, options);
        case MethodTag::whsic: return whsic_test(d, options);
        case MethodTag::zhsic: return zhsic_test(d, options);
        case MethodTag::whsic_two_sample: return whsic_two_sample_test(split_binary(d), options);
        case MethodTag::ipx_hsic: return ipx_hsic_test(split_binary(d), options);
        case MethodTag::logrank: return logrank_test(split_binary(d), options);
        case MethodTag::cph: {
            auto r = cph_test(d, options.alpha);
            r.seed = options.seed;
            return r;
        }
    }
    throw DataError("unknown method");
}

}  // namespace survhsic
