#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "survhsic/error.hpp"
#include "survhsic/random.hpp"

namespace survhsic {

enum class MethodTag { opt_hsic, whsic, zhsic, whsic_two_sample, ipx_hsic, logrank, cph };

inline constexpr MethodTag all_methods[] = {MethodTag::opt_hsic,         MethodTag::whsic,    MethodTag::zhsic,
                                             MethodTag::whsic_two_sample, MethodTag::ipx_hsic, MethodTag::logrank,
                                             MethodTag::cph};

inline std::string_view to_string(MethodTag m) {
    switch (m) {
        case MethodTag::opt_hsic: return "OPT-HSIC";
        case MethodTag::whsic: return "WHSIC";
        case MethodTag::zhsic: return "ZHSIC";
        case MethodTag::whsic_two_sample: return "WHSIC-2S";
        case MethodTag::ipx_hsic: return "IPX-HSIC";
        case MethodTag::logrank: return "LOGRANK";
        case MethodTag::cph: return "CPH";
    }
    return "?";
}

inline std::optional<MethodTag> parse_method(std::string_view s) {
    for (auto m : all_methods)
        if (to_string(m) == s) return m;
    return std::nullopt;
}

/// Outcome of one test. For permutation tests p = (B + 2 - R) / (B + 1).
struct TestReport {
    MethodTag method = MethodTag::opt_hsic;
    std::size_t n = 0;
    std::size_t replicates = 0;  // B; zero for the asymptotic CPH test
    double statistic = 0.0;
    std::size_t rank = 0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool rejected = false;
    std::uint64_t seed = 0;
    double runtime_ms = 0.0;
};

struct PermutationOptions {
    std::size_t replicates = 1999;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

class PermutationError : public std::runtime_error {
public:
    PermutationError(std::size_t replicate, const std::string& what)
        : std::runtime_error("permutation replicate " + std::to_string(replicate) + ": " + what),
          replicate_(replicate) {}
    std::size_t replicate() const { return replicate_; }

private:
    std::size_t replicate_;
};

/// Ascending rank (1-based) of values[index]; entries equal to it are put in
/// uniformly random order, so the rank is uniform over the tied block.
inline std::size_t rank_with_random_ties(std::span<const double> values, std::size_t index, Rng& rng) {
    if (index >= values.size()) throw DataError("rank index out of range");
    const double v = values[index];
    std::size_t below = 0, ties = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i == index) continue;
        if (values[i] < v)
            ++below;
        else if (values[i] == v)
            ++ties;
    }
    return 1 + below + static_cast<std::size_t>(uniform_below(rng, ties + 1));
}

/// floor(alpha (B + 1)), guarded against representation error in alpha.
inline std::size_t rejection_count(std::size_t replicates, double alpha) {
    return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(replicates + 1) + 1e-9));
}

/// R >= (1 - alpha)(B + 1) + 1, evaluated in integers.
inline bool permutation_rejects(std::size_t rank, std::size_t replicates, double alpha) {
    return replicates + 2 - rank <= rejection_count(replicates, alpha);
}

inline double permutation_p_value(std::size_t rank, std::size_t replicates) {
    return static_cast<double>(replicates + 2 - rank) / static_cast<double>(replicates + 1);
}

/// Uniform permutation of {0, ..., n-1} by Fisher-Yates.
inline void random_permutation(std::span<std::size_t> perm, Rng& rng) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
}

/// Monte-Carlo permutation test. `statistic(perm)` evaluates the statistic on
/// the dataset permuted by `perm` (identity for the observed data) and must be
/// safe to call concurrently. Replicate b draws its permutation from stream b of
/// the seed and stream 0 breaks rank ties, so the report does not depend on the
/// thread count.
template <class Statistic>
TestReport permutation_test(std::size_t n, const Statistic& statistic, MethodTag method,
                            const PermutationOptions& options) {
    if (options.replicates < 1) throw DataError("permutation test needs B >= 1");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw DataError("alpha must lie in (0, 1)");
    const auto start = std::chrono::steady_clock::now();

    const std::size_t B = options.replicates;
    std::vector<double> values(B + 1);
    {
        std::vector<std::size_t> identity(n);
        std::iota(identity.begin(), identity.end(), std::size_t{0});
        try {
            values[0] = statistic(std::span<const std::size_t>(identity));
        } catch (const std::exception& e) {
            throw PermutationError(0, e.what());
        }
    }

    auto run_range = [&](std::size_t first, std::size_t last, std::exception_ptr& error, std::size_t& failed) {
        std::vector<std::size_t> perm(n);
        for (std::size_t b = first; b < last; ++b) {
            try {
                Rng rng = make_stream(options.seed, b);
                random_permutation(perm, rng);
                values[b] = statistic(std::span<const std::size_t>(perm));
            } catch (...) {
                error = std::current_exception();
                failed = b;
                return;
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(B)));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::size_t> failed(workers, 0);
    if (workers == 1) {
        run_range(1, B + 1, errors[0], failed[0]);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (B + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t first = 1 + w * chunk;
            const std::size_t last = std::min(B + 1, first + chunk);
            if (first >= last) break;
            pool.emplace_back([&, w, first, last] { run_range(first, last, errors[w], failed[w]); });
        }
    }
    for (unsigned w = 0; w < workers; ++w) {
        if (!errors[w]) continue;
        try {
            std::rethrow_exception(errors[w]);
        } catch (const std::exception& e) {
            throw PermutationError(failed[w], e.what());
        }
    }

    Rng tie_rng = make_stream(options.seed, 0);
    TestReport report;
    report.method = method;
    report.n = n;
    report.replicates = B;
    report.statistic = values[0];
    report.rank = rank_with_random_ties(values, 0, tie_rng);
    report.p_value = permutation_p_value(report.rank, B);
    report.alpha = options.alpha;
    report.rejected = permutation_rejects(report.rank, B, options.alpha);
    report.seed = options.seed;
    report.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace survhsic
