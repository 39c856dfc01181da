#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "survhsic/dataset.hpp"
#include "survhsic/error.hpp"
#include "survhsic/random.hpp"

namespace survhsic {

enum class ScenarioFamily { power, type1, twosample };

/// A simulation scenario: family, index within the family and the censoring
/// parameters. Unused parameters are ignored by the generator.
struct ScenarioSpec {
    ScenarioFamily family = ScenarioFamily::power;
    int index = 1;
    double lambda = 0.0;
    double a = 0.0;
    double b = 0.0;
    std::string label;  // text the spec was parsed from, used as its key

    bool two_sample() const { return family == ScenarioFamily::twosample; }
    std::string tag() const;
};

inline std::string_view family_name(ScenarioFamily f) {
    switch (f) {
        case ScenarioFamily::power: return "power";
        case ScenarioFamily::type1: return "type1";
        case ScenarioFamily::twosample: return "twosample";
    }
    return "?";
}

inline std::string ScenarioSpec::tag() const {
    return std::string(family_name(family)) + "-" + std::to_string(index);
}

/// Parses "3", "0.25", "1/45" or "-1.5e2".
inline std::optional<double> parse_number(std::string_view s) {
    const auto slash = s.find('/');
    auto parse_plain = [](std::string_view t) -> std::optional<double> {
        if (t.empty()) return std::nullopt;
        std::string buf(t);
        char* end = nullptr;
        const double v = std::strtod(buf.c_str(), &end);
        if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    };
    if (slash == std::string_view::npos) return parse_plain(s);
    const auto num = parse_plain(s.substr(0, slash));
    const auto den = parse_plain(s.substr(slash + 1));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
}

namespace detail {

inline int family_size(ScenarioFamily f) {
    return f == ScenarioFamily::twosample ? 4 : 6;
}

/// Settings giving roughly 75% observed events in the power scenarios.
inline void set_default_parameters(ScenarioSpec& s) {
    if (s.family != ScenarioFamily::power) return;
    switch (s.index) {
        case 1: s.lambda = 1.0 / 3.0; break;
        case 2: s.lambda = 1.0 / 40.0; break;
        case 3: s.lambda = 1.0 / 45.0; break;
        case 4: s.lambda = 6.0; break;
        case 5: s.a = 15.0; s.b = 1.0 / 35.0; break;
        case 6: s.a = 1.0 / 3.0; break;
        default: break;
    }
}

}  // namespace detail

/// "power-3", "power-3 lambda=1/17", "power-5 a=19 b=1/9", "twosample-2", ...
inline ScenarioSpec parse_scenario(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string tag;
    if (!(in >> tag)) throw DataError("empty scenario");
    const auto dash = tag.rfind('-');
    if (dash == std::string::npos) throw DataError("unknown scenario '" + tag + "'");
    const std::string family = tag.substr(0, dash);
    ScenarioSpec s;
    if (family == "power")
        s.family = ScenarioFamily::power;
    else if (family == "type1")
        s.family = ScenarioFamily::type1;
    else if (family == "twosample")
        s.family = ScenarioFamily::twosample;
    else
        throw DataError("unknown scenario '" + tag + "'");
    const auto index = parse_number(std::string_view(tag).substr(dash + 1));
    if (!index || *index != std::floor(*index) || *index < 1 || *index > detail::family_size(s.family))
        throw DataError("unknown scenario '" + tag + "'");
    s.index = static_cast<int>(*index);
    detail::set_default_parameters(s);

    std::string kv;
    while (in >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw DataError("scenario parameter '" + kv + "' is not key=value");
        const std::string key = kv.substr(0, eq);
        const auto value = parse_number(std::string_view(kv).substr(eq + 1));
        if (!value) throw DataError("scenario parameter '" + key + "' is not a number");
        if (key == "lambda")
            s.lambda = *value;
        else if (key == "a")
            s.a = *value;
        else if (key == "b")
            s.b = *value;
        else
            throw DataError("unknown scenario parameter '" + key + "'");
    }
    const bool uses_lambda = s.family == ScenarioFamily::power && s.index <= 4;
    const bool uses_a = s.family == ScenarioFamily::power && s.index >= 5;
    if (uses_lambda && !(s.lambda > 0.0)) throw DataError(tag + ": lambda must be positive");
    if (uses_a && s.index == 6 && !(s.a > 0.0)) throw DataError(tag + ": a must be positive");
    if (uses_a && s.index == 5 && !(s.b > 0.0)) throw DataError(tag + ": b must be positive");

    std::string label(text);
    const auto first = label.find_first_not_of(" \t");
    const auto last = label.find_last_not_of(" \t");
    s.label = label.substr(first, last - first + 1);
    return s;
}

/// One simulated individual before censoring is applied.
struct LatentRow {
    double x = 0.0;
    double t = 0.0;
    double c = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double exponential(Rng& rng, double rate) {
    return std::exponential_distribution<double>(rate)(rng);
}
inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
// N(mean, variance): the second argument is the variance.
inline double normal_var(Rng& rng, double mean, double variance) {
    return std::normal_distribution<double>(mean, std::sqrt(variance))(rng);
}
inline double chi_squared(Rng& rng, double dof) {
    return std::chi_squared_distribution<double>(dof)(rng);
}
// Weib(scale, shape)
inline double weibull(Rng& rng, double scale, double shape) {
    return std::weibull_distribution<double>(shape, scale)(rng);
}

inline LatentRow sample_power(const ScenarioSpec& s, Rng& rng) {
    LatentRow r;
    switch (s.index) {
        case 1:
            r.x = normal_var(rng, 0.0, 2.0);
            r.t = exponential(rng, std::exp(r.x / 5.0));
            r.c = exponential(rng, s.lambda);
            break;
        case 2:
            r.x = normal_var(rng, 0.0, 2.0);
            r.t = 20.0 + r.x + exponential(rng, 1.0 / 10.0);
            r.c = 17.0 + exponential(rng, s.lambda);
            break;
        case 3:
            r.x = uniform(rng, -5.0, 5.0);
            r.t = r.x * r.x / 2.0 + exponential(rng, 1.0 / 10.0);
            r.c = exponential(rng, s.lambda);
            break;
        case 4: {
            r.x = uniform(rng, 0.0, 1.0);
            const double y = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
            r.t = 10.0 + r.x * y + normal_var(rng, 0.0, 0.25);
            r.c = 8.5 + uniform(rng, 0.0, s.lambda);
            break;
        }
        case 5:
            r.x = uniform(rng, -5.0, 5.0);
            // exponential term with mean 10; a rate of 10 cannot reach the
            // quoted observed fractions
            r.t = 15.0 + r.x * r.x / 2.0 + exponential(rng, 1.0 / 10.0);
            r.c = std::max(s.a + 2.0 * r.x, 15.0) + exponential(rng, s.b);
            break;
        case 6:
            r.x = normal_var(rng, 0.0, 2.0);
            r.t = exponential(rng, std::exp(r.x / 5.0));
            r.c = exponential(rng, std::exp(r.x / 5.0) * s.a);
            break;
        default: throw DataError("unknown scenario " + s.tag());
    }
    return r;
}

inline LatentRow sample_type1(const ScenarioSpec& s, Rng& rng) {
    LatentRow r;
    switch (s.index) {
        case 1:
            r.x = normal_var(rng, 0.0, 1.0);
            r.t = exponential(rng, 1.0);
            r.c = exponential(rng, 1.0);
            break;
        case 2:
            r.x = chi_squared(rng, 3.0);
            r.t = uniform(rng, 0.0, 1.0);
            r.c = uniform(rng, 0.0, 1.0);
            break;
        case 3:
            r.x = uniform(rng, -5.0, 5.0);
            r.t = chi_squared(rng, 16.0);
            r.c = 15.0 + 2.0 * r.x;
            break;
        case 4:
            r.x = chi_squared(rng, 5.0);
            r.t = chi_squared(rng, 5.0);
            // exponential term with mean 2, matching the quoted 45% observed
            r.c = r.x / 2.0 + exponential(rng, 1.0 / 2.0);
            break;
        case 5:
            r.x = uniform(rng, -5.0, 5.0);
            r.t = uniform(rng, 0.0, 10.0);
            r.c = r.x * r.x;
            break;
        case 6:
            r.x = chi_squared(rng, 3.0);
            r.t = normal_var(rng, 10.0, 1.0);
            r.c = std::exp(r.x / 6.0) + exponential(rng, 4.0);
            break;
        default: throw DataError("unknown scenario " + s.tag());
    }
    return r;
}

inline LatentRow sample_twosample(const ScenarioSpec& s, int group, Rng& rng) {
    LatentRow r;
    r.x = group;
    switch (s.index) {
        case 1:
            r.t = exponential(rng, group == 0 ? 1.0 : 1.0 / 1.6);
            r.c = exponential(rng, 0.5);
            break;
        case 2:
            r.t = weibull(rng, 1.0, group == 0 ? 5.0 : 1.5);
            r.c = exponential(rng, 0.5);
            break;
        case 3:
            if (group == 0)
                r.t = exponential(rng, 1.0);
            else
                r.t = std::bernoulli_distribution(0.75)(rng) ? 0.43 : 1.39 + exponential(rng, 1.0);
            r.c = 1.0 + exponential(rng, 0.5);
            break;
        case 4:
            r.t = exponential(rng, 1.0);
            r.c = group == 0 ? exponential(rng, 2.0) : std::numeric_limits<double>::infinity();
            break;
        default: throw DataError("unknown scenario " + s.tag());
    }
    return r;
}

}  // namespace detail

/// n latent rows. Two-sample scenarios put the first n/2 rows in group 0 and
/// the rest in group 1.
inline std::vector<LatentRow> sample_latent(const ScenarioSpec& s, std::size_t n, Rng& rng) {
    std::vector<LatentRow> rows(n);
    const std::size_t n0 = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        switch (s.family) {
            case ScenarioFamily::power: rows[i] = detail::sample_power(s, rng); break;
            case ScenarioFamily::type1: rows[i] = detail::sample_type1(s, rng); break;
            case ScenarioFamily::twosample: rows[i] = detail::sample_twosample(s, i < n0 ? 0 : 1, rng); break;
        }
    }
    return rows;
}

inline CensoredRow censor(const LatentRow& r) {
    return {r.x, std::min(r.t, r.c), r.t <= r.c};
}

/// Simulated censored sample; two-sample scenarios carry the group as a 0/1
/// covariate.
inline CensoredDataset sample_scenario(const ScenarioSpec& s, std::size_t n, Rng& rng) {
    if (s.two_sample() && n < 2) throw DataError("two-sample scenarios need n >= 2");
    const auto latent = sample_latent(s, n, rng);
    std::vector<CensoredRow> rows;
    rows.reserve(n);
    for (const auto& r : latent) rows.push_back(censor(r));
    return CensoredDataset(std::move(rows));
}

inline TwoSampleDataset sample_two_sample(const ScenarioSpec& s, std::size_t n, Rng& rng) {
    if (!s.two_sample()) throw DataError(s.tag() + " is not a two-sample scenario");
    return split_binary(sample_scenario(s, n, rng));
}

inline double empirical_observed_fraction(const ScenarioSpec& s, std::size_t n, Rng& rng) {
    if (n == 0) throw DataError("observed fraction needs n >= 1");
    std::size_t observed = 0;
    for (const auto& r : sample_latent(s, n, rng)) observed += r.t <= r.c;
    return static_cast<double>(observed) / static_cast<double>(n);
}

/// A scenario setting together with its published fraction of observed events.
struct ObservedFractionTarget {
    std::string scenario;
    double observed = 0.0;
};

inline std::vector<ObservedFractionTarget> observed_fraction_targets() {
    return {
        {"power-1 lambda=1/3", 0.75},   {"power-1 lambda=1", 0.50},     {"power-1 lambda=3", 0.25},
        {"power-2 lambda=1/40", 0.75},  {"power-2 lambda=1/15", 0.50},  {"power-2 lambda=1/7", 0.25},
        {"power-3 lambda=1/45", 0.75},  {"power-3 lambda=1/17", 0.50},  {"power-3 lambda=1/7", 0.25},
        {"power-4 lambda=6", 0.75},     {"power-4 lambda=3", 0.50},     {"power-4 lambda=1.75", 0.25},
        {"power-5 a=15 b=1/35", 0.75},  {"power-5 a=19 b=1/9", 0.50},   {"power-5 a=15 b=1/10", 0.25},
        {"power-6 a=1/3", 0.75},        {"power-6 a=1", 0.50},          {"power-6 a=3", 0.25},
        {"type1-1", 0.50},              {"type1-2", 0.50},              {"type1-3", 0.45},
        {"type1-4", 0.45},              {"type1-5", 0.55},              {"type1-6", 0.60},
        {"twosample-1", 0.60},          {"twosample-2", 0.60},          {"twosample-3", 0.90},
        {"twosample-4", 0.65},
    };
}

}  // namespace survhsic
