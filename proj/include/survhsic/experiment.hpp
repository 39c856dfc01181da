#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <iterator>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "survhsic/error.hpp"
#include "survhsic/io.hpp"
#include "survhsic/permutation.hpp"
#include "survhsic/procedures.hpp"
#include "survhsic/random.hpp"
#include "survhsic/scenarios.hpp"

namespace survhsic {

/// Every problem found in a config file, one "line N: ..." message per line.
class ConfigError : public DataError {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : DataError(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s;
        for (const auto& m : p) s += (s.empty() ? "" : "\n") + m;
        return s;
    }
    std::vector<std::string> problems_;
};

struct ExperimentConfig {
    std::vector<ScenarioSpec> scenarios;
    std::vector<std::size_t> n_grid;
    std::size_t replicates = 100;
    std::vector<MethodTag> methods;
    std::size_t B = 1999;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::string out = "results.csv";
    unsigned threads = 1;
};

inline std::vector<std::size_t> default_n_grid() {
    std::vector<std::size_t> g;
    for (std::size_t n = 20; n <= 400; n += 20) g.push_back(n);
    return g;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::optional<std::uint64_t> parse_unsigned(std::string_view s) {
    if (s.empty() || s.size() > 20) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        const std::uint64_t next = v * 10 + static_cast<std::uint64_t>(c - '0');
        if (next / 10 != v) return std::nullopt;
        v = next;
    }
    return v;
}

}  // namespace detail

/// Flat key = value format; '#' starts a comment. Keys: scenario (repeatable),
/// n, replicates, methods, B, alpha, seed, out, threads.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::vector<std::string> problems;
    std::set<std::string> seen;
    bool have_scenario = false;
    bool have_n = false;
    bool have_methods = false;
    std::size_t methods_line = 0;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back(where + "expected key = value");
            continue;
        }
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (key != "scenario" && !seen.insert(key).second) {
            problems.push_back(where + "duplicate key '" + key + "'");
            continue;
        }
        auto need_count = [&](std::uint64_t& target, std::uint64_t min) {
            const auto v = detail::parse_unsigned(value);
            if (!v || *v < min)
                problems.push_back(where + key + " must be an integer >= " + std::to_string(min));
            else
                target = *v;
        };
        if (key == "scenario") {
            have_scenario = true;
            try {
                auto s = parse_scenario(value);
                if (s.label.find_first_of(",\"") != std::string::npos)
                    throw DataError("scenario text may not contain ',' or '\"'");
                cfg.scenarios.push_back(std::move(s));
            } catch (const DataError& e) {
                problems.push_back(where + e.what());
            }
        } else if (key == "n") {
            have_n = true;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto v = detail::parse_unsigned(detail::trim(item));
                if (!v || *v < 2) {
                    problems.push_back(where + "n values must be integers >= 2, got '" + detail::trim(item) + "'");
                    continue;
                }
                cfg.n_grid.push_back(static_cast<std::size_t>(*v));
            }
            if (cfg.n_grid.empty()) problems.push_back(where + "n grid is empty");
        } else if (key == "replicates") {
            std::uint64_t v = cfg.replicates;
            need_count(v, 1);
            cfg.replicates = static_cast<std::size_t>(v);
        } else if (key == "B") {
            std::uint64_t v = cfg.B;
            need_count(v, 1);
            cfg.B = static_cast<std::size_t>(v);
        } else if (key == "seed") {
            need_count(cfg.seed, 0);
        } else if (key == "threads") {
            std::uint64_t v = cfg.threads;
            need_count(v, 1);
            cfg.threads = static_cast<unsigned>(v);
        } else if (key == "alpha") {
            const auto v = parse_number(value);
            if (!v || !(*v > 0.0 && *v < 1.0))
                problems.push_back(where + "alpha must lie in (0, 1)");
            else
                cfg.alpha = *v;
        } else if (key == "out") {
            if (value.empty())
                problems.push_back(where + "out is empty");
            else
                cfg.out = value;
        } else if (key == "methods") {
            have_methods = true;
            methods_line = line_no;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const std::string name = detail::trim(item);
                if (name.empty()) continue;
                if (const auto m = parse_method(name))
                    cfg.methods.push_back(*m);
                else
                    problems.push_back(where + "unknown method '" + name + "'");
            }
            if (cfg.methods.empty() && value.find_first_not_of(", \t") == std::string::npos)
                problems.push_back(where + "methods list is empty");
        } else {
            problems.push_back(where + "unknown key '" + key + "'");
        }
    }
    if (!have_scenario)
        problems.push_back("missing key 'scenario'");
    if (!have_methods) problems.push_back("missing key 'methods'");
    if (!have_n) cfg.n_grid = default_n_grid();

    bool any_continuous = false;
    for (const auto& s : cfg.scenarios) any_continuous |= !s.two_sample();
    for (auto m : cfg.methods)
        if (is_two_sample_method(m) && any_continuous)
            problems.push_back("line " + std::to_string(methods_line) + ": method " + std::string(to_string(m)) +
                               " needs two-sample scenarios only");

    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return parse_config(in);
}

/// Seeds of a sweep. The dataset of replicate r depends on (scenario, n, r)
/// only, so all methods in a cell see the same samples.
inline std::uint64_t dataset_seed(std::uint64_t master, const ScenarioSpec& s, std::size_t n, std::size_t r) {
    return mix_seed({master, hash_string(s.label), n, r});
}
inline std::uint64_t cell_seed(std::uint64_t master, const ScenarioSpec& s, std::size_t n, MethodTag m) {
    return mix_seed({master, hash_string(s.label), n, hash_string(to_string(m))});
}
inline std::uint64_t test_seed(std::uint64_t cell, std::size_t r) {
    return mix_seed({cell, r});
}

struct CellResult {
    std::string scenario;
    std::size_t n = 0;
    MethodTag method = MethodTag::opt_hsic;
    double rate = 0.0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::size_t failed = 0;  // replicates whose test was undefined; counted as not rejected
};

struct CellOptions {
    std::size_t replicates = 100;
    std::size_t B = 1999;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Rejection fraction of `method` over simulated samples of `scenario`.
/// Replicates are spread over a worker pool; the result does not depend on
/// the number of workers.
inline CellResult run_cell(const ScenarioSpec& scenario, std::size_t n, MethodTag method, const CellOptions& opt) {
    CellResult cell{scenario.label, n, method, 0.0, opt.replicates, cell_seed(opt.seed, scenario, n, method), 0};
    std::vector<signed char> outcome(opt.replicates, 0);  // 1 rejected, 0 accepted, -1 failed
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < opt.replicates;) {
            try {
                Rng rng = make_stream(dataset_seed(opt.seed, scenario, n, r), 0);
                const auto d = sample_scenario(scenario, n, rng);
                PermutationOptions po{opt.B, opt.alpha, test_seed(cell.seed, r), 1};
                outcome[r] = run_test(method, d, po).rejected ? 1 : 0;
            } catch (const DegenerateError&) {
                outcome[r] = -1;
            } catch (const ConvergenceError&) {
                outcome[r] = -1;
            } catch (const PermutationError&) {
                outcome[r] = -1;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = opt.replicates;
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(opt.replicates)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    std::size_t rejected = 0;
    for (auto o : outcome) {
        rejected += o == 1;
        cell.failed += o == -1;
    }
    cell.rate = static_cast<double>(rejected) / static_cast<double>(opt.replicates);
    return cell;
}

inline constexpr std::string_view results_header = "scenario,n,method,rate,replicates,seed,failed";

inline std::string format_row(const CellResult& c) {
    return c.scenario + "," + std::to_string(c.n) + "," + std::string(to_string(c.method)) + "," +
           format_double(c.rate) + "," + std::to_string(c.replicates) + "," + std::to_string(c.seed) + "," +
           std::to_string(c.failed);
}

/// (scenario, n, method) keys already present in a results file.
inline std::set<std::tuple<std::string, std::size_t, std::string>> completed_cells(const std::string& path) {
    std::set<std::tuple<std::string, std::size_t, std::string>> done;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line == results_header) continue;
        const auto f = detail::split_fields(line);
        if (f.size() != 7) continue;  // a torn final line from an interrupted run
        const auto n = detail::parse_unsigned(f[1]);
        if (!n) continue;
        done.emplace(std::string(f[0]), static_cast<std::size_t>(*n), std::string(f[2]));
    }
    return done;
}

/// Runs every (scenario, n, method) cell not yet in cfg.out and appends one row
/// per cell as soon as it finishes. `progress` is called after each new row.
inline std::vector<CellResult> run_sweep(const ExperimentConfig& cfg,
                                         const std::function<void(const CellResult&)>& progress = {}) {
    {
        // drop a torn trailing line so appended rows start on a fresh line
        std::ifstream in(cfg.out, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (!content.empty() && content.back() != '\n') {
            const auto cut = content.find_last_of('\n');
            content.erase(cut == std::string::npos ? 0 : cut + 1);
            std::ofstream rewrite(cfg.out, std::ios::binary | std::ios::trunc);
            rewrite << content;
        }
    }
    const auto done = completed_cells(cfg.out);
    const bool fresh = !std::filesystem::exists(cfg.out) || std::filesystem::file_size(cfg.out) == 0;
    std::ofstream out(cfg.out, std::ios::app);
    if (!out) throw DataError("cannot write '" + cfg.out + "'");
    if (fresh) out << results_header << '\n' << std::flush;

    const CellOptions opt{cfg.replicates, cfg.B, cfg.alpha, cfg.seed, cfg.threads};
    std::vector<CellResult> rows;
    for (const auto& s : cfg.scenarios)
        for (auto n : cfg.n_grid)
            for (auto m : cfg.methods) {
                if (done.contains({s.label, n, std::string(to_string(m))})) continue;
                auto cell = run_cell(s, n, m, opt);
                out << format_row(cell) << '\n' << std::flush;
                if (progress) progress(cell);
                rows.push_back(std::move(cell));
            }
    return rows;
}

}  // namespace survhsic
