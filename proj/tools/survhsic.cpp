// survhsic: run censored-data independence tests, scenario sweeps and the
// transport transform from the command line.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "survhsic/survhsic.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;  // file, parse and data errors
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

unsigned default_threads() {
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_test(const std::string& csv, const std::string& method_name, std::size_t B, double alpha,
             std::uint64_t seed, unsigned threads, const std::string& out) {
    const auto method = survhsic::parse_method(method_name);
    if (!method) throw UsageError("unknown method '" + method_name + "'");
    const auto d = survhsic::load_csv(csv);
    const auto report = survhsic::run_test(*method, d, {B, alpha, seed, threads});
    const std::string line = survhsic::to_json(report).dump();
    std::cout << line << '\n';
    if (!out.empty()) {
        std::ofstream f(out, std::ios::app);
        if (!f) throw survhsic::DataError("cannot write '" + out + "'");
        f << line << '\n';
    }
    return exit_ok;
}

int cmd_sweep(const std::string& config_path, unsigned threads, bool threads_set) {
    auto cfg = survhsic::load_config(config_path);
    if (threads_set) cfg.threads = threads;
    std::cerr << "sweep: " << cfg.scenarios.size() << " scenario(s) x " << cfg.n_grid.size() << " n x "
              << cfg.methods.size() << " method(s), " << cfg.replicates << " replicates, B=" << cfg.B << " -> "
              << cfg.out << '\n';
    const auto rows = survhsic::run_sweep(cfg, [](const survhsic::CellResult& c) {
        std::cerr << survhsic::format_row(c) << '\n';
    });
    std::cerr << "sweep: " << rows.size() << " new cell(s)\n";
    return exit_ok;
}

int cmd_transform(const std::string& csv, std::uint64_t seed, const std::string& out, const std::string& trace) {
    const auto d = survhsic::load_csv(csv);
    survhsic::Rng rng = survhsic::make_stream(seed, 0);
    const auto result = survhsic::opt_transform(d, rng);
    if (out.empty()) {
        survhsic::write_synthetic(std::cout, result.synthetic);
    } else {
        std::ofstream f(out);
        if (!f) throw survhsic::DataError("cannot write '" + out + "'");
        survhsic::write_synthetic(f, result.synthetic);
    }
    if (!trace.empty()) {
        std::ofstream f(trace);
        if (!f) throw survhsic::DataError("cannot write '" + trace + "'");
        survhsic::write_trace(f, result.trace);
    }
    return exit_ok;
}

int cmd_simulate(const std::string& scenario_text, std::size_t n, std::uint64_t seed, const std::string& out) {
    survhsic::ScenarioSpec spec;
    try {
        spec = survhsic::parse_scenario(scenario_text);
    } catch (const survhsic::DataError& e) {
        throw UsageError(e.what());
    }
    survhsic::Rng rng = survhsic::make_stream(seed, 0);
    const auto d = survhsic::sample_scenario(spec, n, rng);
    if (out.empty()) {
        survhsic::write_csv(std::cout, d);
    } else {
        survhsic::save_csv(out, d);
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Independence and two-sample tests for right-censored data"};
    app.require_subcommand(1);

    std::string csv, method, out, trace, config, scenario;
    std::size_t B = 1999, n = 100;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();

    auto* test = app.add_subcommand("test", "run one test on a CSV file (x,z,delta) and print a JSON record");
    test->add_option("csv", csv, "input file")->required();
    test->add_option("--method", method, "OPT-HSIC, WHSIC, ZHSIC, WHSIC-2S, IPX-HSIC, LOGRANK or CPH")->required();
    test->add_option("--B", B, "number of permutations")->capture_default_str();
    test->add_option("--alpha", alpha, "significance level")->capture_default_str();
    test->add_option("--seed", seed, "master seed")->capture_default_str();
    test->add_option("--threads", threads, "worker threads");
    test->add_option("--out", out, "also append the record to this JSON-lines file");

    auto* sweep = app.add_subcommand("sweep", "run a simulation sweep described by a config file");
    sweep->add_option("--config", config, "config file")->required();
    auto* sweep_threads = sweep->add_option("--threads", threads, "worker threads (overrides the config)");

    auto* transform = app.add_subcommand("transform", "write the optimal-transport synthetic dataset");
    transform->add_option("csv", csv, "input file")->required();
    transform->add_option("--seed", seed, "seed")->capture_default_str();
    transform->add_option("--out", out, "synthetic dataset (y,t); stdout if omitted");
    transform->add_option("--trace", trace, "per-event trace (z,x,y,risk_size,pool_size)");

    auto* simulate = app.add_subcommand("simulate", "write one simulated sample as CSV");
    simulate->add_option("--scenario", scenario, "e.g. \"power-3 lambda=1/45\"")->required();
    simulate->add_option("--n", n, "sample size")->capture_default_str()->check(CLI::Range(2, 100000000));
    simulate->add_option("--seed", seed, "seed")->capture_default_str();
    simulate->add_option("--out", out, "output file; stdout if omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*test) return cmd_test(csv, method, B, alpha, seed, threads, out);
        if (*sweep) return cmd_sweep(config, threads, sweep_threads->count() > 0);
        if (*transform) return cmd_transform(csv, seed, out, trace);
        if (*simulate) return cmd_simulate(scenario, n, seed, out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}
