#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "survhsic/dataset.hpp"
#include "survhsic/random.hpp"

namespace fixtures {

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = -3.0, double hi = 3.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

/// Random censored rows; with `ties` the times come from a small grid.
inline std::vector<survhsic::CensoredRow> random_rows(std::mt19937_64& rng, std::size_t n, bool ties = false,
                                                      double event_prob = 0.7) {
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::uniform_int_distribution<int> grid(0, 4);
    std::bernoulli_distribution ev(event_prob);
    std::normal_distribution<double> nx(0.0, 1.0);
    std::vector<survhsic::CensoredRow> rows(n);
    for (auto& r : rows) {
        r.x = ties ? static_cast<double>(grid(rng)) : nx(rng);
        r.z = ties ? static_cast<double>(grid(rng)) : u(rng);
        r.event = ev(rng);
    }
    return rows;
}

inline survhsic::CensoredDataset random_dataset(std::mt19937_64& rng, std::size_t n, bool ties = false,
                                                double event_prob = 0.7) {
    return survhsic::CensoredDataset(random_rows(rng, n, ties, event_prob));
}

inline std::vector<int> flags(const survhsic::CensoredDataset& d) {
    std::vector<int> f;
    for (const auto& r : d) f.push_back(r.event ? 1 : 0);
    return f;
}

/// Removed when it goes out of scope.
class TempFile {
public:
    explicit TempFile(const std::string& stem) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                (stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;

    std::string path() const { return path_.string(); }
    void write(const std::string& content) const { std::ofstream(path_) << content; }
    std::string read() const {
        std::ifstream in(path_);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
