#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sle {

// (mean, standard error, sample count, seed) record; every Monte-Carlo
// quantity in this project is reported as one of these.
struct EnsembleEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long long n = 0;
    uint64_t seed = 0;
};

inline EnsembleEstimate estimate_from_samples(const std::vector<double>& xs, uint64_t seed) {
    if (xs.size() < 2) throw std::invalid_argument("estimate_from_samples: need n >= 2");
    double sum = 0.0;
    for (double x : xs) sum += x;
    double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return {mean, sd / std::sqrt(static_cast<double>(xs.size())),
            static_cast<long long>(xs.size()), seed};
}

// Bernoulli convention used by the hitting-law experiments: for counts at
// n >= 2 the standard error is sqrt(p(1-p)/n) exactly.
inline EnsembleEstimate estimate_from_bernoulli(long long hits, long long n, uint64_t seed) {
    if (n < 2) throw std::invalid_argument("estimate_from_bernoulli: need n >= 2");
    double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, seed};
}

} // namespace sle
