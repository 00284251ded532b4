#pragma once

#include "gerw/families.hpp"
#include "gerw/scaling.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace gerw {

// Exact moments of S_n, 1-indexed (stored at [n-1]).  Built by the one-step
// recursions, which are the production path; the closed forms below exist as
// cross-checks only, since they divide by a_k and mix magnitudes.
struct MomentTable {
    std::uint64_t N = 0;
    double q = 0.5;
    std::vector<double> mean;      // E[S_n]
    std::vector<double> second;    // E[S_n^2]
    std::vector<double> variance;  // second - mean^2
};

// Recursions, from E[S_1] = 2q-1 and E[S_1^2] = 1:
//   E[S_{n+1}]   = (1 + alpha_n/n) E[S_n] + (1-alpha_n) eps_n
//   E[S_{n+1}^2] = (1 + 2 alpha_n/n) E[S_n^2] + 2 (1-alpha_n) eps_n E[S_n] + 1
MomentTable exact_moments(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                          std::uint64_t N);
std::vector<double> exact_mean(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                               std::uint64_t N);
std::vector<double> exact_second_moment(const AlphaFamily& alpha, const EpsFamily& eps,
                                        double q, std::uint64_t N);

// Closed forms (test-only cross-checks of the recursions):
//   E[S_n]   = a_n ( (2q-1) + sum_{k<n} (1-alpha_k) eps_k / a_{k+1} )
//   E[S_n^2] = b_n ( sum_{k<=n} 1/b_k + 2 sum_{k<n} (1-alpha_k) eps_k E[S_k] / b_{k+1} )
double closed_form_mean(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                        std::uint64_t n);
double closed_form_second_moment(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                                 std::uint64_t n);

// Exhaustive enumeration of all 2^n sign sequences; the distribution of S_n
// is exact up to double rounding (per-bucket probabilities are accumulated
// smallest-first in a fixed order, so results do not depend on traversal).
struct PathOracleResult {
    unsigned n = 0;
    double mean = 0.0;
    double second = 0.0;
    std::map<std::int64_t, double> probability;  // S_n value -> probability
};

inline constexpr unsigned kEnumerationCap = 20;

PathOracleResult enumerate_paths(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                                 unsigned n, unsigned cap = kEnumerationCap);

// M_n = (S_n - E[S_n]) / a_n for a recorded trajectory of S values
// (s[j-1] = S_j).  Throws if the trajectory is longer than either table.
std::vector<double> martingale_values(std::span<const std::int64_t> s,
                                      const MomentTable& moments, const ScalingTable& scaling);

}  // namespace gerw
