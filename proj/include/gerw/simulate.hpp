#pragma once

#include "gerw/families.hpp"
#include "gerw/rng.hpp"

#include <cstdint>
#include <vector>

namespace gerw {

// Walk position after n steps.  Only the +1 count is tracked: the memory
// mechanism depends on the past through that count alone, so a trajectory
// needs O(1) state.  S is derived, which keeps |S| <= n and the parity
// invariant S == n (mod 2) true by construction.
struct WalkState {
    std::uint64_t n = 0;
    std::uint64_t plus_count = 0;

    std::int64_t S() const {
        return 2 * static_cast<std::int64_t>(plus_count) - static_cast<std::int64_t>(n);
    }
};

// Probability that step n+1 is +1 given the first n steps:
//   p_plus = alpha_n * (plus_count/n) + (1 - alpha_n) * (1 + eps_n)/2.
// A convex combination of values in [0,1], so the result needs no clamping.
// The first step is governed by q, not by this formula: n = 0 throws.
double step_probability(const WalkState& state, double alpha_n, double eps_n);

struct Trajectory {
    std::uint64_t stream_seed = 0;
    std::vector<std::uint64_t> checkpoints;
    std::vector<std::int64_t> s;      // S at each checkpoint
    std::vector<std::int64_t> steps;  // full record S_1..S_N (empty unless requested)
};

// One walk, deterministic in stream_seed alone: the same seed gives the
// bit-identical trajectory no matter what else runs concurrently.
// Checkpoints must be sorted, distinct, within [1, N], and nonempty.
Trajectory simulate_trajectory(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                               std::uint64_t N, const std::vector<std::uint64_t>& checkpoints,
                               std::uint64_t stream_seed, bool record_steps = false);

// Ensemble of m independent trajectories with per-checkpoint statistics and
// the full m x checkpoints sample grid (trajectory-major) for distributional
// tests.  Statistics are reduced in trajectory-index order, so the result is
// bit-identical for every thread budget.
struct EnsembleStats {
    std::uint64_t m = 0;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> checkpoints;
    std::vector<std::int64_t> grid;  // grid[i * checkpoints.size() + j] = S at cp j, traj i
    std::vector<double> mean;        // per checkpoint
    std::vector<double> variance;    // per checkpoint, sample variance (m-1 denominator)

    std::int64_t at(std::uint64_t traj, std::size_t cp) const {
        return grid[traj * checkpoints.size() + cp];
    }
    std::vector<double> column(std::size_t cp) const;  // all m samples at one checkpoint
};

// Trajectory i runs on the stream derived from (master_seed, i).  A zero
// thread_budget means the runtime default.  The serial variant is the
// reference implementation; simulate_ensemble must match it bit for bit.
EnsembleStats simulate_ensemble(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                                std::uint64_t N, const std::vector<std::uint64_t>& checkpoints,
                                std::uint64_t m, std::uint64_t master_seed,
                                unsigned thread_budget = 0);
EnsembleStats simulate_ensemble_serial(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                                       std::uint64_t N,
                                       const std::vector<std::uint64_t>& checkpoints,
                                       std::uint64_t m, std::uint64_t master_seed);

}  // namespace gerw
