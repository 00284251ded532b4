#include "gerw/simulate.hpp"

#include "gerw/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gerw {

double step_probability(const WalkState& state, double alpha_n, double eps_n) {
    if (state.n == 0) {
        throw std::invalid_argument("step_probability: the first step is governed by q");
    }
    double frac = static_cast<double>(state.plus_count) / static_cast<double>(state.n);
    return alpha_n * frac + (1.0 - alpha_n) * (1.0 + eps_n) / 2.0;
}

namespace {

void check_checkpoints(const std::vector<std::uint64_t>& cps, std::uint64_t N) {
    if (cps.empty()) {
        throw std::invalid_argument("checkpoint list must be nonempty");
    }
    std::uint64_t prev = 0;
    for (std::uint64_t c : cps) {
        if (c <= prev || c > N) {
            throw std::invalid_argument("checkpoints must be sorted, distinct, in [1, N]");
        }
        prev = c;
    }
}

// Parameter arrays indexed by n (entry n holds alpha_n / eps_n; entry 0 is
// unused).  Evaluated once per run so the inner loop is transcendental-free.
struct ParamArrays {
    std::vector<double> alpha;
    std::vector<double> eps;
};

ParamArrays precompute(const AlphaFamily& alpha, const EpsFamily& eps, std::uint64_t N) {
    ParamArrays p;
    p.alpha.resize(N);
    p.eps.resize(N);
    for (std::uint64_t n = 1; n < N; ++n) {
        p.alpha[n] = eval_alpha(alpha, n);
        p.eps[n] = eval_eps(eps, n);
    }
    return p;
}

// Shared inner kernel.  Both the serial and the parallel drivers call this
// exact function, so their floating-point expression trees are identical and
// the outputs match bit for bit.
void run_trajectory_row(const ParamArrays& par, double q, std::uint64_t N,
                        const std::uint64_t* cps, std::size_t ncp, std::uint64_t seed,
                        std::int64_t* out_row, std::int64_t* full_record) {
    Xoshiro256pp rng(seed);
    std::uint64_t plus = rng.uniform() < q ? 1 : 0;
    std::size_t ci = 0;
    std::int64_t s = 2 * static_cast<std::int64_t>(plus) - 1;
    if (full_record) {
        full_record[0] = s;
    }
    if (cps[ci] == 1) {
        out_row[ci++] = s;
    }
    for (std::uint64_t n = 1; n < N && (ci < ncp || full_record); ++n) {
        double p_up = par.alpha[n] * (static_cast<double>(plus) / static_cast<double>(n)) +
                      (1.0 - par.alpha[n]) * (1.0 + par.eps[n]) / 2.0;
        if (rng.uniform() < p_up) {
            ++plus;
        }
        s = 2 * static_cast<std::int64_t>(plus) - static_cast<std::int64_t>(n + 1);
        if (full_record) {
            full_record[n] = s;
        }
        if (cps[ci] == n + 1) {
            out_row[ci++] = s;
        }
    }
}

}  // namespace

Trajectory simulate_trajectory(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                               std::uint64_t N, const std::vector<std::uint64_t>& checkpoints,
                               std::uint64_t stream_seed, bool record_steps) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("q must lie in [0,1]");
    }
    check_checkpoints(checkpoints, N);
    ParamArrays par = precompute(alpha, eps, record_steps ? N : checkpoints.back());
    Trajectory t;
    t.stream_seed = stream_seed;
    t.checkpoints = checkpoints;
    t.s.resize(checkpoints.size());
    if (record_steps) {
        t.steps.resize(N);
    }
    run_trajectory_row(par, q, N, checkpoints.data(), checkpoints.size(), stream_seed,
                       t.s.data(), record_steps ? t.steps.data() : nullptr);
    return t;
}

std::vector<double> EnsembleStats::column(std::size_t cp) const {
    std::vector<double> col(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        col[i] = static_cast<double>(at(i, cp));
    }
    return col;
}

namespace {

EnsembleStats run_ensemble(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                           std::uint64_t N, const std::vector<std::uint64_t>& checkpoints,
                           std::uint64_t m, std::uint64_t master_seed, bool parallel,
                           unsigned thread_budget) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("q must lie in [0,1]");
    }
    if (m == 0) {
        throw std::invalid_argument("ensemble needs m >= 1");
    }
    check_checkpoints(checkpoints, N);

    EnsembleStats out;
    out.m = m;
    out.master_seed = master_seed;
    out.checkpoints = checkpoints;
    std::size_t ncp = checkpoints.size();
    out.grid.resize(m * ncp);  // all-or-nothing: allocation failure throws here

    ParamArrays par = precompute(alpha, eps, checkpoints.back());
    const std::uint64_t* cps = checkpoints.data();
    std::int64_t* grid = out.grid.data();

    if (parallel) {
#ifdef _OPENMP
        if (thread_budget > 0) {
            omp_set_num_threads(static_cast<int>(thread_budget));
        }
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
            run_trajectory_row(par, q, N, cps, ncp,
                               stream_seed(master_seed, static_cast<std::uint64_t>(i)),
                               grid + static_cast<std::uint64_t>(i) * ncp, nullptr);
        }
#else
        (void)thread_budget;
        for (std::uint64_t i = 0; i < m; ++i) {
            run_trajectory_row(par, q, N, cps, ncp, stream_seed(master_seed, i),
                               grid + i * ncp, nullptr);
        }
#endif
    } else {
        for (std::uint64_t i = 0; i < m; ++i) {
            run_trajectory_row(par, q, N, cps, ncp, stream_seed(master_seed, i),
                               grid + i * ncp, nullptr);
        }
    }

    // Ordered two-pass reduction, independent of how rows were produced.
    out.mean.resize(ncp);
    out.variance.resize(ncp);
    for (std::size_t j = 0; j < ncp; ++j) {
        KahanSum sum;
        for (std::uint64_t i = 0; i < m; ++i) {
            sum.add(static_cast<double>(grid[i * ncp + j]));
        }
        double mean = sum.value() / static_cast<double>(m);
        KahanSum sq;
        for (std::uint64_t i = 0; i < m; ++i) {
            double d = static_cast<double>(grid[i * ncp + j]) - mean;
            sq.add(d * d);
        }
        out.mean[j] = mean;
        out.variance[j] = m > 1 ? sq.value() / static_cast<double>(m - 1) : 0.0;
    }
    return out;
}

}  // namespace

EnsembleStats simulate_ensemble(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                                std::uint64_t N, const std::vector<std::uint64_t>& checkpoints,
                                std::uint64_t m, std::uint64_t master_seed,
                                unsigned thread_budget) {
    return run_ensemble(alpha, eps, q, N, checkpoints, m, master_seed, true, thread_budget);
}

EnsembleStats simulate_ensemble_serial(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                                       std::uint64_t N,
                                       const std::vector<std::uint64_t>& checkpoints,
                                       std::uint64_t m, std::uint64_t master_seed) {
    return run_ensemble(alpha, eps, q, N, checkpoints, m, master_seed, false, 0);
}

}  // namespace gerw
