#pragma once

#include "gerw/families.hpp"
#include "gerw/moments.hpp"
#include "gerw/scaling.hpp"
#include "gerw/simulate.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gerw {

// One judged checkpoint of a statistical test.  The threshold the statistic
// was compared against is stored next to it so a serialized report can be
// audited without rerunning anything; informational rows carry
// mandatory = false and never affect the verdict.
struct CheckRow {
    std::uint64_t n = 0;
    double statistic = 0.0;
    double threshold = 0.0;
    bool mandatory = true;
    bool pass = false;
    std::string note;
};

struct TestReport {
    std::string kind;
    std::uint64_t m = 0;            // trajectories behind the statistics
    std::uint64_t master_seed = 0;
    std::string family;             // caller-supplied provenance string
    bool heuristic = false;         // advisory report; must never gate a run
    bool degenerate = false;        // statistic identically zero (frozen walk)
    std::vector<CheckRow> rows;
    std::map<std::string, double> info;
    bool verdict = false;           // pass iff every mandatory row passes

    void finalize();                // recompute verdict from rows
    std::string to_json() const;
};

// Standard normal CDF as 0.5*erfc(-x/sqrt(2)).  Accuracy is that of the libm
// erfc, comfortably inside the 1e-7 the distribution tests rely on.
double normal_cdf(double x);

// Sup distance between the empirical CDF of the sample and the CDF of
// N(mean, variance).  Throws std::invalid_argument on an empty sample or
// variance <= 0.
double ks_distance(std::span<const double> sample, double mean, double variance);

// Critical value c solving K(c) = 1 - delta for the asymptotic Kolmogorov
// distribution K(x) = 1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2); a KS test
// at level delta rejects when D_m > c/sqrt(m).  c(0.01) ~= 1.6276.
double ks_critical(double delta);

// Strong-law check: mean_i |S_i(n)/r(n) - 1| must not grow from one
// checkpoint to the next (a 5% slack absorbs Monte Carlo noise) and must be
// below tol at the final checkpoint.  r aligns with ensemble.checkpoints;
// r(n) = 0 throws.
TestReport verify_lln(const EnsembleStats& ensemble, std::span<const double> r,
                      double tol = 0.01);

// Mean-square version of the same check (statistic mean_i (S_i/r - 1)^2),
// plus one exact, simulation-free row: E[S_n^2]/E[S_n]^2 at the final
// checkpoint must be within ratio_tol of 1, both moments from the exact
// recursion table.
TestReport verify_l2(const EnsembleStats& ensemble, std::span<const double> r,
                     const MomentTable& moments, double tol = 1e-3,
                     double ratio_tol = 0.02);

// Distribution check: (S(n) - center(n))/scale(n) against
// N(predicted_mean, predicted_variance) by KS distance.  Every checkpoint is
// reported; only the final one gates, at threshold ks_critical(delta)/sqrt(m).
// Requires m >= 1000 (the threshold is asymptotic); zero or negative
// predicted variance throws.
TestReport verify_clt(const EnsembleStats& ensemble, std::span<const double> center,
                      std::span<const double> scale, double predicted_mean,
                      double predicted_variance, double delta = 0.01);

// Fluctuation around the estimated random drift.  The last checkpoint is the
// estimation horizon: per trajectory, Mhat = (S(N_big) - mean(N_big))/a(N_big),
// and at each earlier checkpoint n the residual
//   (S(n) - mean(n) - a(n)*Mhat) / (a(n) * sqrt(tail(n) - tail(N_big)))
// is tested against N(0, predicted_variance), tail being the z (which = Z) or
// t (which = T) column of the table.  Subtracting the horizon tail makes the
// window variance exact for the increment decomposition, removing the bias of
// plugging a finite-horizon estimate into an infinite-horizon statement.
// Requires N_big >= horizon_ratio * n for every test checkpoint.  A residual
// sample with zero spread sets the degenerate flag instead of failing.
TestReport verify_drift_fluctuation(const EnsembleStats& ensemble,
                                    std::span<const double> mean_at_checkpoints,
                                    const ScalingTable& table, TailKind which,
                                    double predicted_variance, double delta = 0.01,
                                    double horizon_ratio = 100.0);

// Iterated-logarithm extremes of one recorded trajectory: running maxima of
// +/-(S_n - mean[n-1]) / (a_n * phi(seq[n-1])) over the last two decades
// [N/100, N], with phi(t) = sqrt(2 t log log t) (values with t <= e are
// skipped).  steps[n-1] = S_n; mean, log_a and seq are 1-indexed at [n-1] and
// must cover the trajectory.
struct LilExtremes {
    double plus = 0.0;
    double minus = 0.0;
};
LilExtremes lil_extremes(std::span<const std::int64_t> steps, std::span<const double> mean,
                         std::span<const double> log_a, std::span<const double> seq);

// Aggregates +/- extremes from independent trajectories against the
// predicted envelope sqrt(envelope_sq).  A limsup statement has no
// finite-sample rejection rule, so the report is marked heuristic and must
// never gate a run; its verdict records whether the median extreme lies in
// [(1-slack_lo)*envelope, (1+slack_hi)*envelope].  Intended for >= 20
// trajectories (2 extremes each); fewer is reported, not an error.
TestReport verify_lil(std::span<const double> extremes, double envelope_sq,
                      double slack_lo = 0.4, double slack_hi = 0.15);

// Cumulative conditional variance of the normalized-position increments
// along one recorded trajectory:
//   curve[0]   = 4q(1-q)
//   curve[n-1] = curve[n-2]
//              + (1 - ((alpha_{n-1}/(n-1)) S_{n-1} + (1-alpha_{n-1}) eps_{n-1})^2) / a_n^2.
// Nondecreasing, and bounded by 4 w_n since each conditional variance is at
// most 1 and each increment is at most 2/a_n in magnitude.  Throws without a
// step record.
std::vector<double> quad_variation_curve(const Trajectory& traj, const AlphaFamily& alpha,
                                         const EpsFamily& eps, double q);

// Convergence-rate law for bias vanishing with index rho: the statistic
// (S_n/n - 1)/(1 - eps_n) per trajectory has ensemble median within rel_tol
// (relative) of -(1-alpha)/(1-(alpha+rho)) at the final checkpoint.
// Requires alpha in [0,1), rho in [0,1/2), alpha + rho < 1; a checkpoint
// where eps_n = 1 throws.
TestReport verify_rate(const EnsembleStats& ensemble, const EpsFamily& eps, double alpha,
                       double rho, double rel_tol = 0.05);

} // namespace gerw
