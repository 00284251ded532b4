#include "gerw/verify.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace gerw {

namespace {

// Consecutive checkpoint statistics must not grow by more than this factor;
// the slack keeps decade-spaced checkpoints (decay factors well above 1.4x)
// from flaking on Monte Carlo noise (relative error ~ 1/sqrt(m)).
constexpr double kMonotoneSlack = 1.05;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_alignment(const EnsembleStats& ensemble, std::span<const double> values,
                     const char* what) {
    if (values.size() != ensemble.checkpoints.size())
        throw std::invalid_argument(std::string(what) + " must align with the checkpoints");
    if (ensemble.m == 0 || ensemble.checkpoints.empty())
        throw std::invalid_argument("empty ensemble");
}

// Shared skeleton of verify_lln / verify_l2: per-checkpoint sample mean of
// |S/r - 1|^power, judged monotone within slack and below tol at the end.
TestReport ratio_deviation_report(const EnsembleStats& ensemble, std::span<const double> r,
                                  double tol, int power, const char* kind) {
    check_alignment(ensemble, r, "r");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    TestReport rep;
    rep.kind = kind;
    rep.m = ensemble.m;
    rep.master_seed = ensemble.master_seed;
    rep.info["tol"] = tol;

    std::size_t ncp = ensemble.checkpoints.size();
    bool all_zero = true;
    double prev = 0.0;
    for (std::size_t j = 0; j < ncp; ++j) {
        if (r[j] == 0.0) throw std::invalid_argument("r is zero at a checkpoint");
        KahanSum acc;
        for (std::uint64_t i = 0; i < ensemble.m; ++i) {
            double dev = static_cast<double>(ensemble.at(i, j)) / r[j] - 1.0;
            acc.add(power == 1 ? std::abs(dev) : dev * dev);
        }
        double stat = acc.value() / static_cast<double>(ensemble.m);
        all_zero = all_zero && stat == 0.0;

        CheckRow row;
        row.n = ensemble.checkpoints[j];
        row.statistic = stat;
        if (j == 0) {
            row.threshold = stat;
            row.mandatory = false;
            row.pass = true;
            row.note = "baseline checkpoint";
        } else if (j + 1 < ncp) {
            row.threshold = prev * kMonotoneSlack;
            row.pass = stat <= row.threshold;
            row.note = "must not exceed previous level (5% slack)";
        } else {
            row.threshold = std::min(tol, prev * kMonotoneSlack);
            row.pass = stat <= row.threshold;
            row.note = "final: below tolerance " + fmt(tol) + " and the previous level";
        }
        rep.rows.push_back(std::move(row));
        prev = stat;
    }
    rep.degenerate = all_zero;
    rep.finalize();
    return rep;
}

} // namespace

void TestReport::finalize() {
    verdict = true;
    for (const CheckRow& row : rows)
        if (row.mandatory && !row.pass) verdict = false;
}

std::string TestReport::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["verdict"] = verdict ? "pass" : "fail";
    j["heuristic"] = heuristic;
    j["degenerate"] = degenerate;
    j["m"] = m;
    j["master_seed"] = master_seed;
    j["family"] = family;
    nlohmann::ordered_json info_j = nlohmann::ordered_json::object();
    for (const auto& [key, value] : info) info_j[key] = value;
    j["info"] = std::move(info_j);
    j["checkpoints"] = nlohmann::ordered_json::array();
    for (const CheckRow& row : rows) {
        nlohmann::ordered_json rj;
        rj["n"] = row.n;
        rj["statistic"] = row.statistic;
        rj["threshold"] = row.threshold;
        rj["mandatory"] = row.mandatory;
        rj["pass"] = row.pass;
        rj["note"] = row.note;
        j["checkpoints"].push_back(std::move(rj));
    }
    return j.dump(2);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double ks_distance(std::span<const double> sample, double mean, double variance) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    double sd = std::sqrt(variance);
    double m = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = normal_cdf((x[i] - mean) / sd);
        d = std::max(d, (static_cast<double>(i) + 1.0) / m - f);
        d = std::max(d, f - static_cast<double>(i) / m);
    }
    return d;
}

double ks_critical(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("significance must be in (0,1)");
    // Tail of the Kolmogorov distribution, 1 - K(x); monotone decreasing.
    auto tail = [](double x) {
        double sum = 0.0, sign = 1.0;
        for (int k = 1; k <= 400; ++k) {
            double term = std::exp(-2.0 * k * k * x * x);
            sum += sign * term;
            if (term < 1e-18) break;
            sign = -sign;
        }
        return 2.0 * sum;
    };
    double lo = 0.05, hi = 5.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        (tail(mid) > delta ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

TestReport verify_lln(const EnsembleStats& ensemble, std::span<const double> r, double tol) {
    return ratio_deviation_report(ensemble, r, tol, 1, "lln");
}

TestReport verify_l2(const EnsembleStats& ensemble, std::span<const double> r,
                     const MomentTable& moments, double tol, double ratio_tol) {
    TestReport rep = ratio_deviation_report(ensemble, r, tol, 2, "l2");
    std::uint64_t n_final = ensemble.checkpoints.back();
    if (moments.N < n_final)
        throw std::invalid_argument("moment table does not cover the final checkpoint");
    double mean = moments.mean[n_final - 1];
    if (mean == 0.0)
        throw std::invalid_argument("second-moment ratio undefined: E[S_n] is zero");
    double ratio = moments.second[n_final - 1] / (mean * mean);
    rep.info["moment_ratio"] = ratio;

    CheckRow row;
    row.n = n_final;
    row.statistic = std::abs(ratio - 1.0);
    row.threshold = ratio_tol;
    row.pass = row.statistic <= row.threshold;
    row.note = "exact |E[S_n^2]/E[S_n]^2 - 1| from the moment recursions";
    rep.rows.push_back(std::move(row));
    rep.finalize();
    return rep;
}

TestReport verify_clt(const EnsembleStats& ensemble, std::span<const double> center,
                      std::span<const double> scale, double predicted_mean,
                      double predicted_variance, double delta) {
    check_alignment(ensemble, center, "center");
    check_alignment(ensemble, scale, "scale");
    if (ensemble.m < 1000)
        throw std::invalid_argument("distribution test needs at least 1000 trajectories");
    if (!(predicted_variance > 0.0))
        throw std::invalid_argument("predicted variance must be positive");

    TestReport rep;
    rep.kind = "clt";
    rep.m = ensemble.m;
    rep.master_seed = ensemble.master_seed;
    double c_delta = ks_critical(delta);
    double threshold = c_delta / std::sqrt(static_cast<double>(ensemble.m));
    rep.info["delta"] = delta;
    rep.info["c_delta"] = c_delta;
    rep.info["predicted_mean"] = predicted_mean;
    rep.info["predicted_variance"] = predicted_variance;

    std::size_t ncp = ensemble.checkpoints.size();
    std::vector<double> sample(ensemble.m);
    for (std::size_t j = 0; j < ncp; ++j) {
        if (scale[j] == 0.0) throw std::invalid_argument("scale is zero at a checkpoint");
        for (std::uint64_t i = 0; i < ensemble.m; ++i)
            sample[i] = (static_cast<double>(ensemble.at(i, j)) - center[j]) / scale[j];
        CheckRow row;
        row.n = ensemble.checkpoints[j];
        row.statistic = ks_distance(sample, predicted_mean, predicted_variance);
        row.threshold = threshold;
        row.mandatory = j + 1 == ncp;
        row.pass = row.statistic <= row.threshold;
        row.note = row.mandatory ? "KS distance, gating checkpoint"
                                 : "KS distance, informational";
        rep.rows.push_back(std::move(row));
    }
    rep.finalize();
    return rep;
}

TestReport verify_drift_fluctuation(const EnsembleStats& ensemble,
                                    std::span<const double> mean_at_checkpoints,
                                    const ScalingTable& table, TailKind which,
                                    double predicted_variance, double delta,
                                    double horizon_ratio) {
    check_alignment(ensemble, mean_at_checkpoints, "means");
    if (ensemble.checkpoints.size() < 2)
        throw std::invalid_argument("needs at least one test checkpoint plus the horizon");
    if (!(predicted_variance > 0.0))
        throw std::invalid_argument("predicted variance must be positive");
    const std::vector<double>& tail = which == TailKind::Z ? table.z : table.t;
    if (!(which == TailKind::Z ? table.z_valid : table.t_valid))
        throw std::invalid_argument("tail sequence is not summable for this family");
    std::uint64_t n_big = ensemble.checkpoints.back();
    if (table.N < n_big)
        throw std::invalid_argument("scaling table does not cover the estimation horizon");
    for (std::size_t j = 0; j + 1 < ensemble.checkpoints.size(); ++j) {
        std::uint64_t n = ensemble.checkpoints[j];
        if (n_big <= n) throw std::invalid_argument("estimation horizon at or below a test checkpoint");
        if (static_cast<double>(n_big) < horizon_ratio * static_cast<double>(n))
            throw std::invalid_argument("estimation horizon closer than " + fmt(horizon_ratio) +
                                        "x the test checkpoint");
    }

    TestReport rep;
    rep.kind = "drift_fluctuation";
    rep.m = ensemble.m;
    rep.master_seed = ensemble.master_seed;
    double c_delta = ks_critical(delta);
    double threshold = c_delta / std::sqrt(static_cast<double>(ensemble.m));
    rep.info["delta"] = delta;
    rep.info["c_delta"] = c_delta;
    rep.info["predicted_variance"] = predicted_variance;
    rep.info["horizon"] = static_cast<double>(n_big);

    std::size_t last = ensemble.checkpoints.size() - 1;
    double a_big = table.a(n_big);
    std::vector<double> mhat(ensemble.m);
    for (std::uint64_t i = 0; i < ensemble.m; ++i)
        mhat[i] = (static_cast<double>(ensemble.at(i, last)) - mean_at_checkpoints[last]) / a_big;

    bool any_spread = false;
    std::vector<double> sample(ensemble.m);
    for (std::size_t j = 0; j < last; ++j) {
        std::uint64_t n = ensemble.checkpoints[j];
        double a_n = table.a(n);
        double window = tail[n - 1] - tail[n_big - 1];
        CheckRow row;
        row.n = n;
        row.threshold = threshold;
        row.mandatory = j + 1 == last;
        if (window <= 0.0) {
            row.statistic = 0.0;
            row.mandatory = false;
            row.pass = true;
            row.note = "degenerate window: tail mass between n and the horizon is zero";
            rep.rows.push_back(std::move(row));
            continue;
        }
        double denom = a_n * std::sqrt(window);
        for (std::uint64_t i = 0; i < ensemble.m; ++i)
            sample[i] = (static_cast<double>(ensemble.at(i, j)) - mean_at_checkpoints[j] -
                         a_n * mhat[i]) /
                        denom;
        auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
        if (*lo == *hi) {
            row.statistic = 0.0;
            row.mandatory = false;
            row.pass = true;
            row.note = "degenerate residual sample: no spread";
            rep.rows.push_back(std::move(row));
            continue;
        }
        any_spread = true;
        row.statistic = ks_distance(sample, 0.0, predicted_variance);
        row.pass = row.statistic <= row.threshold;
        row.note = row.mandatory ? "KS distance of drift residuals, gating checkpoint"
                                 : "KS distance of drift residuals, informational";
        rep.rows.push_back(std::move(row));
    }
    rep.degenerate = !any_spread;
    rep.finalize();
    return rep;
}

LilExtremes lil_extremes(std::span<const std::int64_t> steps, std::span<const double> mean,
                         std::span<const double> log_a, std::span<const double> seq) {
    if (steps.empty()) throw std::invalid_argument("trajectory has no step record");
    std::uint64_t N = steps.size();
    if (mean.size() < N || log_a.size() < N || seq.size() < N)
        throw std::invalid_argument("per-step tables shorter than the trajectory");
    constexpr double kE = 2.718281828459045;
    LilExtremes ext;
    for (std::uint64_t n = std::max<std::uint64_t>(1, N / 100); n <= N; ++n) {
        double t = seq[n - 1];
        if (!(t > kE)) continue; // phi undefined below e
        double phi = std::sqrt(2.0 * t * std::log(std::log(t)));
        double x = (static_cast<double>(steps[n - 1]) - mean[n - 1]) /
                   (std::exp(log_a[n - 1]) * phi);
        ext.plus = std::max(ext.plus, x);
        ext.minus = std::max(ext.minus, -x);
    }
    return ext;
}

TestReport verify_lil(std::span<const double> extremes, double envelope_sq, double slack_lo,
                      double slack_hi) {
    if (extremes.empty()) throw std::invalid_argument("no extremes supplied");
    if (envelope_sq < 0.0) throw std::invalid_argument("negative envelope");
    TestReport rep;
    rep.kind = "lil";
    rep.heuristic = true;
    rep.m = extremes.size();
    rep.info["envelope_sq"] = envelope_sq;
    rep.info["slack_lo"] = slack_lo;
    rep.info["slack_hi"] = slack_hi;

    bool all_zero = std::all_of(extremes.begin(), extremes.end(),
                                [](double x) { return x == 0.0; });
    if (envelope_sq == 0.0 || all_zero) {
        rep.degenerate = true;
        CheckRow row;
        row.statistic = 0.0;
        row.threshold = 0.0;
        row.mandatory = false;
        row.pass = true;
        row.note = "degenerate: zero envelope or frozen trajectories";
        rep.rows.push_back(std::move(row));
        rep.finalize();
        return rep;
    }

    double envelope = std::sqrt(envelope_sq);
    double lo = (1.0 - slack_lo) * envelope;
    double hi = (1.0 + slack_hi) * envelope;
    double med = median_of({extremes.begin(), extremes.end()});
    std::size_t in_band = 0;
    for (double x : extremes)
        if (x >= lo && x <= hi) ++in_band;
    rep.info["envelope"] = envelope;
    rep.info["band_lo"] = lo;
    rep.info["band_hi"] = hi;
    rep.info["fraction_in_band"] =
        static_cast<double>(in_band) / static_cast<double>(extremes.size());

    CheckRow row;
    row.statistic = med;
    row.threshold = hi;
    row.pass = med >= lo && med <= hi;
    row.note = "median extreme vs band [" + fmt(lo) + ", " + fmt(hi) + "], advisory";
    rep.rows.push_back(std::move(row));

    CheckRow count_row;
    count_row.statistic = static_cast<double>(extremes.size());
    count_row.threshold = 20.0;
    count_row.mandatory = false;
    count_row.pass = extremes.size() >= 20;
    count_row.note = "extreme count (20+ recommended)";
    rep.rows.push_back(std::move(count_row));
    rep.finalize();
    return rep;
}

std::vector<double> quad_variation_curve(const Trajectory& traj, const AlphaFamily& alpha,
                                         const EpsFamily& eps, double q) {
    if (traj.steps.empty()) throw std::invalid_argument("trajectory has no step record");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0,1]");
    std::uint64_t N = traj.steps.size();
    std::vector<double> curve(N);
    KahanSum acc;
    acc.add(4.0 * q * (1.0 - q)); // Var(S_1), a_1 = 1
    curve[0] = acc.value();
    KahanSum log_a; // log a_n, advanced to n before the n-th increment
    for (std::uint64_t n = 2; n <= N; ++n) {
        double k = static_cast<double>(n - 1);
        double ak = eval_alpha(alpha, n - 1);
        double ek = eval_eps(eps, n - 1);
        log_a.add(std::log1p(ak / k));
        double h = ak * static_cast<double>(traj.steps[n - 2]) / k + (1.0 - ak) * ek;
        acc.add((1.0 - h * h) * std::exp(-2.0 * log_a.value()));
        curve[n - 1] = acc.value();
    }
    return curve;
}

TestReport verify_rate(const EnsembleStats& ensemble, const EpsFamily& eps, double alpha,
                       double rho, double rel_tol) {
    if (ensemble.m == 0 || ensemble.checkpoints.empty())
        throw std::invalid_argument("empty ensemble");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0,1)");
    if (!(rho >= 0.0 && rho < 0.5)) throw std::invalid_argument("rho must lie in [0,1/2)");
    if (!(alpha + rho < 1.0)) throw std::invalid_argument("alpha + rho must be below 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    double target = -(1.0 - alpha) / (1.0 - (alpha + rho));

    TestReport rep;
    rep.kind = "rate";
    rep.m = ensemble.m;
    rep.master_seed = ensemble.master_seed;
    rep.info["target"] = target;
    rep.info["rel_tol"] = rel_tol;

    std::size_t ncp = ensemble.checkpoints.size();
    std::vector<double> stat(ensemble.m);
    for (std::size_t j = 0; j < ncp; ++j) {
        std::uint64_t n = ensemble.checkpoints[j];
        double en = eval_eps(eps, n);
        if (en == 1.0) throw std::invalid_argument("bias equals one at a checkpoint");
        double nd = static_cast<double>(n);
        for (std::uint64_t i = 0; i < ensemble.m; ++i)
            stat[i] = (static_cast<double>(ensemble.at(i, j)) / nd - 1.0) / (1.0 - en);
        double med = median_of(stat);
        CheckRow row;
        row.n = n;
        row.statistic = std::abs(med / target - 1.0);
        row.threshold = rel_tol;
        row.mandatory = j + 1 == ncp;
        row.pass = row.statistic <= row.threshold;
        row.note = "median " + fmt(med) + " vs target " + fmt(target) +
                   (row.mandatory ? ", gating" : ", informational");
        rep.rows.push_back(std::move(row));
    }
    rep.finalize();
    return rep;
}

} // namespace gerw
