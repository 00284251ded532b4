#pragma once

#include "gerw/families.hpp"
#include "gerw/growth.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gerw {

// All deterministic sequences attached to a parameter pair, 1-indexed by n
// (stored at [n-1]).  Products are accumulated in the log domain with
// compensated summation; the growth factors a_n, b_n reach n^2 scales and
// would overflow fixed-precision products long before n = 1e7.
//
//   a_n   = prod_{k<n} (1 + alpha_k/k)         (log_a)
//   b_n   = prod_{k<n} (1 + 2 alpha_k/k)       (log_b)
//   g_n   = prod_{k<n} (1 + alpha/k)           (Gamma ratio part, alpha = limit)
//   l_n   = prod_{k<n} (1 + (alpha_k-alpha)/(k+alpha))   (slowly varying part)
//   rho_n = exp(sum_{k<n} (alpha_k-alpha)/k)
//   w_n   = sum_{k<=n} 1/a_k^2
//   v_n   = sum_{k<=n} (1-eps_k^2)/a_k^2
//   r_n   = a_n * sum_{k<=n} (1-alpha_k) eps_k / a_k
//   z_n   = sum_{k>=n} 1/a_k^2               (when convergent)
//   t_n   = sum_{k>=n} (1-eps_k^2)/a_k^2     (when convergent)
//
// a_n = g_n * l_n holds exactly (per-factor algebraic identity); the table
// computes both sides independently so tests can verify it.
// For Table alpha families the limit alpha is undefined and g, l, rho are NaN.
struct ScalingTable {
    std::uint64_t N = 0;
    std::vector<double> log_a, log_b, g, l, rho, w, v, r;
    std::vector<double> z, t;          // tail estimates (empty when divergent)
    std::vector<double> z_err, t_err;  // relative-error bounds for z, t
    bool z_valid = false, t_valid = false;
    std::uint64_t first_clamp_alpha = 0, first_clamp_eps = 0; // 0 = never

    double a(std::uint64_t n) const { return std::exp(log_a[n - 1]); }
    double b(std::uint64_t n) const { return std::exp(log_b[n - 1]); }

    // numerical estimates of the limit constants (no closed form exists):
    // C0 = lim b_n/a_n^2, C* = lim l_n/rho_n, each from the table horizon
    double c0_estimate() const;
    double c_star_estimate() const;
};

struct TailPolicy {
    std::uint64_t cutoff_min = 1'000'000; // exact summation up to max(N, this)
};

ScalingTable build_table(const AlphaFamily& alpha, const EpsFamily& eps,
                         std::uint64_t N, TailPolicy tail = {});

// g_n = Gamma(n+alpha)/(Gamma(n) Gamma(1+alpha)) via log-Gamma.  For large n
// the difference lgamma(n+alpha)-lgamma(n) is evaluated by a Stirling-series
// difference: the naive subtraction of two lgamma calls loses the whole
// second-order term to cancellation around n = 1e6.
double gamma_ratio_g(double alpha, std::uint64_t n);
double log_gamma_ratio(double z, double alpha); // lgamma(z+alpha) - lgamma(z)

// Second-order coefficient check: n^{1-alpha} (g_n - n^alpha/Gamma(1+alpha))
// from a precomputed log g_n; converges to -alpha(1-alpha)/(2 Gamma(1+alpha)).
double g_second_order_term(double alpha, std::uint64_t n, double log_g);

// Tail sums with certified relative-error bounds.  Exact compensated
// summation runs from n up to the cutoff; the remainder beyond it comes from
// the Karamata estimate (tail of a regularly varying term f at cutoff Nc is
// f(Nc)*Nc/(index-1), generalized through the growth-form tail rules so
// log-corrected shapes are handled too).  Throws std::domain_error when the
// governing series diverges or is undecidable.
enum class TailKind { Z, T };
struct TailEstimate {
    std::vector<double> value;   // value[n-1] = tail from n, n = 1..N
    std::vector<double> rel_err; // bound on |estimate/true - 1|
};
TailEstimate estimate_tail(const AlphaFamily& alpha, const EpsFamily& eps,
                           std::uint64_t N, TailKind which, TailPolicy tail = {});

// Closed-form asymptotic shape for one of the table's sequences, assembled
// from the family shapes via the partial-sum/tail rules.  constant_known is
// false when the multiplicative constant involves an unknown limit.
enum class SeqTarget { A, W, Z, V, T, R };
struct AsymptoteSpec {
    bool known = false;         // false: no closed form for this pair/target
    GrowthForm form;
    bool constant_known = false;
    std::string tag;            // human-readable rendering of the form
};
AsymptoteSpec closed_form_asymptote(const AlphaFamily& alpha, const EpsFamily& eps,
                                    SeqTarget target);

// Partial sums of a nonnegative sequence against its own partial sums:
//   selfconv = sum_{k<=n} c_k * (sum_{l<=k} c_l)
//   expsum   = sum_{k<=n} c_k * exp(sum_{l<=k} c_l)
// (selfconv ~ (sum c)^2/2 and expsum ~ exp(sum c) when sum c diverges).
std::pair<double, double> series_order_sums(std::span<const double> c, std::uint64_t n);

// Compensated (Kahan) accumulator: the table's sums mix magnitudes across
// five orders; plain summation loses the stabilization margins.
struct KahanSum {
    double s = 0.0, comp = 0.0;
    void add(double x) {
        double y = x - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

} // namespace gerw
