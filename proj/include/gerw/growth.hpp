#pragma once

#include <optional>
#include <string>

namespace gerw {

// Symbolic asymptotic shape
//
//     f(n) = K * A^a_pow * n^p * (log n)^s * (log log n)^u * exp(c * (log n)^m)
//
// where A stands for an unknown positive multiplicative constant (the limit
// of a slowly varying correction that has no closed form).  Carrying the
// power of A through products, ratios and sum transforms lets downstream
// limits that do not depend on A come out with explicit constants, while
// limits that do depend on A are reported as "constant unknown".
//
// The exponential term only appears with sub-power m in (0,1); c == 0 means
// no exponential factor and m is ignored.
struct GrowthForm {
    double K = 1.0;
    double a_pow = 0.0;
    double p = 0.0;
    double s = 0.0;
    double u = 0.0;
    double c = 0.0;
    double m = 0.0;

    bool has_exp() const { return c != 0.0; }

    // Numeric value with A = 1.  Requires n >= 3 when u != 0.
    double eval(double n) const;

    std::string str() const;
};

GrowthForm gf_mul(const GrowthForm& f, const GrowthForm& g);
GrowthForm gf_div(const GrowthForm& f, const GrowthForm& g);
GrowthForm gf_pow(const GrowthForm& f, double e);
inline GrowthForm gf_sqrt(const GrowthForm& f) { return gf_pow(f, 0.5); }
GrowthForm gf_scale(const GrowthForm& f, double k);

// Does sum_n f(n) diverge?  Decides by the integral test on the shape:
// the power of n first, then the stretched-exponential factor, then the
// log and log-log powers.  K is assumed nonnegative; K == 0 converges.
bool sum_diverges(const GrowthForm& f);

// Asymptotic shape of the partial sums sum_{k<=n} f(k) for divergent f.
// Returns nullopt when f converges or when the divergence sits beyond the
// log-log level (would need log log log factors).
std::optional<GrowthForm> partial_sum_form(const GrowthForm& f);

// Asymptotic shape of the tail sum_{k>=n} f(k) for convergent f (Karamata:
// the tail of k^p L(k) with p < -1 is ~ n^{p+1} L(n)/(-p-1), with the
// analogous statements at the log levels).  nullopt outside the rules.
std::optional<GrowthForm> tail_sum_form(const GrowthForm& f);

// lim_{n->inf} f(n)/g(n) in [0, inf]; nullopt when the two forms carry
// different powers of the unknown constant A (the limit would depend on A).
// Comparison is lexicographic: n-power, then exponential factors (larger
// sub-power m dominates), then log power, log-log power, and finally K.
std::optional<double> ratio_limit(const GrowthForm& f, const GrowthForm& g);

} // namespace gerw
