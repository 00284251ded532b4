#pragma once

#include "gerw/growth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gerw {

// Memory-parameter sequences {alpha_n}.  All evaluated values are clamped
// into [0,1]; log-corrected variants are singular at n = 1 and return their
// base value there (any single bounded value leaves the asymptotics alone).
enum class AlphaKind { Constant, LogCorrected, ApproachOne, Table };

struct AlphaFamily {
    AlphaKind kind = AlphaKind::Constant;
    double alpha = 0.5; // Constant value / LogCorrected base (also the limit)
    double kappa = 0.0;
    double theta = 1.0;
    std::vector<double> values; // Table

    static AlphaFamily constant(double a);
    static AlphaFamily log_corrected(double a, double k, double t); // a + k/(log n)^t
    static AlphaFamily approach_one(double k, double t);            // 1 - k/(log n)^t
    static AlphaFamily table(std::vector<double> v);

    // limit of alpha_n after clamping; NaN for Table
    double limit() const;
    std::string describe() const;
};

// Drift-parameter sequences {eps_n}, same conventions.
enum class EpsKind {
    Constant,
    PowerLaw,               // n^{-rho}
    LogOverPower,           // (log n)^{eta-1} / n^{beta}
    InverseLogPower,        // 1 / (log n)^{eta}
    OneMinusPowerLaw,       // 1 - n^{-rho}
    OneMinusLogOverPower,   // 1 - (log n)^{eta-1}/n^{beta}
    OneMinusInverseLogPower,// 1 - 1/(log n)^{eta}
    Table
};

struct EpsFamily {
    EpsKind kind = EpsKind::Constant;
    double eps = 0.0;  // Constant value
    double rho = 0.0;
    double eta = 1.0;
    double beta = 1.0;
    std::vector<double> values;

    static EpsFamily constant(double e);
    static EpsFamily power_law(double rho);
    static EpsFamily log_over_power(double eta, double beta);
    static EpsFamily inverse_log_power(double eta);
    static EpsFamily one_minus_power_law(double rho);
    static EpsFamily one_minus_log_over_power(double eta, double beta);
    static EpsFamily one_minus_inverse_log_power(double eta);
    static EpsFamily table(std::vector<double> v);

    double limit() const;
    std::string describe() const;
};

// Evaluation.  n >= 1; Table access past the end throws std::out_of_range.
// *clamped (optional) is set to true when the raw value fell outside [0,1].
double eval_alpha(const AlphaFamily& f, std::uint64_t n, bool* clamped = nullptr);
double eval_eps(const EpsFamily& f, std::uint64_t n, bool* clamped = nullptr);

// Exact complements, avoiding cancellation when the value approaches 1:
// e.g. for eps_n = 1 - n^{-rho} this returns n^{-rho} exactly.
double one_minus_alpha(const AlphaFamily& f, std::uint64_t n);
double one_minus_eps(const EpsFamily& f, std::uint64_t n);
// (1 - eps_n^2) computed as (1 - eps_n)(1 + eps_n)
double one_minus_eps_sq(const EpsFamily& f, std::uint64_t n);

// Smallest n in [1, horizon] whose raw value needed clamping; 0 when none.
std::uint64_t first_clamp_index(const AlphaFamily& f, std::uint64_t horizon);
std::uint64_t first_clamp_index(const EpsFamily& f, std::uint64_t horizon);

// Three-valued answers for the divergence certificates: numeric partial sums
// cannot certify divergence, so these are decided from the symbolic shapes;
// Table families come back Unknown.
enum class Tri { False, True, Unknown };

struct FamilyMetadata {
    bool parametric = false; // both families parametric (divergences decidable)

    double alpha_limit = 0.0; // NaN when unknown
    double eps_limit = 0.0;

    // regular-variation indices: x_n ~ n^index * (slowly varying)
    std::optional<double> eps_rv_index;
    std::optional<double> one_minus_eps_rv_index;

    // divergence certificates
    Tri sum_one_minus_alpha_over_n_diverges = Tri::Unknown; // sum (1-alpha_n)/n
    Tri sum_inv_a_sq_diverges = Tri::Unknown;               // sum 1/a_n^2
    Tri sum_one_minus_eps_over_a_sq_diverges = Tri::Unknown;// sum (1-eps_n)/a_n^2
    Tri drift_sum_converges = Tri::Unknown;                 // sum (1-alpha_n) eps_n / a_n < inf

    // asymptotic shapes (valid only when parametric)
    GrowthForm a_form;          // a_n; a_pow = 1 when the constant is unknown
    bool a_constant_known = false;
    GrowthForm one_minus_alpha_form;
    bool one_minus_alpha_zero = false; // alpha_n == 1 for all large n
    GrowthForm eps_form;
    bool eps_zero = false;
    GrowthForm one_minus_eps_form;
    bool one_minus_eps_zero = false;
};

FamilyMetadata family_metadata(const AlphaFamily& alpha, const EpsFamily& eps);

} // namespace gerw
