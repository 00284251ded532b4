#include "gerw/families.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace gerw {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

} // namespace

AlphaFamily AlphaFamily::constant(double a) {
    require(a >= 0.0 && a <= 1.0, "alpha constant must lie in [0,1]");
    AlphaFamily f;
    f.kind = AlphaKind::Constant;
    f.alpha = a;
    return f;
}

AlphaFamily AlphaFamily::log_corrected(double a, double k, double t) {
    require(t > 0.0, "log-corrected alpha needs theta > 0");
    AlphaFamily f;
    f.kind = AlphaKind::LogCorrected;
    f.alpha = a;
    f.kappa = k;
    f.theta = t;
    return f;
}

AlphaFamily AlphaFamily::approach_one(double k, double t) {
    require(k > 0.0, "approach-one alpha needs kappa > 0");
    require(t > 0.0, "approach-one alpha needs theta > 0");
    AlphaFamily f;
    f.kind = AlphaKind::ApproachOne;
    f.kappa = k;
    f.theta = t;
    return f;
}

AlphaFamily AlphaFamily::table(std::vector<double> v) {
    require(!v.empty(), "alpha table must be nonempty");
    for (double x : v) require(x >= 0.0 && x <= 1.0, "alpha table values must lie in [0,1]");
    AlphaFamily f;
    f.kind = AlphaKind::Table;
    f.values = std::move(v);
    return f;
}

double AlphaFamily::limit() const {
    switch (kind) {
    case AlphaKind::Constant: return alpha;
    case AlphaKind::LogCorrected: return std::clamp(alpha, 0.0, 1.0);
    case AlphaKind::ApproachOne: return 1.0;
    case AlphaKind::Table: return std::numeric_limits<double>::quiet_NaN();
    }
    return 0.0;
}

std::string AlphaFamily::describe() const {
    switch (kind) {
    case AlphaKind::Constant: return fmt("constant(alpha=%g)", alpha);
    case AlphaKind::LogCorrected: return fmt("log_corrected(alpha=%g,kappa=%g,theta=%g)", alpha, kappa, theta);
    case AlphaKind::ApproachOne: return fmt("approach_one(kappa=%g,theta=%g)", kappa, theta);
    case AlphaKind::Table: return fmt("table[%g entries]", (double)values.size());
    }
    return "?";
}

EpsFamily EpsFamily::constant(double e) {
    require(e >= 0.0 && e <= 1.0, "eps constant must lie in [0,1]");
    EpsFamily f;
    f.kind = EpsKind::Constant;
    f.eps = e;
    return f;
}

EpsFamily EpsFamily::power_law(double rho) {
    require(rho >= 0.0, "power-law eps needs rho >= 0");
    EpsFamily f;
    f.kind = EpsKind::PowerLaw;
    f.rho = rho;
    return f;
}

EpsFamily EpsFamily::log_over_power(double eta, double beta) {
    require(beta > 0.0 && beta <= 1.0, "log-over-power eps needs beta in (0,1]");
    EpsFamily f;
    f.kind = EpsKind::LogOverPower;
    f.eta = eta;
    f.beta = beta;
    return f;
}

EpsFamily EpsFamily::inverse_log_power(double eta) {
    require(eta > 0.0, "inverse-log-power eps needs eta > 0");
    EpsFamily f;
    f.kind = EpsKind::InverseLogPower;
    f.eta = eta;
    return f;
}

EpsFamily EpsFamily::one_minus_power_law(double rho) {
    EpsFamily f = power_law(rho);
    f.kind = EpsKind::OneMinusPowerLaw;
    return f;
}

EpsFamily EpsFamily::one_minus_log_over_power(double eta, double beta) {
    EpsFamily f = log_over_power(eta, beta);
    f.kind = EpsKind::OneMinusLogOverPower;
    return f;
}

EpsFamily EpsFamily::one_minus_inverse_log_power(double eta) {
    EpsFamily f = inverse_log_power(eta);
    f.kind = EpsKind::OneMinusInverseLogPower;
    return f;
}

EpsFamily EpsFamily::table(std::vector<double> v) {
    require(!v.empty(), "eps table must be nonempty");
    for (double x : v) require(x >= 0.0 && x <= 1.0, "eps table values must lie in [0,1]");
    EpsFamily f;
    f.kind = EpsKind::Table;
    f.values = std::move(v);
    return f;
}

double EpsFamily::limit() const {
    switch (kind) {
    case EpsKind::Constant: return eps;
    case EpsKind::PowerLaw: return rho > 0.0 ? 0.0 : 1.0;
    case EpsKind::LogOverPower: return 0.0;
    case EpsKind::InverseLogPower: return 0.0;
    case EpsKind::OneMinusPowerLaw: return rho > 0.0 ? 1.0 : 0.0;
    case EpsKind::OneMinusLogOverPower: return 1.0;
    case EpsKind::OneMinusInverseLogPower: return 1.0;
    case EpsKind::Table: return std::numeric_limits<double>::quiet_NaN();
    }
    return 0.0;
}

std::string EpsFamily::describe() const {
    switch (kind) {
    case EpsKind::Constant: return fmt("constant(eps=%g)", eps);
    case EpsKind::PowerLaw: return fmt("power_law(rho=%g)", rho);
    case EpsKind::LogOverPower: return fmt("log_over_power(eta=%g,beta=%g)", eta, beta);
    case EpsKind::InverseLogPower: return fmt("inverse_log_power(eta=%g)", eta);
    case EpsKind::OneMinusPowerLaw: return fmt("one_minus_power_law(rho=%g)", rho);
    case EpsKind::OneMinusLogOverPower: return fmt("one_minus_log_over_power(eta=%g,beta=%g)", eta, beta);
    case EpsKind::OneMinusInverseLogPower: return fmt("one_minus_inverse_log_power(eta=%g)", eta);
    case EpsKind::Table: return fmt("table[%g entries]", (double)values.size());
    }
    return "?";
}

namespace {

double clamp01(double raw, bool* clamped) {
    if (raw < 0.0) {
        if (clamped) *clamped = true;
        return 0.0;
    }
    if (raw > 1.0) {
        if (clamped) *clamped = true;
        return 1.0;
    }
    return raw;
}

} // namespace

double eval_alpha(const AlphaFamily& f, std::uint64_t n, bool* clamped) {
    if (n == 0) throw std::invalid_argument("eval_alpha: n must be >= 1");
    if (clamped) *clamped = false;
    switch (f.kind) {
    case AlphaKind::Constant:
        return f.alpha;
    case AlphaKind::LogCorrected: {
        double raw = (n == 1) ? f.alpha
                              : f.alpha + f.kappa / std::pow(std::log((double)n), f.theta);
        return clamp01(raw, clamped);
    }
    case AlphaKind::ApproachOne: {
        double raw = (n == 1) ? 1.0
                              : 1.0 - f.kappa / std::pow(std::log((double)n), f.theta);
        return clamp01(raw, clamped);
    }
    case AlphaKind::Table:
        if (n > f.values.size()) throw std::out_of_range("alpha table shorter than requested n");
        return f.values[n - 1];
    }
    return 0.0;
}

double eval_eps(const EpsFamily& f, std::uint64_t n, bool* clamped) {
    if (n == 0) throw std::invalid_argument("eval_eps: n must be >= 1");
    if (clamped) *clamped = false;
    double ln = n > 1 ? std::log((double)n) : 0.0;
    switch (f.kind) {
    case EpsKind::Constant:
        return f.eps;
    case EpsKind::PowerLaw:
        return std::exp(-f.rho * ln); // n^{-rho}, exact at n = 1 too
    case EpsKind::LogOverPower: {
        if (n == 1) return 0.0; // log-singular; limit value by convention
        double raw = std::pow(ln, f.eta - 1.0) * std::exp(-f.beta * ln);
        return clamp01(raw, clamped);
    }
    case EpsKind::InverseLogPower: {
        if (n == 1) return 0.0;
        return clamp01(std::pow(ln, -f.eta), clamped);
    }
    case EpsKind::OneMinusPowerLaw:
        return -std::expm1(-f.rho * ln); // 1 - n^{-rho} in [0,1] exactly
    case EpsKind::OneMinusLogOverPower: {
        if (n == 1) return 1.0;
        double raw = 1.0 - std::pow(ln, f.eta - 1.0) * std::exp(-f.beta * ln);
        return clamp01(raw, clamped);
    }
    case EpsKind::OneMinusInverseLogPower: {
        if (n == 1) return 1.0;
        return clamp01(1.0 - std::pow(ln, -f.eta), clamped);
    }
    case EpsKind::Table:
        if (n > f.values.size()) throw std::out_of_range("eps table shorter than requested n");
        return f.values[n - 1];
    }
    return 0.0;
}

double one_minus_alpha(const AlphaFamily& f, std::uint64_t n) {
    switch (f.kind) {
    case AlphaKind::ApproachOne: {
        if (n == 1) return 0.0;
        double x = f.kappa / std::pow(std::log((double)n), f.theta);
        return x > 1.0 ? 1.0 : x; // alpha clamped to 0 below
    }
    case AlphaKind::LogCorrected:
        if (f.alpha == 1.0 && f.kappa < 0.0 && n > 1) {
            double x = -f.kappa / std::pow(std::log((double)n), f.theta);
            return x > 1.0 ? 1.0 : x;
        }
        return 1.0 - eval_alpha(f, n);
    default:
        return 1.0 - eval_alpha(f, n);
    }
}

double one_minus_eps(const EpsFamily& f, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("one_minus_eps: n must be >= 1");
    double ln = n > 1 ? std::log((double)n) : 0.0;
    switch (f.kind) {
    case EpsKind::PowerLaw:
        return -std::expm1(-f.rho * ln); // 1 - n^{-rho}
    case EpsKind::OneMinusPowerLaw:
        return std::exp(-f.rho * ln); // n^{-rho} exactly
    case EpsKind::OneMinusLogOverPower: {
        if (n == 1) return 0.0;
        double x = std::pow(ln, f.eta - 1.0) * std::exp(-f.beta * ln);
        return x > 1.0 ? 1.0 : x;
    }
    case EpsKind::OneMinusInverseLogPower: {
        if (n == 1) return 0.0;
        double x = std::pow(ln, -f.eta);
        return x > 1.0 ? 1.0 : x;
    }
    default:
        return 1.0 - eval_eps(f, n);
    }
}

double one_minus_eps_sq(const EpsFamily& f, std::uint64_t n) {
    return one_minus_eps(f, n) * (1.0 + eval_eps(f, n));
}

std::uint64_t first_clamp_index(const AlphaFamily& f, std::uint64_t horizon) {
    bool c = false;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        eval_alpha(f, n, &c);
        if (c) return n;
    }
    return 0;
}

std::uint64_t first_clamp_index(const EpsFamily& f, std::uint64_t horizon) {
    bool c = false;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        eval_eps(f, n, &c);
        if (c) return n;
    }
    return 0;
}

namespace {

// Log-correction factor of the product shape: the factor exp(kappa * sum
// 1/(k (log k)^theta)) turns into (log n)^kappa for theta = 1, a stretched
// exponential for theta < 1, and a constant for theta > 1.
void apply_log_correction(GrowthForm& f, double kappa, double theta) {
    if (kappa == 0.0) return;
    if (theta == 1.0) {
        f.s += kappa;
    } else if (theta < 1.0) {
        f.c = kappa / (1.0 - theta);
        f.m = 1.0 - theta;
    }
    // theta > 1: the correction converges into the unknown constant
}

struct AlphaForms {
    GrowthForm a;          // shape of a_n = prod (1 + alpha_k/k)
    bool a_known;          // multiplicative constant explicit (a_pow == 0)
    GrowthForm om;         // shape of 1 - alpha_n
    bool om_zero;          // alpha_n == 1 for all large n
};

AlphaForms alpha_forms(const AlphaFamily& f) {
    AlphaForms r;
    switch (f.kind) {
    case AlphaKind::Constant: {
        double a = f.alpha;
        // a_n = Gamma(n+a) / (Gamma(n) Gamma(1+a)) ~ n^a / Gamma(1+a)
        r.a = GrowthForm{1.0 / std::tgamma(1.0 + a), 0.0, a, 0, 0, 0, 0};
        r.a_known = true;
        r.om = GrowthForm{1.0 - a, 0, 0, 0, 0, 0, 0};
        r.om_zero = (a == 1.0);
        return r;
    }
    case AlphaKind::ApproachOne: {
        r.a = GrowthForm{1.0, 1.0, 1.0, 0, 0, 0, 0};
        apply_log_correction(r.a, -f.kappa, f.theta);
        r.a_known = false;
        r.om = GrowthForm{f.kappa, 0, 0, -f.theta, 0, 0, 0};
        r.om_zero = false;
        return r;
    }
    case AlphaKind::LogCorrected: {
        double a = f.alpha, k = f.kappa;
        if (k == 0.0 || (a >= 1.0 && k > 0.0) || (a <= 0.0 && k < 0.0) || a > 1.0 || a < 0.0) {
            // clamping (or kappa = 0) makes the sequence eventually constant
            double L = std::clamp(a, 0.0, 1.0);
            bool everywhere = (k == 0.0 && a >= 0.0 && a <= 1.0) ||
                              (L == 1.0 && k >= 0.0 && a >= 1.0) ||
                              (L == 0.0 && k <= 0.0 && a <= 0.0);
            r.a = GrowthForm{everywhere ? 1.0 / std::tgamma(1.0 + L) : 1.0,
                             everywhere ? 0.0 : 1.0, L, 0, 0, 0, 0};
            r.a_known = everywhere;
            r.om = GrowthForm{1.0 - L, 0, 0, 0, 0, 0, 0};
            r.om_zero = (L == 1.0);
            return r;
        }
        if (a == 1.0) { // k < 0 here: approaches 1 from below
            r.a = GrowthForm{1.0, 1.0, 1.0, 0, 0, 0, 0};
            apply_log_correction(r.a, k, f.theta);
            r.a_known = false;
            r.om = GrowthForm{-k, 0, 0, -f.theta, 0, 0, 0};
            r.om_zero = false;
            return r;
        }
        // 0 <= a < 1 with a genuine log correction
        r.a = GrowthForm{1.0, 1.0, a, 0, 0, 0, 0};
        apply_log_correction(r.a, k, f.theta);
        r.a_known = false;
        r.om = GrowthForm{1.0 - a, 0, 0, 0, 0, 0, 0};
        r.om_zero = false;
        return r;
    }
    case AlphaKind::Table:
        break;
    }
    return r;
}

struct EpsForms {
    GrowthForm e;   // shape of eps_n
    bool e_zero;
    GrowthForm om;  // shape of 1 - eps_n
    bool om_zero;
};

EpsForms eps_forms(const EpsFamily& f) {
    EpsForms r;
    auto flat = [](double k) { return GrowthForm{k, 0, 0, 0, 0, 0, 0}; };
    switch (f.kind) {
    case EpsKind::Constant:
        r.e = flat(f.eps);
        r.e_zero = (f.eps == 0.0);
        r.om = flat(1.0 - f.eps);
        r.om_zero = (f.eps == 1.0);
        return r;
    case EpsKind::PowerLaw:
        r.e = GrowthForm{1.0, 0, -f.rho, 0, 0, 0, 0};
        r.e_zero = false;
        r.om = flat(1.0);
        r.om_zero = (f.rho == 0.0); // eps == 1 identically
        return r;
    case EpsKind::LogOverPower:
        r.e = GrowthForm{1.0, 0, -f.beta, f.eta - 1.0, 0, 0, 0};
        r.e_zero = false;
        r.om = flat(1.0);
        r.om_zero = false;
        return r;
    case EpsKind::InverseLogPower:
        r.e = GrowthForm{1.0, 0, 0, -f.eta, 0, 0, 0};
        r.e_zero = false;
        r.om = flat(1.0);
        r.om_zero = false;
        return r;
    case EpsKind::OneMinusPowerLaw:
        r.e = flat(1.0);
        r.e_zero = (f.rho == 0.0); // eps == 0 identically
        r.om = GrowthForm{1.0, 0, -f.rho, 0, 0, 0, 0};
        r.om_zero = false;
        return r;
    case EpsKind::OneMinusLogOverPower:
        r.e = flat(1.0);
        r.e_zero = false;
        r.om = GrowthForm{1.0, 0, -f.beta, f.eta - 1.0, 0, 0, 0};
        r.om_zero = false;
        return r;
    case EpsKind::OneMinusInverseLogPower:
        r.e = flat(1.0);
        r.e_zero = false;
        r.om = GrowthForm{1.0, 0, 0, -f.eta, 0, 0, 0};
        r.om_zero = false;
        return r;
    case EpsKind::Table:
        break;
    }
    return r;
}

} // namespace

FamilyMetadata family_metadata(const AlphaFamily& alpha, const EpsFamily& eps) {
    FamilyMetadata md;
    md.alpha_limit = alpha.limit();
    md.eps_limit = eps.limit();
    md.parametric = (alpha.kind != AlphaKind::Table) && (eps.kind != EpsKind::Table);
    if (!md.parametric) return md;

    AlphaForms af = alpha_forms(alpha);
    EpsForms ef = eps_forms(eps);
    md.a_form = af.a;
    md.a_constant_known = af.a_known;
    md.one_minus_alpha_form = af.om;
    md.one_minus_alpha_zero = af.om_zero;
    md.eps_form = ef.e;
    md.eps_zero = ef.e_zero;
    md.one_minus_eps_form = ef.om;
    md.one_minus_eps_zero = ef.om_zero;

    md.eps_rv_index = ef.e_zero ? std::nullopt : std::optional<double>(ef.e.p);
    md.one_minus_eps_rv_index = ef.om_zero ? std::nullopt : std::optional<double>(ef.om.p);

    GrowthForm inv_n{1.0, 0, -1.0, 0, 0, 0, 0};
    GrowthForm inv_a2 = gf_pow(af.a, -2.0);

    md.sum_one_minus_alpha_over_n_diverges =
        af.om_zero ? Tri::False
                   : (sum_diverges(gf_mul(af.om, inv_n)) ? Tri::True : Tri::False);
    md.sum_inv_a_sq_diverges = sum_diverges(inv_a2) ? Tri::True : Tri::False;
    md.sum_one_minus_eps_over_a_sq_diverges =
        ef.om_zero ? Tri::False
                   : (sum_diverges(gf_mul(ef.om, inv_a2)) ? Tri::True : Tri::False);
    if (ef.e_zero || af.om_zero) {
        md.drift_sum_converges = Tri::True;
    } else {
        GrowthForm summand = gf_mul(gf_mul(af.om, ef.e), gf_pow(af.a, -1.0));
        md.drift_sum_converges = sum_diverges(summand) ? Tri::False : Tri::True;
    }
    return md;
}

} // namespace gerw
