#pragma once

#include "gerw/families.hpp"
#include "gerw/growth.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gerw {

// Variance factor of the gaussian fluctuations driven by a slowly vanishing
// bias: c(alpha, rho) = (1-alpha)(1-rho)/(1-(alpha+rho)).  Defined for
// alpha in [0,1] and rho >= 0 with alpha+rho < 1; c(alpha, 0) = 1 and c is
// strictly increasing in rho for fixed alpha in (0,1).
double c_alpha_rho(double alpha, double rho);

// Centering constant of the diffusive gaussian law,
//     mu = lim (1-alpha) w_n^{-1/2} sum_{k<=n} eps_k/a_k,
// defined when eps_n -> 0 and sum 1/a_n^2 = inf.  A positive eps limit with
// divergent sum 1/a_n^2 forces mu = inf; everything else is Nonexistent.
struct MuResult {
    enum class Kind { Finite, Infinite, Nonexistent };
    Kind kind = Kind::Nonexistent;
    double value = 0.0; // meaningful only when Finite
    std::string note;
};
MuResult mu_limit(const AlphaFamily& alpha, const EpsFamily& eps);

// c_* = 2q-1 + sum_{k>=1} (1-alpha_k) eps_k / a_k, the constant with
// E[S_n] ~ c_* a_n when the series converges: exact compensated summation to
// the cutoff plus a Karamata tail estimate.  Throws std::domain_error when
// the series diverges or its behavior is undecidable.
double drift_limit_constant(const AlphaFamily& alpha, const EpsFamily& eps,
                            double q, std::uint64_t cutoff = 1'000'000);

enum class LawKind { Constant, Normal, RandomDrift, Unclassified };
enum class ScaleKind { None, R, A, ASqrtW, ASqrtV, ASqrtZ, ASqrtT };
std::string law_name(LawKind k);
std::string scale_name(ScaleKind k); // "r_n", "a_n", "a_n*sqrt(w_n)", ...

// One tested hypothesis.  Condition names are stable machine identifiers;
// the label is a pure function of these entries (see label_from_trace).
struct TraceEntry {
    std::string condition;
    Tri value = Tri::Unknown;
    std::string source; // the family fact that decided it
};

// One applicable limit/fluctuation statement.
struct RegimeResult {
    std::string tag; // stable: "lln-growth", "clt-mean", "drift-limit", ...
    ScaleKind scale = ScaleKind::None;
    std::string statement;
    bool primary = false;
};

struct RegimeReport {
    LawKind law = LawKind::Unclassified;
    std::string law_detail;          // rendered primary-law statement

    // law-specific payloads
    GrowthForm r_form;               // Constant: shape of the growth scale
    bool r_constant_known = false;   //   (its constant, when it has one)
    double mu = 0.0;                 // Normal: S_n/(a_n sqrt(w_n)) -> N(mu, 1)
    double c_star = 0.0;             // RandomDrift: S_n/a_n -> M + c_*
    std::string unclassified_reason;

    ScaleKind scaling = ScaleKind::None;    // scale of the primary result
    std::vector<std::string> modes;         // "a.s.", "L2", "distribution"
    std::vector<TraceEntry> trace;
    std::vector<RegimeResult> results;
    std::map<std::string, double> constants;

    // verification orchestration: which statistical test gates this regime
    std::string verification_gate = "none"; // "lln"|"clt"|"drift_fluctuation"|"none"
    ScaleKind gate_scale = ScaleKind::None;
    double gate_variance = 0.0;
    double lil_envelope = 0.0;   // sqrt(gate_variance)
    bool lil_log_abs = false;    // envelope gauge uses log|log t| (tail scales)

    std::string alpha_desc, eps_desc;
    double q = 0.5;

    std::string to_json() const;
};

// Decision ladder over the divergence certificates and growth-scale
// certificates of the parameter pair.  q enters only through c_*.
RegimeReport classify(const AlphaFamily& alpha, const EpsFamily& eps, double q);

// The decision core: primary law and verification gate as a pure function of
// the named trace conditions.  classify() itself routes through this, so a
// report's label is re-derivable from its serialized trace.
std::pair<LawKind, std::string> label_from_trace(const std::vector<TraceEntry>& trace);

// Phase diagram over (kappa, eta) for the pair
//     alpha_n = alpha + kappa/(log n)^theta,
//     eps_n   = (log n)^{eta-1} / n^{1-alpha}.
// Each cell carries the primary-law label of classify: "constant",
// "normal(mu,1)", "random-drift", or "unclassified".  Cells are independent
// and evaluated in parallel.
struct PhaseCell {
    double kappa = 0.0, eta = 0.0;
    std::string label;
};
std::vector<PhaseCell> phase_diagram(double theta, double alpha,
                                     const std::vector<double>& kappa_grid,
                                     const std::vector<double>& eta_grid);

} // namespace gerw
