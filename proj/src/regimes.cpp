#include "gerw/regimes.hpp"

#include "gerw/scaling.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#ifdef GERW_HAVE_OPENMP
#include <omp.h>
#endif

namespace gerw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

Tri tri(bool b) { return b ? Tri::True : Tri::False; }

const char* tri_name(Tri t) {
    switch (t) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    default: return "unknown";
    }
}

void check_q(double q) {
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("q must lie in [0, 1]");
}

// Trace lookup with Unknown as the default for absent conditions.
Tri lookup(const std::vector<TraceEntry>& trace, const char* name) {
    for (const auto& e : trace)
        if (e.condition == name) return e.value;
    return Tri::Unknown;
}

struct Decision {
    bool growth_as = false, growth_l2 = false, growth = false;
    bool assumption = false; // eps -> 1, divergent sum 1/a^2, bias RV with rho < 1/2
    bool m_inf = false;      // martingale limit certified
    bool drift = false;
    bool normal = false;
    bool gate_dz = false, gate_dt = false; // drift-centered gaussian (z / t scale)
    bool gate_cw = false, gate_cv = false; // mean-centered gaussian (w / v scale)
    LawKind law = LawKind::Unclassified;
    std::string gate = "none";
};

Decision decide(const std::vector<TraceEntry>& trace) {
    Decision d;
    auto t = [&](const char* n) { return lookup(trace, n); };
    if (t("parametric") != Tri::True) return d;

    Tri d2 = t("sum_inv_a_sq_diverges");
    Tri d3 = t("sum_one_minus_eps_over_a_sq_diverges");
    Tri ds = t("drift_sum_converges");

    d.growth_as = t("a_over_r_to_zero") == Tri::True &&
                  t("sum_inv_r_sq_converges") == Tri::True;
    d.growth_l2 = t("a_sqrt_w_over_r_to_zero") == Tri::True;
    d.growth = ds == Tri::False && t("r_asymptote_known") == Tri::True &&
               (d.growth_as || d.growth_l2);

    d.assumption = t("eps_limit_one") == Tri::True && d2 == Tri::True &&
                   t("one_minus_eps_rv") == Tri::True &&
                   t("rv_rho_lt_half") == Tri::True;
    d.m_inf = d2 == Tri::False || (d.assumption && d3 == Tri::False);
    d.drift = ds == Tri::True && d.m_inf;
    d.normal = t("eps_limit_zero") == Tri::True && d2 == Tri::True &&
               t("mu_finite") == Tri::True;

    d.law = d.growth ? LawKind::Constant
          : d.drift  ? LawKind::RandomDrift
          : d.normal ? LawKind::Normal
                     : LawKind::Unclassified;

    // Fluctuation results are primary; the linear-law guard keeps the
    // drift-centered gaussian honest when alpha_n -> 1 so fast that the walk
    // freezes (residual fluctuations vanish).
    d.gate_dz = t("eps_limit_lt_one") == Tri::True && d2 == Tri::False &&
                t("linear_law") == Tri::True;
    d.gate_dt = (t("eps_limit_one") == Tri::True && d2 == Tri::False &&
                 t("one_minus_eps_rv") == Tri::True &&
                 t("alpha_plus_rho_lt_one") == Tri::True) ||
                (d.assumption && d3 == Tri::False);
    d.gate_cw = t("eps_limit_lt_one") == Tri::True && d2 == Tri::True;
    d.gate_cv = d.assumption && d3 == Tri::True;

    d.gate = (d.gate_dz || d.gate_dt) ? "drift_fluctuation"
           : (d.gate_cw || d.gate_cv) ? "clt"
           : d.growth                 ? "lln"
                                      : "none";
    return d;
}

} // namespace

double c_alpha_rho(double alpha, double rho) {
    if (!(alpha >= 0.0 && alpha <= 1.0 && rho >= 0.0 && alpha + rho < 1.0))
        throw std::domain_error(
            "variance factor requires alpha in [0,1], rho >= 0, alpha + rho < 1");
    return (1.0 - alpha) * (1.0 - rho) / (1.0 - (alpha + rho));
}

MuResult mu_limit(const AlphaFamily& alpha, const EpsFamily& eps) {
    FamilyMetadata md = family_metadata(alpha, eps);
    MuResult r;
    if (!md.parametric) {
        r.note = "divergence conditions undecidable for table families";
        return r;
    }
    Tri d2 = md.sum_inv_a_sq_diverges;
    if (md.eps_limit > 0.0) {
        if (d2 == Tri::True) {
            r.kind = MuResult::Kind::Infinite;
            r.note = "positive bias limit with divergent sum 1/a_n^2";
        } else {
            r.note = "defined only when sum 1/a_n^2 diverges";
        }
        return r;
    }
    if (d2 != Tri::True) {
        r.note = "defined only when sum 1/a_n^2 diverges";
        return r;
    }
    if (md.eps_zero) {
        r.kind = MuResult::Kind::Finite;
        r.note = "bias identically zero";
        return r;
    }
    GrowthForm summand = gf_mul(md.eps_form, gf_pow(md.a_form, -1.0));
    if (!sum_diverges(summand)) {
        r.kind = MuResult::Kind::Finite;
        r.note = "sum eps_k/a_k converges while w_n diverges";
        return r;
    }
    auto pe = partial_sum_form(summand);
    auto pw = partial_sum_form(gf_pow(md.a_form, -2.0));
    if (!pe || !pw) {
        r.note = "partial-sum shape beyond the closed-form rules";
        return r;
    }
    auto lim = ratio_limit(*pe, gf_sqrt(*pw));
    if (!lim) {
        r.note = "limit depends on an unknown constant";
        return r;
    }
    if (std::isinf(*lim)) {
        r.kind = MuResult::Kind::Infinite;
        r.note = "bias partial sums outgrow sqrt(w_n)";
        return r;
    }
    r.kind = MuResult::Kind::Finite;
    r.value = (1.0 - md.alpha_limit) * *lim;
    r.note = "closed-form ratio of partial sums";
    return r;
}

double drift_limit_constant(const AlphaFamily& alpha, const EpsFamily& eps,
                            double q, std::uint64_t cutoff) {
    check_q(q);
    FamilyMetadata md = family_metadata(alpha, eps);
    if (md.drift_sum_converges != Tri::True)
        throw std::domain_error("bias-drift series does not converge");
    if (md.eps_zero || md.one_minus_alpha_zero) return 2.0 * q - 1.0;
    if (cutoff < 2) cutoff = 2;

    KahanSum sum, log_a;
    double term = 0.0;
    for (std::uint64_t k = 1; k <= cutoff; ++k) {
        double a = std::exp(log_a.value());
        term = one_minus_alpha(alpha, k) * eval_eps(eps, k) / a;
        sum.add(term);
        log_a.add(std::log1p(eval_alpha(alpha, k) / static_cast<double>(k)));
    }
    // Karamata remainder: scale the last exact term by the tail/term ratio of
    // the summand's shape (unknown constants cancel in the ratio).
    double rem = 0.0;
    if (term > 0.0) {
        GrowthForm sform = gf_mul(gf_mul(md.one_minus_alpha_form, md.eps_form),
                                  gf_pow(md.a_form, -1.0));
        auto tform = tail_sum_form(sform);
        double nc = static_cast<double>(cutoff);
        if (tform)
            rem = term * (tform->eval(nc) / sform.eval(nc));
        else if (sform.p < -1.0)
            rem = term * nc / (-sform.p - 1.0);
    }
    return 2.0 * q - 1.0 + sum.value() + rem;
}

std::string law_name(LawKind k) {
    switch (k) {
    case LawKind::Constant: return "constant";
    case LawKind::Normal: return "normal";
    case LawKind::RandomDrift: return "random-drift";
    default: return "unclassified";
    }
}

std::string scale_name(ScaleKind k) {
    switch (k) {
    case ScaleKind::R: return "r_n";
    case ScaleKind::A: return "a_n";
    case ScaleKind::ASqrtW: return "a_n*sqrt(w_n)";
    case ScaleKind::ASqrtV: return "a_n*sqrt(v_n)";
    case ScaleKind::ASqrtZ: return "a_n*sqrt(z_n)";
    case ScaleKind::ASqrtT: return "a_n*sqrt(t_n)";
    default: return "none";
    }
}

std::pair<LawKind, std::string> label_from_trace(const std::vector<TraceEntry>& trace) {
    Decision d = decide(trace);
    return {d.law, d.gate};
}

RegimeReport classify(const AlphaFamily& alpha, const EpsFamily& eps, double q) {
    check_q(q);
    FamilyMetadata md = family_metadata(alpha, eps);

    RegimeReport rep;
    rep.q = q;
    rep.alpha_desc = alpha.describe();
    rep.eps_desc = eps.describe();

    auto push = [&](const char* cond, Tri v, std::string src) {
        rep.trace.push_back({cond, v, std::move(src)});
    };

    push("parametric", tri(md.parametric),
         md.parametric ? "both parameter families are parametric"
                       : "table-valued family");
    if (!md.parametric) {
        rep.law = LawKind::Unclassified;
        rep.unclassified_reason = "divergence conditions undecidable";
        rep.law_detail = "unclassified: divergence conditions undecidable";
        return rep;
    }

    const double al = md.alpha_limit;
    const double el = md.eps_limit;
    rep.constants["alpha_limit"] = al;
    rep.constants["eps_limit"] = el;

    push("alpha_limit_lt_one", tri(al < 1.0), "lim alpha_n = " + fmt(al));
    push("eps_limit_zero", tri(el == 0.0), "lim eps_n = " + fmt(el));
    push("eps_limit_lt_one", tri(el < 1.0), "lim eps_n = " + fmt(el));
    push("eps_limit_one", tri(el == 1.0), "lim eps_n = " + fmt(el));

    Tri d1 = md.sum_one_minus_alpha_over_n_diverges;
    Tri d2 = md.sum_inv_a_sq_diverges;
    Tri d3 = md.sum_one_minus_eps_over_a_sq_diverges;
    Tri ds = md.drift_sum_converges;
    push("sum_one_minus_alpha_over_n_diverges", d1, "integral test on (1-alpha_n)/n");
    push("sum_inv_a_sq_diverges", d2, "integral test on 1/a_n^2");
    push("sum_one_minus_eps_over_a_sq_diverges", d3, "integral test on (1-eps_n)/a_n^2");
    push("drift_sum_converges", ds, "integral test on (1-alpha_n) eps_n / a_n");

    Tri linear = (al < 1.0 || d1 == Tri::True) ? Tri::True : tri(false);
    push("linear_law", linear, "S_n/n has the deterministic limit: alpha < 1 or "
                               "sum (1-alpha_n)/n diverges");

    // growth-scale certificates (meaningful when the drift sum diverges)
    AsymptoteSpec rspec = closed_form_asymptote(alpha, eps, SeqTarget::R);
    bool r_scale = ds == Tri::False && rspec.known;
    push("r_asymptote_known", tri(r_scale),
         r_scale ? "r_n ~ " + rspec.form.str()
                 : "no divergent closed-form growth scale");
    Tri cert_ar = Tri::Unknown, cert_r2 = Tri::Unknown, cert_l2 = Tri::Unknown;
    if (r_scale) {
        auto lim = ratio_limit(md.a_form, rspec.form);
        cert_ar = lim ? tri(*lim == 0.0) : Tri::Unknown;
        cert_r2 = tri(!sum_diverges(gf_pow(rspec.form, -2.0)));
        GrowthForm aw = md.a_form; // bounded w_n: constant factor, same verdict
        bool aw_ok = true;
        if (d2 == Tri::True) {
            AsymptoteSpec wspec = closed_form_asymptote(alpha, eps, SeqTarget::W);
            if (wspec.known)
                aw = gf_mul(md.a_form, gf_sqrt(wspec.form));
            else
                aw_ok = false;
        }
        if (aw_ok) {
            auto lim2 = ratio_limit(aw, rspec.form);
            cert_l2 = lim2 ? tri(*lim2 == 0.0) : Tri::Unknown;
        }
    }
    push("a_over_r_to_zero", cert_ar, "shape limit of a_n/r_n");
    push("sum_inv_r_sq_converges", cert_r2, "integral test on r_n^{-2}");
    push("a_sqrt_w_over_r_to_zero", cert_l2, "shape limit of a_n sqrt(w_n)/r_n");

    // bias regular variation
    bool rv = md.one_minus_eps_rv_index.has_value();
    double rho = rv ? -*md.one_minus_eps_rv_index : kNaN;
    push("one_minus_eps_rv", tri(rv),
         rv ? "1-eps_n regularly varying with index " + fmt(-rho)
            : "1-eps_n has no regular-variation index");
    push("rv_rho_lt_half", rv ? tri(rho < 0.5) : Tri::Unknown,
         rv ? "rho = " + fmt(rho) : "rho undefined");
    push("alpha_plus_rho_lt_one", rv ? tri(al + rho < 1.0) : Tri::Unknown,
         rv ? "alpha + rho = " + fmt(al + rho) : "rho undefined");
    if (rv) rep.constants["rho"] = rho;

    MuResult mu = mu_limit(alpha, eps);
    Tri mu_tri = mu.kind == MuResult::Kind::Finite ? Tri::True
               : mu.kind == MuResult::Kind::Infinite ? Tri::False
                                                     : Tri::Unknown;
    push("mu_finite", mu_tri, mu.note);
    if (mu.kind == MuResult::Kind::Finite) rep.constants["mu"] = mu.value;

    // ---- decision core ----
    Decision d = decide(rep.trace);
    rep.law = d.law;
    rep.verification_gate = d.gate;

    auto add_result = [&](const char* tag, ScaleKind sc, std::string st,
                          bool primary) {
        rep.results.push_back({tag, sc, std::move(st), primary});
    };

    // law payloads and statements
    if (d.growth) {
        rep.r_form = rspec.form;
        rep.r_constant_known = rspec.constant_known;
        if (d.growth_as) rep.modes.push_back("a.s.");
        if (d.growth_l2) rep.modes.push_back("L2");
        std::string how = d.growth_as && d.growth_l2 ? "a.s. and in L2"
                        : d.growth_as ? "a.s." : "in L2";
        rep.law_detail = "S_n/r_n -> 1 " + how + " with r_n ~ " + rspec.form.str();
        if (rspec.constant_known) rep.constants["r_constant"] = rspec.form.K;
        add_result("lln-growth", ScaleKind::R, rep.law_detail, d.gate == "lln");
    }

    double cstar = kNaN;
    if (ds == Tri::True) {
        cstar = drift_limit_constant(alpha, eps, q);
        rep.constants["c_star"] = cstar;
        add_result("mean-drift", ScaleKind::A,
                   "E[S_n] ~ c_* a_n with c_* = " + fmt(cstar), false);
        if (d.m_inf) {
            rep.c_star = cstar;
            bool prim = d.law == LawKind::RandomDrift && d.gate == "none";
            add_result("drift-limit", ScaleKind::A,
                       "S_n/a_n -> M + c_* a.s. and in L2, c_* = " + fmt(cstar),
                       prim);
        }
    }
    if (d.law == LawKind::RandomDrift) {
        rep.modes = {"a.s.", "L2"};
        rep.law_detail = "S_n/a_n -> M + c_* a.s. and in L2, c_* = " + fmt(cstar);
    }
    if (d.law == LawKind::Normal) {
        rep.mu = mu.value;
        rep.modes = {"distribution"};
        rep.law_detail =
            "S_n/(a_n sqrt(w_n)) -> N(" + fmt(mu.value) + ", 1) in distribution";
        add_result("gaussian-limit", ScaleKind::ASqrtW, rep.law_detail, false);
    }
    if (d.law == LawKind::Unclassified) {
        std::string why;
        if (ds == Tri::False && !rspec.known)
            why = "no closed form for the growth scale r_n";
        else if (ds == Tri::False) {
            why = "growth-scale certificates fail";
            if (mu.kind == MuResult::Kind::Infinite)
                why += "; centering relative to a_n sqrt(w_n) is infinite";
        } else {
            why = "martingale limit not certified";
        }
        rep.unclassified_reason = why;
        rep.law_detail = "unclassified: " + why;
    }

    // fluctuation results
    if (d.gate_cw) {
        double var = 1.0 - el * el;
        rep.gate_scale = ScaleKind::ASqrtW;
        rep.gate_variance = var;
        add_result("clt-mean", ScaleKind::ASqrtW,
                   "(S_n - E[S_n])/(a_n sqrt(w_n)) -> N(0, " + fmt(var) + ")",
                   d.gate == "clt");
        add_result("lil-mean", ScaleKind::ASqrtW,
                   "limsup +/- (S_n - E[S_n])/(a_n phi(w_n)) = " +
                       fmt(std::sqrt(var)) + " with phi(t) = sqrt(2 t log log t)",
                   false);
    }
    if (d.gate_cv) {
        double var = c_alpha_rho(al, rho);
        rep.gate_scale = ScaleKind::ASqrtV;
        rep.gate_variance = var;
        rep.constants["variance_factor"] = var;
        add_result("clt-mean", ScaleKind::ASqrtV,
                   "(S_n - E[S_n])/(a_n sqrt(v_n)) -> N(0, " + fmt(var) + ")",
                   d.gate == "clt");
        add_result("lil-mean", ScaleKind::ASqrtV,
                   "limsup +/- (S_n - E[S_n])/(a_n phi(v_n)) = " +
                       fmt(std::sqrt(var)) + " with phi(t) = sqrt(2 t log log t)",
                   false);
    }
    if (d.gate_dz) {
        double var = 1.0 - el * el;
        rep.gate_scale = ScaleKind::ASqrtZ;
        rep.gate_variance = var;
        rep.lil_log_abs = true;
        add_result("clt-drift", ScaleKind::ASqrtZ,
                   "(S_n - E[S_n] - a_n M)/(a_n sqrt(z_n)) -> N(0, " + fmt(var) +
                       ")",
                   d.gate == "drift_fluctuation");
        add_result("lil-drift", ScaleKind::ASqrtZ,
                   "limsup +/- (S_n - E[S_n] - a_n M)/(a_n psi(z_n)) = " +
                       fmt(std::sqrt(var)) +
                       " with psi(t) = sqrt(2 t log|log t|)",
                   false);
    }
    if (d.gate_dt) {
        double var = c_alpha_rho(al, rho);
        rep.gate_scale = ScaleKind::ASqrtT;
        rep.gate_variance = var;
        rep.lil_log_abs = true;
        rep.constants["variance_factor"] = var;
        add_result("clt-drift", ScaleKind::ASqrtT,
                   "(S_n - E[S_n] - a_n M)/(a_n sqrt(t_n)) -> N(0, " + fmt(var) +
                       ")",
                   d.gate == "drift_fluctuation");
        add_result("lil-drift", ScaleKind::ASqrtT,
                   "limsup +/- (S_n - E[S_n] - a_n M)/(a_n psi(t_n)) = " +
                       fmt(std::sqrt(var)) +
                       " with psi(t) = sqrt(2 t log|log t|)",
                   false);
    }
    if (d.assumption) {
        double rate = -(1.0 - al) / (1.0 - (al + rho));
        rep.constants["rate_limit"] = rate;
        add_result("rate-law", ScaleKind::None,
                   "(S_n/n - 1)/(1 - eps_n) -> " + fmt(rate) + " a.s.", false);
    }
    // open or degenerate fluctuation boundaries
    if (el == 1.0 && d2 == Tri::True && !d.assumption)
        add_result("fluctuation-unclassified", ScaleKind::None,
                   "no fluctuation result covers this bias decay (open boundary)",
                   false);
    if (el == 1.0 && d2 == Tri::False && !d.gate_dt)
        add_result("fluctuation-unclassified", ScaleKind::None,
                   "fluctuation variance factor undefined for this bias decay",
                   false);
    if (el < 1.0 && d2 == Tri::False && linear != Tri::True)
        add_result("fluctuation-degenerate", ScaleKind::None,
                   "memory saturates (alpha_n -> 1 with convergent sum "
                   "(1-alpha_n)/n): residual fluctuations vanish",
                   false);

    if (rep.gate_variance > 0.0) {
        rep.lil_envelope = std::sqrt(rep.gate_variance);
        rep.constants["lil_envelope"] = rep.lil_envelope;
    }

    // the primary result's scale; the law's own scale when nothing gates
    rep.scaling = ScaleKind::None;
    for (const auto& res : rep.results)
        if (res.primary) rep.scaling = res.scale;
    if (rep.scaling == ScaleKind::None) {
        if (d.gate == "clt" || d.gate == "drift_fluctuation")
            rep.scaling = rep.gate_scale;
        else if (d.law == LawKind::Constant)
            rep.scaling = ScaleKind::R;
        else if (d.law == LawKind::RandomDrift)
            rep.scaling = ScaleKind::A;
        else if (d.law == LawKind::Normal)
            rep.scaling = ScaleKind::ASqrtW;
    }

    return rep;
}

std::string RegimeReport::to_json() const {
    nlohmann::ordered_json j;
    j["law"]["kind"] = law_name(law);
    j["law"]["detail"] = law_detail;
    switch (law) {
    case LawKind::Constant:
        j["law"]["r_form"] = r_form.str();
        j["law"]["r_constant_known"] = r_constant_known;
        break;
    case LawKind::Normal:
        j["law"]["mu"] = mu;
        j["law"]["sigma2"] = 1.0;
        break;
    case LawKind::RandomDrift:
        j["law"]["c_star"] = c_star;
        break;
    default:
        j["law"]["reason"] = unclassified_reason;
        break;
    }
    j["scaling"] = scale_name(scaling);
    j["modes"] = modes;
    j["trace"] = nlohmann::ordered_json::array();
    for (const auto& e : trace)
        j["trace"].push_back({{"condition", e.condition},
                              {"value", tri_name(e.value)},
                              {"source", e.source}});
    j["constants"] = constants;
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results)
        j["results"].push_back({{"tag", r.tag},
                                {"scale", scale_name(r.scale)},
                                {"statement", r.statement},
                                {"primary", r.primary}});
    j["verification_gate"] = verification_gate;
    j["gate"] = {{"scale", scale_name(gate_scale)},
                 {"variance", gate_variance},
                 {"lil_envelope", lil_envelope},
                 {"lil_log_abs", lil_log_abs}};
    j["family"] = {{"alpha", alpha_desc}, {"eps", eps_desc}};
    j["q"] = q;
    return j.dump(2);
}

std::vector<PhaseCell> phase_diagram(double theta, double alpha,
                                     const std::vector<double>& kappa_grid,
                                     const std::vector<double>& eta_grid) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in [0, 1)");
    for (double k : kappa_grid)
        if (!std::isfinite(k)) throw std::invalid_argument("kappa grid not finite");
    for (double e : eta_grid)
        if (!std::isfinite(e)) throw std::invalid_argument("eta grid not finite");

    const std::size_t ne = eta_grid.size();
    std::vector<PhaseCell> cells(kappa_grid.size() * ne);
    const std::int64_t total = static_cast<std::int64_t>(cells.size());
#ifdef GERW_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < total; ++i) {
        double kappa = kappa_grid[static_cast<std::size_t>(i) / ne];
        double eta = eta_grid[static_cast<std::size_t>(i) % ne];
        RegimeReport rep = classify(AlphaFamily::log_corrected(alpha, kappa, theta),
                                    EpsFamily::log_over_power(eta, 1.0 - alpha),
                                    0.5);
        std::string label;
        switch (rep.law) {
        case LawKind::Constant: label = "constant"; break;
        case LawKind::Normal: label = "normal(" + fmt(rep.mu) + ",1)"; break;
        case LawKind::RandomDrift: label = "random-drift"; break;
        default: label = "unclassified"; break;
        }
        cells[static_cast<std::size_t>(i)] = {kappa, eta, std::move(label)};
    }
    return cells;
}

} // namespace gerw
