#include "gerw/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gerw {

double log_gamma_ratio(double z, double alpha) {
    if (!(z > 0.0)) {
        throw std::invalid_argument("log_gamma_ratio: z must be positive");
    }
    if (z < 32.0) {
        return std::lgamma(z + alpha) - std::lgamma(z);
    }
    // Stirling difference: subtracting the two asymptotic series term by term
    // avoids the cancellation that a plain lgamma difference suffers for large z.
    //   lgamma(x) ~ (x - 1/2) log x - x + log(2*pi)/2 + sum_j c_j x^(1-2j)
    // with c_j = B_{2j} / ((2j-1)(2j)).  The leading parts combine into
    //   alpha*(log z - 1) + (z + alpha - 1/2) * log1p(alpha/z).
    double d = alpha * (std::log(z) - 1.0) + (z + alpha - 0.5) * std::log1p(alpha / z);
    static const double coef[3] = {1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0};
    double za = z + alpha;
    double zp = 1.0 / z;
    double zap = 1.0 / za;
    for (int j = 0; j < 3; ++j) {
        d += coef[j] * (zap - zp);
        zp *= 1.0 / (z * z);
        zap *= 1.0 / (za * za);
    }
    return d;
}

double gamma_ratio_g(double alpha, std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("gamma_ratio_g: n must be >= 1");
    }
    return std::exp(log_gamma_ratio(static_cast<double>(n), alpha) - std::lgamma(1.0 + alpha));
}

double g_second_order_term(double alpha, std::uint64_t n, double log_g) {
    if (n == 0) {
        throw std::invalid_argument("g_second_order_term: n must be >= 1");
    }
    // g_n = n^alpha / Gamma(1+alpha) * (1 + delta_n); returns n * delta_n / Gamma(1+alpha),
    // which converges to alpha*(alpha-1)/(2*Gamma(1+alpha)).  expm1 keeps precision
    // when delta_n ~ 1/n.
    double nd = static_cast<double>(n);
    double rel = log_g + std::lgamma(1.0 + alpha) - alpha * std::log(nd);
    return nd / std::tgamma(1.0 + alpha) * std::expm1(rel);
}

namespace {

// Growth form of the summand 1/a_n^2.
GrowthForm inv_a_sq_form(const FamilyMetadata& md) {
    return gf_pow(md.a_form, -2.0);
}

// Growth form of (1 - eps_n^2) = (1 - eps_n)(1 + eps_n); the second factor
// tends to the constant 1 + eps_limit.
GrowthForm one_minus_eps_sq_form(const FamilyMetadata& md) {
    return gf_scale(md.one_minus_eps_form, 1.0 + md.eps_limit);
}

struct TailScan {
    std::vector<double> suffix;  // suffix[k-1] = sum_{j>=k} term_j for k = 1..N
    double remainder = 0.0;      // estimate of the sum beyond the scan cutoff
    double err_abs = 0.0;        // bound on the absolute error of `remainder`
};

// Shared scan for the convergent tail sums z_n and t_n.  Terms are accumulated
// from the cutoff downward (small to large), seeded with a closed-form estimate
// of the mass beyond the cutoff.
TailScan scan_tail(const AlphaFamily& alpha, const EpsFamily& eps, std::uint64_t N,
                   TailKind which, const TailPolicy& policy, const FamilyMetadata& md) {
    std::uint64_t cutoff = std::max(N, policy.cutoff_min);

    // Exact terms up to the cutoff.
    std::vector<double> term(cutoff);
    KahanSum log_a;
    for (std::uint64_t n = 1; n <= cutoff; ++n) {
        double inv_a = std::exp(-log_a.value());
        double t = inv_a * inv_a;
        if (which == TailKind::T) {
            t *= one_minus_eps_sq(eps, n);
        }
        term[n - 1] = t;
        if (n < cutoff) {
            log_a.add(std::log1p(eval_alpha(alpha, n) / static_cast<double>(n)));
        }
    }

    // Remainder beyond the cutoff via the closed-form shape of the summand:
    // sum_{k>cutoff} term_k ~ term_cutoff * tail_form(cutoff) / summand_form(cutoff).
    // The unknown multiplicative constant in a_n cancels in the ratio.
    GrowthForm summand = inv_a_sq_form(md);
    if (which == TailKind::T) {
        summand = gf_mul(summand, one_minus_eps_sq_form(md));
    }
    TailScan out;
    double last = term[cutoff - 1];
    double ratio;
    auto tail = tail_sum_form(summand);
    if (tail) {
        ratio = tail->eval(cutoff) / summand.eval(cutoff);
    } else {
        // Fallback for shapes the symbolic rules do not cover: pure power ratio.
        ratio = static_cast<double>(cutoff) / (-summand.p - 1.0);
    }
    out.remainder = last * ratio;
    // Integral-test bracketing is off by at most one term; the slowly varying
    // factors add a first-order correction of order 1/log(cutoff) per log power.
    double slack = (std::fabs(summand.s) + std::fabs(summand.u) + 1.0) /
                   std::log(static_cast<double>(cutoff));
    out.err_abs = last + out.remainder * slack;

    out.suffix.resize(N);
    KahanSum acc;
    acc.add(out.remainder);
    for (std::uint64_t n = cutoff; n >= 1; --n) {
        acc.add(term[n - 1]);
        if (n <= N) {
            out.suffix[n - 1] = acc.value();
        }
    }
    return out;
}

}  // namespace

TailEstimate estimate_tail(const AlphaFamily& alpha, const EpsFamily& eps, std::uint64_t N,
                           TailKind which, TailPolicy tail) {
    if (N == 0) {
        throw std::invalid_argument("estimate_tail: N must be >= 1");
    }
    FamilyMetadata md = family_metadata(alpha, eps);
    Tri diverges = which == TailKind::Z ? md.sum_inv_a_sq_diverges
                                        : md.sum_one_minus_eps_over_a_sq_diverges;
    if (diverges != Tri::False) {
        throw std::domain_error("estimate_tail: tail sum is divergent or undecidable");
    }
    TailScan scan = scan_tail(alpha, eps, N, which, tail, md);
    TailEstimate est;
    est.rel_err.resize(N);
    for (std::uint64_t n = 1; n <= N; ++n) {
        double value = scan.suffix[n - 1];
        est.rel_err[n - 1] = value > 0.0 ? scan.err_abs / value : 0.0;
    }
    est.value = std::move(scan.suffix);
    return est;
}

ScalingTable build_table(const AlphaFamily& alpha, const EpsFamily& eps, std::uint64_t N,
                         TailPolicy tail) {
    if (N == 0) {
        throw std::invalid_argument("build_table: N must be >= 1");
    }
    ScalingTable tab;
    tab.N = N;
    tab.log_a.resize(N);
    tab.log_b.resize(N);
    tab.g.resize(N);
    tab.l.resize(N);
    tab.rho.resize(N);
    tab.w.resize(N);
    tab.v.resize(N);
    tab.r.resize(N);

    double alpha_lim = alpha.limit();  // NaN for table families: g, l, rho stay NaN
    KahanSum ka;   // log a_n
    KahanSum kb;   // log b_n
    KahanSum kl;   // log l_n
    KahanSum krh;  // log rho_n
    KahanSum kw;   // w_n
    KahanSum kv;   // v_n
    KahanSum krs;  // sum_{k<=n} (1 - alpha_k) eps_k / a_k
    for (std::uint64_t n = 1; n <= N; ++n) {
        std::size_t i = n - 1;
        tab.log_a[i] = ka.value();
        tab.log_b[i] = kb.value();
        tab.g[i] = std::exp(log_gamma_ratio(static_cast<double>(n), alpha_lim) -
                            std::lgamma(1.0 + alpha_lim));
        tab.l[i] = std::exp(kl.value());
        tab.rho[i] = std::exp(krh.value());

        bool clamp_a = false;
        bool clamp_e = false;
        double an = eval_alpha(alpha, n, &clamp_a);
        double en = eval_eps(eps, n, &clamp_e);
        if (clamp_a && tab.first_clamp_alpha == 0) {
            tab.first_clamp_alpha = n;
        }
        if (clamp_e && tab.first_clamp_eps == 0) {
            tab.first_clamp_eps = n;
        }

        double inv_a = std::exp(-ka.value());
        kw.add(inv_a * inv_a);
        tab.w[i] = kw.value();
        kv.add(one_minus_eps_sq(eps, n) * inv_a * inv_a);
        tab.v[i] = kv.value();
        krs.add(one_minus_alpha(alpha, n) * en * inv_a);
        tab.r[i] = std::exp(ka.value()) * krs.value();

        if (n < N) {
            double nd = static_cast<double>(n);
            ka.add(std::log1p(an / nd));
            kb.add(std::log1p(2.0 * an / nd));
            kl.add(std::log1p((an - alpha_lim) / (nd + alpha_lim)));
            krh.add((an - alpha_lim) / nd);
        }
    }

    FamilyMetadata md = family_metadata(alpha, eps);
    if (md.sum_inv_a_sq_diverges == Tri::False) {
        TailEstimate est = estimate_tail(alpha, eps, N, TailKind::Z, tail);
        tab.z = std::move(est.value);
        tab.z_err = std::move(est.rel_err);
        tab.z_valid = true;
    }
    if (md.sum_one_minus_eps_over_a_sq_diverges == Tri::False) {
        TailEstimate est = estimate_tail(alpha, eps, N, TailKind::T, tail);
        tab.t = std::move(est.value);
        tab.t_err = std::move(est.rel_err);
        tab.t_valid = true;
    }
    return tab;
}

double ScalingTable::c0_estimate() const {
    return std::exp(log_b[N - 1] - 2.0 * log_a[N - 1]);
}

double ScalingTable::c_star_estimate() const {
    return l[N - 1] / rho[N - 1];
}

AsymptoteSpec closed_form_asymptote(const AlphaFamily& alpha, const EpsFamily& eps,
                                    SeqTarget target) {
    AsymptoteSpec spec;
    FamilyMetadata md = family_metadata(alpha, eps);
    if (!md.parametric) {
        spec.tag = "table family: no closed form";
        return spec;
    }

    auto constant_form = [](bool known_const) {
        GrowthForm f;
        f.K = 1.0;
        f.a_pow = known_const ? 0.0 : 1.0;
        return f;
    };
    auto zero_form = []() {
        GrowthForm f;
        f.K = 0.0;
        return f;
    };
    auto finish = [&spec](const GrowthForm& f, bool const_known) {
        spec.known = true;
        spec.form = f;
        spec.constant_known = const_known;
        spec.tag = f.str();
    };

    GrowthForm inv_a2 = inv_a_sq_form(md);
    switch (target) {
        case SeqTarget::A: {
            finish(md.a_form, md.a_constant_known);
            break;
        }
        case SeqTarget::W: {
            if (sum_diverges(inv_a2)) {
                auto psf = partial_sum_form(inv_a2);
                if (psf) {
                    finish(*psf, md.a_constant_known);
                } else {
                    spec.tag = "divergent, shape not covered";
                }
            } else {
                finish(constant_form(false), false);
                spec.tag = "converges to a finite limit";
            }
            break;
        }
        case SeqTarget::Z: {
            if (sum_diverges(inv_a2)) {
                spec.tag = "tail sum divergent";
            } else {
                auto tsf = tail_sum_form(inv_a2);
                if (tsf) {
                    finish(*tsf, md.a_constant_known);
                } else {
                    spec.tag = "convergent, shape not covered";
                }
            }
            break;
        }
        case SeqTarget::V: {
            if (md.one_minus_eps_zero) {
                finish(zero_form(), true);
                spec.tag = "identically zero";
                break;
            }
            GrowthForm summand = gf_mul(one_minus_eps_sq_form(md), inv_a2);
            if (sum_diverges(summand)) {
                auto psf = partial_sum_form(summand);
                if (psf) {
                    finish(*psf, md.a_constant_known);
                } else {
                    spec.tag = "divergent, shape not covered";
                }
            } else {
                finish(constant_form(false), false);
                spec.tag = "converges to a finite limit";
            }
            break;
        }
        case SeqTarget::T: {
            if (md.one_minus_eps_zero) {
                finish(zero_form(), true);
                spec.tag = "identically zero";
                break;
            }
            GrowthForm summand = gf_mul(one_minus_eps_sq_form(md), inv_a2);
            if (sum_diverges(summand)) {
                spec.tag = "tail sum divergent";
            } else {
                auto tsf = tail_sum_form(summand);
                if (tsf) {
                    finish(*tsf, md.a_constant_known);
                } else {
                    spec.tag = "convergent, shape not covered";
                }
            }
            break;
        }
        case SeqTarget::R: {
            if (md.eps_zero || md.one_minus_alpha_zero) {
                finish(zero_form(), true);
                spec.tag = "identically zero";
                break;
            }
            GrowthForm summand =
                gf_mul(gf_mul(md.one_minus_alpha_form, md.eps_form), gf_pow(md.a_form, -1.0));
            if (md.drift_sum_converges != Tri::False) {
                // r_n ~ c * a_n with c the (finite, unknown) value of the drift sum.
                GrowthForm f = md.a_form;
                f.a_pow += 1.0;
                finish(f, false);
                break;
            }
            auto psf = partial_sum_form(summand);
            if (psf) {
                GrowthForm f = gf_mul(md.a_form, *psf);
                // a_pow cancels between a_n and 1/a_n inside the sum, so the
                // constant is explicit even when a_n itself has an unknown factor.
                finish(f, f.a_pow == 0.0);
            } else {
                spec.tag = "divergent, shape not covered";
            }
            break;
        }
    }
    return spec;
}

std::pair<double, double> series_order_sums(std::span<const double> c, std::uint64_t n) {
    if (n > c.size()) {
        throw std::out_of_range("series_order_sums: n exceeds sequence length");
    }
    KahanSum partial;   // sum_{l<=k} c_l
    KahanSum selfconv;  // sum_{k} c_k * partial_k
    KahanSum expsum;    // sum_{k} c_k * exp(partial_k)
    for (std::uint64_t k = 0; k < n; ++k) {
        if (!(c[k] >= 0.0)) {
            throw std::invalid_argument("series_order_sums: terms must be nonnegative");
        }
        partial.add(c[k]);
        selfconv.add(c[k] * partial.value());
        expsum.add(c[k] * std::exp(partial.value()));
    }
    return {selfconv.value(), expsum.value()};
}

}  // namespace gerw
