#include "gerw/growth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace gerw {

double GrowthForm::eval(double n) const {
    double ln = std::log(n);
    double x = K;
    if (p != 0.0) x *= std::pow(n, p);
    if (s != 0.0) x *= std::pow(ln, s);
    if (u != 0.0) x *= std::pow(std::log(ln), u);
    if (c != 0.0) x *= std::exp(c * std::pow(ln, m));
    return x;
}

std::string GrowthForm::str() const {
    char buf[64];
    std::string out;
    auto term = [&](const char* fmt, double x, double y = 0.0) {
        std::snprintf(buf, sizeof buf, fmt, x, y);
        if (!out.empty()) out += " * ";
        out += buf;
    };
    if (K != 1.0 || (p == 0 && s == 0 && u == 0 && c == 0 && a_pow == 0))
        term("%g", K);
    if (a_pow != 0.0) term("A^%g", a_pow);
    if (p != 0.0) term("n^%g", p);
    if (s != 0.0) term("(log n)^%g", s);
    if (u != 0.0) term("(log log n)^%g", u);
    if (c != 0.0) term("exp(%g*(log n)^%g)", c, m);
    return out;
}

namespace {

// Exponents are assembled from model parameters through short chains of
// float arithmetic, so values that are equal on paper can drift apart by a
// few ulps depending on the path (-(0.5+0.3)+1 vs (-2*0.3+1)/2).  Structural
// decisions -- does a sum diverge, which form dominates -- must treat that
// drift as equality, so every comparison goes through this three-way cmp.
// Exponents closer than the tolerance are indistinguishable in any numeric
// experiment at reachable n, so nothing meaningful is snapped away.
constexpr double kExpTol = 1e-9;

int cmp(double x, double y) {
    double d = x - y;
    if (d > kExpTol) return 1;
    if (d < -kExpTol) return -1;
    return 0;
}

// Merge exponential terms; incompatible sub-powers cannot be represented in
// a single GrowthForm.
void merge_exp(GrowthForm& r, const GrowthForm& f, const GrowthForm& g, double gsign) {
    bool fe = cmp(f.c, 0.0) != 0, ge = cmp(g.c, 0.0) != 0;
    if (!fe) {
        r.c = gsign * g.c;
        r.m = g.m;
    } else if (!ge) {
        r.c = f.c;
        r.m = f.m;
    } else if (cmp(f.m, g.m) == 0) {
        r.c = f.c + gsign * g.c;
        r.m = f.m;
    } else {
        throw std::invalid_argument("growth forms with different exponential sub-powers");
    }
    if (cmp(r.c, 0.0) == 0) {
        r.c = 0.0;
        r.m = 0.0;
    }
}

} // namespace

GrowthForm gf_mul(const GrowthForm& f, const GrowthForm& g) {
    GrowthForm r;
    r.K = f.K * g.K;
    r.a_pow = f.a_pow + g.a_pow;
    r.p = f.p + g.p;
    r.s = f.s + g.s;
    r.u = f.u + g.u;
    merge_exp(r, f, g, +1.0);
    return r;
}

GrowthForm gf_div(const GrowthForm& f, const GrowthForm& g) {
    GrowthForm r;
    r.K = f.K / g.K;
    r.a_pow = f.a_pow - g.a_pow;
    r.p = f.p - g.p;
    r.s = f.s - g.s;
    r.u = f.u - g.u;
    merge_exp(r, f, g, -1.0);
    return r;
}

GrowthForm gf_pow(const GrowthForm& f, double e) {
    GrowthForm r = f;
    r.K = std::pow(f.K, e);
    r.a_pow *= e;
    r.p *= e;
    r.s *= e;
    r.u *= e;
    r.c *= e;
    if (cmp(r.c, 0.0) == 0) {
        r.c = 0.0;
        r.m = 0.0;
    }
    return r;
}

GrowthForm gf_scale(const GrowthForm& f, double k) {
    GrowthForm r = f;
    r.K *= k;
    return r;
}

bool sum_diverges(const GrowthForm& f) {
    if (f.K == 0.0) return false;
    if (int d = cmp(f.p, -1.0)) return d > 0;
    if (int d = cmp(f.c, 0.0)) return d > 0;
    if (int d = cmp(f.s, -1.0)) return d > 0;
    return cmp(f.u, -1.0) >= 0;
}

std::optional<GrowthForm> partial_sum_form(const GrowthForm& f) {
    if (!sum_diverges(f)) return std::nullopt;
    GrowthForm r = f;
    if (cmp(f.p, -1.0) > 0) {
        r.p += 1.0;
        r.K /= f.p + 1.0;
        return r;
    }
    // p == -1: the sum is an integral in t = log n
    r.p = 0.0;
    if (cmp(f.c, 0.0) > 0) {
        r.s = f.s + 1.0 - f.m;
        r.K /= f.c * f.m;
        return r;
    }
    if (cmp(f.s, -1.0) > 0) {
        r.s = f.s + 1.0;
        r.K /= f.s + 1.0;
        return r;
    }
    if (cmp(f.u, -1.0) > 0) {
        r.s = 0.0;
        r.u = f.u + 1.0;
        r.K /= f.u + 1.0;
        return r;
    }
    return std::nullopt; // divergence at the log-log-log level
}

std::optional<GrowthForm> tail_sum_form(const GrowthForm& f) {
    if (sum_diverges(f)) return std::nullopt;
    GrowthForm r = f;
    if (cmp(f.p, -1.0) < 0) {
        r.p += 1.0;
        r.K /= -f.p - 1.0;
        return r;
    }
    if (cmp(f.p, -1.0) > 0) return std::nullopt; // cannot converge (K == 0 aside)
    r.p = 0.0;
    if (cmp(f.c, 0.0) < 0) {
        r.s = f.s + 1.0 - f.m;
        r.K /= -f.c * f.m;
        return r;
    }
    if (cmp(f.s, -1.0) < 0) {
        r.s = f.s + 1.0;
        r.K /= -f.s - 1.0;
        return r;
    }
    if (cmp(f.u, -1.0) < 0) {
        r.s = 0.0;
        r.u = f.u + 1.0;
        r.K /= -f.u - 1.0;
        return r;
    }
    return std::nullopt;
}

std::optional<double> ratio_limit(const GrowthForm& f, const GrowthForm& g) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (f.K == 0.0) return 0.0;
    if (int d = cmp(f.p, g.p)) return d > 0 ? inf : 0.0;
    // exponential terms: the one with the larger sub-power m wins
    bool fe = cmp(f.c, 0.0) != 0, ge = cmp(g.c, 0.0) != 0;
    if (fe || ge) {
        double dc;
        if (fe && ge && cmp(f.m, g.m) != 0) {
            dc = cmp(f.m, g.m) > 0 ? f.c : -g.c;
        } else if (fe && !ge) {
            dc = f.c;
        } else if (!fe && ge) {
            dc = -g.c;
        } else {
            dc = f.c - g.c; // same m
        }
        if (int d = cmp(dc, 0.0)) return d > 0 ? inf : 0.0;
    }
    if (int d = cmp(f.s, g.s)) return d > 0 ? inf : 0.0;
    if (int d = cmp(f.u, g.u)) return d > 0 ? inf : 0.0;
    // Finite nonzero shape: the value depends on the unknown constant unless
    // both forms carry the same power of it.  A zero or infinite shape limit
    // is unaffected, which is why this check comes last.
    if (cmp(f.a_pow, g.a_pow) != 0) return std::nullopt;
    return f.K / g.K;
}

} // namespace gerw
