#include "gerw/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gerw {

namespace {

void check_q(double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("q must lie in [0,1]");
    }
}

}  // namespace

MomentTable exact_moments(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                          std::uint64_t N) {
    check_q(q);
    if (N == 0) {
        throw std::invalid_argument("exact_moments: N must be >= 1");
    }
    MomentTable tab;
    tab.N = N;
    tab.q = q;
    tab.mean.resize(N);
    tab.second.resize(N);
    tab.variance.resize(N);
    double m = 2.0 * q - 1.0;
    double s = 1.0;
    for (std::uint64_t n = 1; n <= N; ++n) {
        tab.mean[n - 1] = m;
        tab.second[n - 1] = s;
        tab.variance[n - 1] = s - m * m;
        if (n < N) {
            double an = eval_alpha(alpha, n);
            double en = eval_eps(eps, n);
            double drift = (1.0 - an) * en;
            double nd = static_cast<double>(n);
            s = (1.0 + 2.0 * an / nd) * s + 2.0 * drift * m + 1.0;
            m = (1.0 + an / nd) * m + drift;
        }
    }
    return tab;
}

std::vector<double> exact_mean(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                               std::uint64_t N) {
    return exact_moments(alpha, eps, q, N).mean;
}

std::vector<double> exact_second_moment(const AlphaFamily& alpha, const EpsFamily& eps,
                                        double q, std::uint64_t N) {
    return exact_moments(alpha, eps, q, N).second;
}

double closed_form_mean(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                        std::uint64_t n) {
    check_q(q);
    if (n == 0) {
        throw std::invalid_argument("closed_form_mean: n must be >= 1");
    }
    KahanSum log_a;  // log a_{k+1} inside the loop
    KahanSum drift;  // sum_{k<n} (1-alpha_k) eps_k / a_{k+1}
    for (std::uint64_t k = 1; k < n; ++k) {
        log_a.add(std::log1p(eval_alpha(alpha, k) / static_cast<double>(k)));
        drift.add(one_minus_alpha(alpha, k) * eval_eps(eps, k) * std::exp(-log_a.value()));
    }
    return std::exp(log_a.value()) * (2.0 * q - 1.0 + drift.value());
}

double closed_form_second_moment(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                                 std::uint64_t n) {
    check_q(q);
    if (n == 0) {
        throw std::invalid_argument("closed_form_second_moment: n must be >= 1");
    }
    std::vector<double> mean = exact_mean(alpha, eps, q, n);
    KahanSum log_b;   // log b_{k+1} inside the loop
    KahanSum inv_b;   // sum_{k<=n} 1/b_k
    KahanSum cross;   // sum_{k<n} (1-alpha_k) eps_k E[S_k] / b_{k+1}
    inv_b.add(1.0);   // k = 1 term, b_1 = 1
    for (std::uint64_t k = 1; k < n; ++k) {
        log_b.add(std::log1p(2.0 * eval_alpha(alpha, k) / static_cast<double>(k)));
        inv_b.add(std::exp(-log_b.value()));
        cross.add(one_minus_alpha(alpha, k) * eval_eps(eps, k) * mean[k - 1] *
                  std::exp(-log_b.value()));
    }
    return std::exp(log_b.value()) * (inv_b.value() + 2.0 * cross.value());
}

PathOracleResult enumerate_paths(const AlphaFamily& alpha, const EpsFamily& eps, double q,
                                 unsigned n, unsigned cap) {
    check_q(q);
    if (n == 0 || n > cap || cap > kEnumerationCap) {
        throw std::invalid_argument("enumerate_paths: need 1 <= n <= cap <= 20");
    }

    // Precompute alpha_k, eps_k for k = 1..n-1 (step k+1 uses index k).
    std::vector<double> av(n), ev(n);
    for (unsigned k = 1; k < n; ++k) {
        av[k] = eval_alpha(alpha, k);
        ev[k] = eval_eps(eps, k);
    }

    // Depth-first product of conditional probabilities over all sign paths;
    // bucket paths by terminal plus-count.
    std::vector<std::vector<double>> bucket(n + 1);
    for (auto& b : bucket) {
        b.reserve(1u << (n > 10 ? n - 10 : 0));
    }
    struct Frame {
        unsigned depth;
        unsigned plus;
        double prob;
    };
    std::vector<Frame> stack;
    stack.reserve(2 * n + 2);
    stack.push_back({1, 1, q});
    stack.push_back({1, 0, 1.0 - q});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.depth == n) {
            bucket[f.plus].push_back(f.prob);
            continue;
        }
        unsigned k = f.depth;
        double p_up = av[k] * (static_cast<double>(f.plus) / static_cast<double>(k)) +
                      (1.0 - av[k]) * (1.0 + ev[k]) / 2.0;
        stack.push_back({k + 1, f.plus + 1, f.prob * p_up});
        stack.push_back({k + 1, f.plus, f.prob * (1.0 - p_up)});
    }

    PathOracleResult out;
    out.n = n;
    KahanSum mean, second;
    for (unsigned plus = 0; plus <= n; ++plus) {
        std::sort(bucket[plus].begin(), bucket[plus].end());
        KahanSum p;
        for (double x : bucket[plus]) {
            p.add(x);
        }
        std::int64_t s = 2 * static_cast<std::int64_t>(plus) - static_cast<std::int64_t>(n);
        out.probability[s] = p.value();
        double sd = static_cast<double>(s);
        mean.add(p.value() * sd);
        second.add(p.value() * sd * sd);
    }
    out.mean = mean.value();
    out.second = second.value();
    return out;
}

std::vector<double> martingale_values(std::span<const std::int64_t> s,
                                      const MomentTable& moments, const ScalingTable& scaling) {
    if (s.size() > moments.N || s.size() > scaling.N) {
        throw std::invalid_argument("martingale_values: trajectory exceeds table horizon");
    }
    std::vector<double> m(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        m[i] = (static_cast<double>(s[i]) - moments.mean[i]) * std::exp(-scaling.log_a[i]);
    }
    return m;
}

}  // namespace gerw
