#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sdapd/rng.hpp"

namespace sdapd {

// Exact Poisson deviate for arbitrary mean: sequential inversion below
// kPoissonSearchMax, Hormann's PTRS transformed rejection above. Both are
// exact samplers; no normal approximation is involved at any mean.
inline constexpr double kPoissonSearchMax = 30.0;

inline int poisson_draw(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    if (mean <= kPoissonSearchMax) {
        const double u = rng.next_double();
        double p = std::exp(-mean);
        double cum = p;
        int n = 0;
        const int n_cap = static_cast<int>(mean + 40.0 * std::sqrt(mean) + 100.0);
        while (u > cum && n < n_cap) {
            ++n;
            p *= mean / n;
            cum += p;
        }
        return n;
    }
    // PTRS (Hormann 1993), valid for mean >= 10.
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        const double u = rng.next_double() - 0.5;
        const double v = rng.next_double();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<int>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - std::lgamma(k + 1.0)) {
            return static_cast<int>(kf);
        }
    }
}

// Bose-Einstein photon number (single thermal mode), exact inversion.
inline int geometric_photon_draw(double nbar, Rng& rng) {
    if (nbar <= 0.0) return 0;
    const double q = nbar / (1.0 + nbar);
    const double u = rng.next_double();
    return static_cast<int>(std::log1p(-u) / std::log(q));
}

// Gamma(shape >= 1, scale) via Marsaglia-Tsang.
inline double gamma_draw(double shape, double scale, Rng& rng) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_double();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (u <= 0.0 || std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

// Multimode thermal photon number: negative binomial with mean nbar and
// real-valued mode count M >= 1, realized as a gamma-mixed Poisson.
inline int negative_binomial_draw(double nbar, double mode_count, Rng& rng) {
    if (nbar <= 0.0) return 0;
    if (std::fabs(mode_count - 1.0) < 1e-12) return geometric_photon_draw(nbar, rng);
    const double intensity = gamma_draw(mode_count, nbar / mode_count, rng);
    return poisson_draw(intensity, rng);
}

// Binomial thinning; exact per-photon Bernoulli loop.
inline int binomial_draw(int n, double p, Rng& rng) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    int k = 0;
    for (int i = 0; i < n; ++i) k += rng.next_double() < p ? 1 : 0;
    return k;
}

// Tabulated-CDF Poisson sampler for a fixed mean: one uniform plus a binary
// search per draw. The table is exact to double precision; its tail cutoff
// carries total mass below 1e-30.
class PoissonTable {
public:
    PoissonTable() = default;

    explicit PoissonTable(double mean) : mean_(mean) {
        if (mean < 0.0 || !std::isfinite(mean)) throw std::invalid_argument("PoissonTable: invalid mean");
        if (mean == 0.0) return;
        const int n_max = static_cast<int>(std::ceil(mean + 12.0 * std::sqrt(mean) + 30.0));
        const double log_mean = std::log(mean);
        cdf_.resize(static_cast<std::size_t>(n_max) + 1);
        double cum = 0.0;
        for (int n = 0; n <= n_max; ++n) {
            cum += std::exp(n * log_mean - mean - std::lgamma(n + 1.0));
            cdf_[static_cast<std::size_t>(n)] = cum;
        }
        cdf_.back() = 1.0;
    }

    int sample(Rng& rng) const {
        const double u = rng.next_double();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<int>(it - cdf_.begin());
    }

    double mean() const { return mean_; }

private:
    double mean_ = 0.0;
    std::vector<double> cdf_{1.0};
};

} // namespace sdapd
