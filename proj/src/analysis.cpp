#include "sdapd/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdapd {

double theory_click_probability(double mean_photons, double efficiency, double dark_prob) {
    if (!(mean_photons >= 0.0) || !(efficiency >= 0.0 && efficiency <= 1.0) ||
        !(dark_prob >= 0.0 && dark_prob <= 1.0))
        throw std::invalid_argument("theory_click_probability: parameter out of range");
    return 1.0 - (1.0 - dark_prob) * std::exp(-efficiency * mean_photons);
}

double theory_rate(double mean_photons, double efficiency, double dark_prob, double illumination_hz) {
    if (!(illumination_hz >= 0.0)) throw std::invalid_argument("theory_rate: negative illumination rate");
    return illumination_hz * theory_click_probability(mean_photons, efficiency, dark_prob);
}

double theory_g2_multimode(double mode_count) {
    if (!(mode_count >= 1.0)) throw std::invalid_argument("theory_g2_multimode: mode_count must be >= 1");
    return 1.0 + 1.0 / mode_count;
}

double solve_flux_for_click_probability(double click_probability, double efficiency, double dark_prob) {
    if (!(efficiency > 0.0)) throw std::invalid_argument("solve_flux: efficiency must be positive");
    if (!(click_probability > dark_prob && click_probability < 1.0))
        throw std::invalid_argument("solve_flux: click probability must lie in (dark_prob, 1)");
    return std::log((1.0 - dark_prob) / (1.0 - click_probability)) / efficiency;
}

Ci wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double ProportionEstimate::stderr_() const {
    if (trials == 0) return 0.0;
    const double n = static_cast<double>(trials);
    return std::sqrt(p * (1.0 - p) / n);
}

ProportionEstimate estimate_proportion(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) throw std::invalid_argument("estimate_proportion: zero trials");
    ProportionEstimate e;
    e.successes = successes;
    e.trials = trials;
    e.p = static_cast<double>(successes) / static_cast<double>(trials);
    e.ci95 = wilson_interval(successes, trials);
    return e;
}

namespace {

// Regularized incomplete gamma P(a,x) by series expansion, valid x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized incomplete gamma Q(a,x) by continued fraction, valid x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_p: invalid arguments");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double chi_square_sf(double chi_square, double dof) {
    if (!(dof > 0.0) || chi_square < 0.0) throw std::invalid_argument("chi_square_sf: invalid arguments");
    return gamma_q(0.5 * dof, 0.5 * chi_square);
}

TheoryCurve make_click_probability_curve(std::span<const double> mean_photons, double efficiency,
                                         double dark_prob) {
    TheoryCurve curve;
    curve.efficiency = efficiency;
    curve.dark_prob = dark_prob;
    curve.mean_photons.assign(mean_photons.begin(), mean_photons.end());
    curve.value.reserve(mean_photons.size());
    for (double mu : mean_photons) curve.value.push_back(theory_click_probability(mu, efficiency, dark_prob));
    return curve;
}

TheoryCurve make_rate_curve(std::span<const double> mean_photons, double efficiency, double dark_prob,
                            double illumination_hz) {
    TheoryCurve curve = make_click_probability_curve(mean_photons, efficiency, dark_prob);
    curve.illumination_hz = illumination_hz;
    for (double& v : curve.value) v *= illumination_hz;
    return curve;
}

ComparisonReport compare(std::span<const SimPoint> sim, const TheoryCurve& theory, double alpha,
                         double z_threshold) {
    if (sim.size() != theory.value.size() || sim.empty())
        throw std::invalid_argument("compare: simulation and theory grids differ in size");
    for (std::size_t i = 0; i < sim.size(); ++i)
        if (std::fabs(sim[i].mean_photons - theory.mean_photons[i]) > 1e-12 * (1.0 + std::fabs(sim[i].mean_photons)))
            throw std::invalid_argument("compare: simulation and theory grids are not aligned");

    ComparisonReport report;
    report.alpha = alpha;
    report.z_threshold = z_threshold;
    report.z.reserve(sim.size());
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const double diff = sim[i].value - theory.value[i];
        double z;
        if (sim[i].stderr_ > 0.0)
            z = diff / sim[i].stderr_;
        else
            z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        report.z.push_back(z);
        report.max_abs_z = std::max(report.max_abs_z, std::fabs(z));
        report.mean_z += z;
        report.chi_square += z * z;
    }
    report.mean_z /= static_cast<double>(sim.size());
    report.p_value = std::isfinite(report.chi_square)
                         ? chi_square_sf(report.chi_square, static_cast<double>(sim.size()))
                         : 0.0;
    report.pass = report.max_abs_z < z_threshold && report.p_value > alpha;
    return report;
}

} // namespace sdapd
