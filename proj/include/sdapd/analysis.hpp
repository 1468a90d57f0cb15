#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sdapd {

/// Closed-form click probability per illuminated gate for Poissonian light:
/// 1 - (1 - dark_prob) * exp(-efficiency * mean_photons).
double theory_click_probability(double mean_photons, double efficiency, double dark_prob);

/// Closed-form count rate: illumination_hz * theory_click_probability. No
/// dead-time or afterpulse correction.
double theory_rate(double mean_photons, double efficiency, double dark_prob, double illumination_hz);

/// Zero-delay second-order correlation of multimode thermal light, 1 + 1/M.
double theory_g2_multimode(double mode_count);

/// Mean photon number that yields the requested click probability,
/// inverting theory_click_probability.
double solve_flux_for_click_probability(double click_probability, double efficiency, double dark_prob);

struct Ci {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// Wilson score interval (default 95%, z = 1.96).
Ci wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

struct ProportionEstimate {
    double p = 0.0;
    Ci ci95;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;

    double stderr_() const;
};

ProportionEstimate estimate_proportion(std::uint64_t successes, std::uint64_t trials);

// Regularized incomplete gamma functions and the chi-square survival
// function built on them.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double chi_square_sf(double chi_square, double dof);

/// Theory prediction evaluated on a flux grid.
struct TheoryCurve {
    std::vector<double> mean_photons;
    std::vector<double> value; // probability or rate, matching the maker
    double efficiency = 0.0;
    double dark_prob = 0.0;
    double illumination_hz = 0.0; // zero for probability curves
};

TheoryCurve make_click_probability_curve(std::span<const double> mean_photons, double efficiency,
                                         double dark_prob);
TheoryCurve make_rate_curve(std::span<const double> mean_photons, double efficiency, double dark_prob,
                            double illumination_hz);

/// One simulated point with its standard error, aligned to a theory grid.
struct SimPoint {
    double mean_photons = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Model-versus-simulation comparison: per-point z-scores, a chi-square
/// over the full grid (dof = number of points, no fitted parameters), and a
/// pass/fail verdict. mean_z carries the signed bias so systematic offsets
/// (for example afterpulse losses absent from the theory) stay visible in
/// the report.
struct ComparisonReport {
    std::vector<double> z;
    double max_abs_z = 0.0;
    double mean_z = 0.0;
    double chi_square = 0.0;
    double p_value = 1.0;
    double alpha = 0.01;
    double z_threshold = 4.0;
    bool pass = false;
};

ComparisonReport compare(std::span<const SimPoint> sim, const TheoryCurve& theory, double alpha = 0.01,
                         double z_threshold = 4.0);

} // namespace sdapd
