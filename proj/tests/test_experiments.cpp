#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdapd/experiments.hpp"
#include "test_support.hpp"

using namespace sdapd;

namespace {

DetectorSpec clean_detector(double efficiency) {
    DetectorSpec spec;
    spec.efficiency = efficiency;
    spec.dark_prob = 1.67e-5;
    spec.afterpulse_total = 0.0;
    spec.sd_residual = 0.0;
    return spec;
}

// Closed-form click correlation of interferometer-split thermal light seen
// by a binary detector with no dark counts: derived from the negative
// binomial generating function E[z^n] = (1 + (nbar/M)(1-z))^{-M} with both
// arms thinned by eta/2 (lossless coupler).
double thermal_click_g2_oracle(double nbar, double modes, double efficiency) {
    const double x = efficiency * nbar / (2.0 * modes);
    const double p_single = 1.0 - std::pow(1.0 + x, -modes);
    const double p_joint = 1.0 - 2.0 * std::pow(1.0 + x, -modes) + std::pow(1.0 + 2.0 * x, -modes);
    return p_joint / (p_single * p_single);
}

} // namespace

TEST_CASE("recovered detector: second pulse statistics ignore the first") {
    const auto spec = clean_detector(0.10);
    const double mu = solve_flux_for_click_probability(0.10, spec.efficiency, spec.dark_prob);
    const double grid[] = {mu};
    const auto points = run_dead_time(spec, 64, 2, grid, 1000000, 21);
    REQUIRE(points.size() == 1);
    const auto& p = points[0];
    CHECK(p.p12.p <= std::min(p.p1.p, p.p2.p));
    CHECK(p.p2_given_1 == doctest::Approx(p.p12.p / p.p1.p));
    const double combined = std::hypot(p.p2_given_1_stderr, p.p2.stderr_());
    CHECK(std::fabs(p.p2_given_1 - p.p2.p) < 3.0 * combined);
    // joint factorizes when the pulses are independent
    const double se12 = std::hypot(p.p12.stderr_(), p.p1.p * p.p2.stderr_() + p.p2.p * p.p1.stderr_());
    CHECK(std::fabs(p.p12.p - p.p1.p * p.p2.p) < 3.0 * se12);
}

TEST_CASE("dark-only double pulse: both slots sit at the dark floor") {
    const auto spec = clean_detector(0.10);
    const double grid[] = {0.0};
    const auto points = run_dead_time(spec, 64, 2, grid, 1000000, 22);
    const auto& p = points[0];
    CHECK(p.p1.ci95.lo <= spec.dark_prob);
    CHECK(p.p1.ci95.hi >= spec.dark_prob * (1.0 - 2 * spec.dark_prob));
    CHECK(p.p2.ci95.lo <= spec.dark_prob);
    CHECK(p.p2.ci95.hi >= spec.dark_prob * (1.0 - 2 * spec.dark_prob));
    // the joint dark floor p_d^2 is far inside the zero-count interval
    CHECK(p.p12.ci95.hi >= spec.dark_prob * spec.dark_prob);
    CHECK(p.p12.ci95.lo == 0.0);
}

TEST_CASE("chunked kernels: OpenMP and sequential execution agree click for click") {
    const auto spec = clean_detector(0.10);
    const double grid[] = {0.5, 5.0};
    ExperimentOptions parallel;
    parallel.parallel = true;
    ExperimentOptions serial;
    serial.parallel = false;
    const auto a = run_dead_time(spec, 64, 2, grid, 200000, 23, parallel);
    const auto b = run_dead_time(spec, 64, 2, grid, 200000, 23, serial);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].p1.successes == b[i].p1.successes);
        CHECK(a[i].p2.successes == b[i].p2.successes);
        CHECK(a[i].p12.successes == b[i].p12.successes);
    }

    DetectorSpec sat = clean_detector(0.14);
    sat.afterpulse_total = 0.05;
    const double flux[] = {100.0};
    const auto r1 = run_saturation(sat, flux, 10000000, 24, parallel);
    const auto r2 = run_saturation(sat, flux, 10000000, 24, serial);
    CHECK(r1.points[0].clicks == r2.points[0].clicks);
}

TEST_CASE("a single chunk reproduces the trace-retaining reference run") {
    const auto spec = clean_detector(0.10);
    const double mu = 2.0;
    const std::uint64_t frames = 50000;
    const std::uint64_t master = 25;
    ExperimentOptions one_chunk;
    one_chunk.chunk_frames = frames;
    const double grid[] = {mu};
    const auto points = run_dead_time(spec, 64, 2, grid, frames, master, one_chunk);

    // the experiment's first flux point draws chunk streams from
    // derive(master, 0), which is exactly a reference run seeded there
    const auto train = build_double_pulse_train(64, 2, SourceSpec::coherent(mu), spec.clock_hz);
    const auto reference = run_detector(train, spec, frames, derive_stream_seed(master, 0));
    std::uint64_t n1 = 0, n2 = 0, n12 = 0;
    for (std::uint64_t f = 0; f < frames; ++f) {
        const bool c1 = reference.clicks.clicks[f * 64] != 0;
        const bool c2 = reference.clicks.clicks[f * 64 + 2] != 0;
        n1 += c1;
        n2 += c2;
        n12 += c1 && c2;
    }
    CHECK(points[0].p1.successes == n1);
    CHECK(points[0].p2.successes == n2);
    CHECK(points[0].p12.successes == n12);
}

TEST_CASE("adjacent pulses cannot click jointly without a residual") {
    const auto spec = clean_detector(0.10);
    const int deltas[] = {1, 2, 3};
    const auto sweep = run_delay_sweep(spec, 64, deltas, 0.36, 400000, 26);
    CHECK(theory_click_probability(sweep.mean_photons, spec.efficiency, spec.dark_prob) ==
          doctest::Approx(0.36).epsilon(1e-12));
    CHECK(sweep.points[0].p12.successes == 0); // cancellation is exact at the output
    // beyond the dead time the joint probability is flat
    const auto& p2 = sweep.points[1].p12;
    const auto& p3 = sweep.points[2].p12;
    const double se = std::hypot(p2.stderr_(), p3.stderr_());
    CHECK(std::fabs(p2.p - p3.p) < 4.0 * se);
}

TEST_CASE("cancellation residual restores part of the adjacent-pulse coincidences") {
    auto spec = clean_detector(0.10);
    spec.sd_residual = 0.2;
    const int deltas[] = {1, 2};
    const auto sweep = run_delay_sweep(spec, 64, deltas, 0.36, 400000, 27);
    const auto& p1 = sweep.points[0].p12;
    const auto& p2 = sweep.points[1].p12;
    CHECK(p1.successes > 0);
    CHECK(p1.ci95.hi < p2.ci95.lo); // strictly below the recovered joint probability
}

TEST_CASE("count rate saturates at half the gate clock") {
    const auto spec = clean_detector(0.14);
    const double grid[] = {0.0, 100.0};
    const auto curve = run_saturation(spec, grid, 20000000, 28);
    CHECK(curve.illumination_hz == doctest::Approx(518e6));
    // dark floor
    const auto& dark = curve.points[0];
    CHECK(dark.rate_hz ==
          doctest::Approx(spec.dark_prob * spec.clock_hz).epsilon(0.10));
    // saturated point reaches the dead-time limited ceiling, never above
    const auto& sat = curve.points[1];
    CHECK(sat.rate_hz == doctest::Approx(518e6).epsilon(0.005));
    for (const auto& p : curve.points) {
        const double se = (p.rate_ci95.hi - p.rate_ci95.lo) / (2.0 * 1.96);
        CHECK(p.rate_hz <= curve.illumination_hz + 5.0 * se);
    }
    CHECK(curve.asymptote_hz == doctest::Approx(sat.rate_hz));
}

TEST_CASE("afterpulses bite a few percent out of the saturated rate") {
    auto spec = clean_detector(0.14);
    spec.afterpulse_total = 0.05;
    spec.afterpulse_decay_gates = 10.0;
    const double grid[] = {100.0};
    const auto curve = run_saturation(spec, grid, 20000000, 29);
    CHECK(curve.points[0].rate_hz < 510e6);
    CHECK(curve.points[0].rate_hz > 490e6);

    // against the afterpulse-free theory the bias is negative and visible
    std::vector<SimPoint> sim;
    const double se = (curve.points[0].rate_ci95.hi - curve.points[0].rate_ci95.lo) / (2.0 * 1.96);
    sim.push_back({100.0, curve.points[0].rate_hz, se});
    const auto theory = make_rate_curve(grid, spec.efficiency, spec.dark_prob, curve.illumination_hz);
    const auto report = compare(sim, theory);
    CHECK_FALSE(report.pass);
    CHECK(report.mean_z < 0.0);
}

TEST_CASE("coherent light shows no correlation structure") {
    DetectorSpec spec = clean_detector(1.0);
    spec.dark_prob = 0.0;
    const auto parent = SourceSpec::coherent(0.1);
    const auto result = run_hbt_g2(parent, 8, 4, spec, 10000000, 6, 30, 1.0);
    CHECK(result.periods == 10000000);
    for (const auto& p : result.points) {
        INFO("lag ", p.lag_periods);
        CHECK(std::fabs(p.g2 - 1.0) < 5.0 * p.stderr_);
    }
    // estimator symmetry under channel-role exchange
    for (int m = 1; m <= 6; ++m) {
        const auto& plus = result.at_lag(m);
        const auto& minus = result.at_lag(-m);
        CHECK(std::fabs(plus.g2 - minus.g2) < 2.0 * std::hypot(plus.stderr_, minus.stderr_));
    }
}

TEST_CASE("single-mode thermal light bunches to the oracle value") {
    DetectorSpec spec = clean_detector(0.2);
    spec.dark_prob = 0.0;
    const auto parent = SourceSpec::thermal(0.1, 1.0);
    const auto result = run_hbt_g2(parent, 8, 4, spec, 20000000, 4, 31, 1.0);
    const double expected = thermal_click_g2_oracle(0.1, 1.0, spec.efficiency);
    CHECK(expected == doctest::Approx(1.9804).epsilon(1e-3));
    const auto& zero = result.at_lag(0);
    CHECK(std::fabs(zero.g2 - expected) < 5.0 * zero.stderr_);
    for (const auto& p : result.points) {
        if (p.lag_periods == 0) continue;
        CHECK(std::fabs(p.g2 - 1.0) < 5.0 * p.stderr_);
    }
}

TEST_CASE("long-lag normalization agrees with singles normalization") {
    DetectorSpec spec = clean_detector(1.0);
    spec.dark_prob = 0.0;
    const auto parent = SourceSpec::coherent(0.1);
    const auto singles = run_hbt_g2(parent, 8, 4, spec, 4000000, 8, 32, 1.0, G2Normalization::Singles);
    const auto longlag = run_hbt_g2(parent, 8, 4, spec, 4000000, 8, 32, 1.0, G2Normalization::LongLag);
    const auto& a = singles.at_lag(0);
    const auto& b = longlag.at_lag(0);
    CHECK(std::fabs(a.g2 - b.g2) < 3.0 * std::hypot(a.stderr_, b.stderr_));
}

TEST_CASE("correlation measurement rejects impossible geometry and empty channels") {
    const auto spec = clean_detector(0.2);
    const auto parent = SourceSpec::coherent(0.1);
    CHECK_THROWS_AS(run_hbt_g2(parent, 8, 8, spec, 1000, 2, 33), std::invalid_argument);
    CHECK_THROWS_AS(run_hbt_g2(parent, 8, 4, spec, 3, 5, 33), std::invalid_argument);
    DetectorSpec dead = spec;
    dead.dark_prob = 0.0;
    CHECK_THROWS_AS(run_hbt_g2(SourceSpec::vacuum(), 8, 4, dead, 100000, 2, 33), std::runtime_error);
}

TEST_CASE("correlation runs are reproducible and thread-count independent") {
    const auto spec = clean_detector(0.2);
    const auto parent = SourceSpec::thermal(0.1, 2.5);
    ExperimentOptions parallel;
    ExperimentOptions serial;
    serial.parallel = false;
    const auto a = run_hbt_g2(parent, 8, 4, spec, 1000000, 4, 34, 1.0, G2Normalization::Singles, parallel);
    const auto b = run_hbt_g2(parent, 8, 4, spec, 1000000, 4, 34, 1.0, G2Normalization::Singles, serial);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].coincidences == b.points[i].coincidences);
        CHECK(a.points[i].g2 == b.points[i].g2);
    }
}
