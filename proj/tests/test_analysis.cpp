#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdapd/analysis.hpp"
#include "test_support.hpp"

using namespace sdapd;

TEST_CASE("click probability closed form") {
    CHECK(theory_click_probability(0.0, 0.14, 1.67e-5) == doctest::Approx(1.67e-5).epsilon(1e-12));
    CHECK(theory_click_probability(1e6, 0.14, 1.67e-5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(theory_click_probability(1.0, 0.10, 0.0) == doctest::Approx(1.0 - std::exp(-0.1)).epsilon(1e-12));
    CHECK(theory_click_probability(1.0, 0.10, 0.0) == doctest::Approx(0.0951625820).epsilon(1e-9));
    CHECK_THROWS_AS(theory_click_probability(-1.0, 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(theory_click_probability(1.0, 1.5, 0.0), std::invalid_argument);
}

TEST_CASE("closed form equals the truncated Poisson sum") {
    // brute-force average of 1 - (1-p_d)(1-eta)^n over the Poisson pmf
    for (double mu : {0.0, 0.5, 5.0, 50.0}) {
        for (double eta : {0.01, 0.10, 0.14, 1.0}) {
            for (double pd : {0.0, 1.67e-5}) {
                long double sum = 0.0L;
                for (int n = 0; n <= 400; ++n)
                    sum += static_cast<long double>(oracle::poisson_pmf(n, mu)) *
                           (1.0L - (1.0L - static_cast<long double>(pd)) *
                                       std::pow(1.0L - static_cast<long double>(eta), n));
                const double closed = theory_click_probability(mu, eta, pd);
                CHECK(std::fabs(static_cast<double>(sum) - closed) < 1e-10);
            }
        }
    }
}

TEST_CASE("rate curve values") {
    CHECK(theory_rate(10.0, 0.14, 1.67e-5, 518e6) == doctest::Approx(390.2e6).epsilon(5e-4));
    CHECK(theory_rate(0.0, 0.14, 1.67e-5, 518e6) == doctest::Approx(8650.6).epsilon(1e-3));
    CHECK(theory_rate(5.0, 0.0, 0.0, 518e6) == 0.0);
}

TEST_CASE("rate is linear at low flux") {
    const double eta = 0.14;
    const double pd = 1.67e-5;
    const double f = 518e6;
    for (double mu : {0.001, 0.01, 0.1}) {
        if (eta * mu >= 0.02) continue;
        const double exact = theory_rate(mu, eta, pd, f);
        const double linear = f * (pd + eta * mu);
        CHECK(std::fabs(exact - linear) / exact < 0.01);
    }
}

TEST_CASE("multimode thermal zero-delay correlation") {
    CHECK(theory_g2_multimode(1.0) == doctest::Approx(2.0));
    CHECK(theory_g2_multimode(2.5) == doctest::Approx(1.4));
    CHECK(theory_g2_multimode(1e9) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(theory_g2_multimode(0.5), std::invalid_argument);
}

TEST_CASE("flux solves back to the requested click probability") {
    for (double target : {0.05, 0.10, 0.36, 0.9}) {
        const double mu = solve_flux_for_click_probability(target, 0.10, 1.67e-5);
        CHECK(theory_click_probability(mu, 0.10, 1.67e-5) == doctest::Approx(target).epsilon(1e-12));
    }
    CHECK_THROWS_AS(solve_flux_for_click_probability(1e-6, 0.1, 1.67e-5), std::invalid_argument);
    CHECK_THROWS_AS(solve_flux_for_click_probability(0.5, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("wilson interval endpoints") {
    const auto none = wilson_interval(0, 1000);
    CHECK(none.lo == 0.0);
    CHECK(none.hi == doctest::Approx(3.8416 / (1000 + 3.8416)).epsilon(1e-6));
    const auto all = wilson_interval(1000, 1000);
    CHECK(all.hi == 1.0);
    CHECK(all.lo == doctest::Approx(1000.0 / (1000 + 3.8416)).epsilon(1e-6));
    CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
}

TEST_CASE("wilson interval tracks the exact binomial interval") {
    const auto wilson = estimate_proportion(500, 5000);
    CHECK(wilson.p == doctest::Approx(0.1));
    const auto exact = oracle::clopper_pearson(500, 5000);
    CHECK(wilson.ci95.lo == doctest::Approx(exact.lo).epsilon(0.05));
    CHECK(wilson.ci95.hi == doctest::Approx(exact.hi).epsilon(0.05));
    CHECK(std::fabs(wilson.ci95.width() - exact.width()) / exact.width() < 0.10);
}

TEST_CASE("interval width shrinks as the square root of the sample size") {
    const auto small = estimate_proportion(100, 1000);
    const auto big = estimate_proportion(200, 2000);
    const double ratio = small.ci95.width() / big.ci95.width();
    CHECK(std::fabs(ratio - std::sqrt(2.0)) / std::sqrt(2.0) < 0.05);
}

TEST_CASE("incomplete gamma agrees with erf on the half-integer line") {
    for (double x : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        CHECK(gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
        CHECK(gamma_p(0.5, x) + gamma_q(0.5, x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("chi-square survival function hits the textbook quantiles") {
    CHECK(chi_square_sf(3.841, 1.0) == doctest::Approx(0.05).epsilon(0.002));
    CHECK(chi_square_sf(5.991, 2.0) == doctest::Approx(0.05).epsilon(0.002));
    CHECK(chi_square_sf(20.09, 8.0) == doctest::Approx(0.01).epsilon(0.002));
    CHECK(chi_square_sf(0.0, 4.0) == 1.0);
}

TEST_CASE("comparison report basics") {
    const std::vector<double> grid = {0.1, 1.0, 10.0};
    const auto theory = make_click_probability_curve(grid, 0.10, 1.67e-5);

    std::vector<SimPoint> self;
    for (std::size_t i = 0; i < grid.size(); ++i) self.push_back({grid[i], theory.value[i], 0.0});
    const auto perfect = compare(self, theory);
    CHECK(perfect.pass);
    CHECK(perfect.max_abs_z == 0.0);

    // simulate-like points drawn at the true values with small errors
    std::vector<SimPoint> close = self;
    for (auto& p : close) {
        p.stderr_ = 1e-4;
        p.value += 5e-5;
    }
    CHECK(compare(close, theory).pass);

    // a 20% efficiency error must be flagged
    const auto wrong = make_click_probability_curve(grid, 0.12, 1.67e-5);
    std::vector<SimPoint> biased;
    for (std::size_t i = 0; i < grid.size(); ++i) biased.push_back({grid[i], wrong.value[i], 1e-4});
    CHECK_FALSE(compare(biased, theory).pass);
    CHECK(compare(biased, theory).mean_z > 0.0); // signed bias points the right way

    std::vector<SimPoint> misaligned = self;
    misaligned[1].mean_photons = 2.0;
    CHECK_THROWS_AS(compare(misaligned, theory), std::invalid_argument);
    CHECK_THROWS_AS(compare(std::vector<SimPoint>{}, theory), std::invalid_argument);
}
