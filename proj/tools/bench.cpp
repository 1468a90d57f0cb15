// bench: throughput of the chunked gate kernels, sequential versus OpenMP,
// on a saturated count-rate workload. The two paths must agree click for
// click; the tool verifies that before reporting the speedup. The
// trace-retaining single-stream reference is timed as well for context.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sdapd/detector.hpp"
#include "sdapd/experiments.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    std::uint64_t gates = 200'000'000;
    if (argc > 1) gates = std::strtoull(argv[1], nullptr, 10);
    const std::uint64_t seed = 12345;

    sdapd::DetectorSpec spec;
    spec.efficiency = 0.14;
    spec.afterpulse_total = 0.05;
    const double mu[] = {100.0};

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("saturated count-rate workload, %llu gates, %d thread(s)\n",
                static_cast<unsigned long long>(gates), threads);

    sdapd::ExperimentOptions serial;
    serial.parallel = false;
    auto t0 = Clock::now();
    const auto serial_curve = sdapd::run_saturation(spec, mu, gates, seed, serial);
    const double t_serial = seconds_since(t0);
    std::printf("  chunked serial : %8.2f Mgates/s  (%.2f s)\n", gates / t_serial / 1e6, t_serial);

    sdapd::ExperimentOptions parallel;
    parallel.parallel = true;
    t0 = Clock::now();
    const auto parallel_curve = sdapd::run_saturation(spec, mu, gates, seed, parallel);
    const double t_parallel = seconds_since(t0);
    std::printf("  chunked OpenMP : %8.2f Mgates/s  (%.2f s)  speedup %.2fx\n",
                gates / t_parallel / 1e6, t_parallel, t_serial / t_parallel);

    if (serial_curve.points[0].clicks != parallel_curve.points[0].clicks) {
        std::printf("FAIL: serial and parallel click counts differ (%llu vs %llu)\n",
                    static_cast<unsigned long long>(serial_curve.points[0].clicks),
                    static_cast<unsigned long long>(parallel_curve.points[0].clicks));
        return 1;
    }
    std::printf("  click counts match: %llu\n",
                static_cast<unsigned long long>(serial_curve.points[0].clicks));

    // Single-stream reference (one continuous detector state, trace kept).
    const std::uint64_t ref_frames = std::min<std::uint64_t>(gates / 2, 20'000'000);
    const auto train = sdapd::build_single_pulse_train(2, sdapd::SourceSpec::coherent(100.0));
    t0 = Clock::now();
    const auto ref = sdapd::run_detector(train, spec, ref_frames, seed);
    const double t_ref = seconds_since(t0);
    std::printf("  trace reference: %8.2f Mgates/s  (%.2f s, %llu gates, %llu clicks)\n",
                 2.0 * ref_frames / t_ref / 1e6, t_ref,
                 static_cast<unsigned long long>(2 * ref_frames),
                 static_cast<unsigned long long>(ref.clicks.click_count()));
    return 0;
}
