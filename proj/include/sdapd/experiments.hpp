#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdapd/analysis.hpp"
#include "sdapd/detector.hpp"
#include "sdapd/sources.hpp"

namespace sdapd {

/// Execution policy for the chunked experiment kernels. Work is split into
/// chunks of whole frames; every chunk owns generator streams derived from
/// (seed, chunk index), so merged counts are identical whether chunks run
/// sequentially or under OpenMP, at any thread count. chunk_frames = 0
/// picks a size from the workload alone (never from the thread count).
struct ExperimentOptions {
    bool parallel = true;
    std::uint64_t chunk_frames = 0;
};

/// Double-pulse outcome at one flux point.
struct DeadTimePoint {
    double mean_photons = 0.0;
    int separation_gates = 0;
    std::uint64_t frames = 0;
    ProportionEstimate p1;  // click on the first pulse
    ProportionEstimate p2;  // click on the second pulse
    ProportionEstimate p12; // both in the same frame
    double p2_given_1 = 0.0;
    double p2_given_1_stderr = 0.0;
    Ci p2_given_1_ci95;
};

std::vector<DeadTimePoint> run_dead_time(const DetectorSpec& spec, int frame_gates, int separation_gates,
                                         std::span<const double> mu_list, std::uint64_t frames,
                                         std::uint64_t seed, const ExperimentOptions& opts = {});

struct DelayPoint {
    int separation_gates = 0;
    ProportionEstimate p12;
};

struct DelaySweepResult {
    double mean_photons = 0.0;            // solved from the target click probability
    double target_click_probability = 0.0;
    std::uint64_t frames = 0;
    std::vector<DelayPoint> points;
};

/// Joint detection probability versus pulse separation at fixed flux; the
/// flux is chosen so a lone pulse clicks with the given probability.
DelaySweepResult run_delay_sweep(const DetectorSpec& spec, int frame_gates,
                                 std::span<const int> separations, double target_click_probability,
                                 std::uint64_t frames, std::uint64_t seed,
                                 const ExperimentOptions& opts = {});

struct RatePoint {
    double mean_photons = 0.0;
    std::uint64_t clicks = 0;
    std::uint64_t gates = 0;
    double rate_hz = 0.0;
    Ci rate_ci95;
};

struct RateCurve {
    std::vector<RatePoint> points;
    double illumination_hz = 0.0;
    double clock_hz = 0.0;
    double asymptote_hz = 0.0; // plateau estimate over strong illumination (mu >= 10)
};

/// Count-rate curve under an illumination pulse every other gate.
RateCurve run_saturation(const DetectorSpec& spec, std::span<const double> mu_list,
                         std::uint64_t gates_per_point, std::uint64_t seed,
                         const ExperimentOptions& opts = {});

enum class G2Normalization { Singles, LongLag };

struct G2Point {
    int lag_periods = 0;
    double g2 = 0.0;
    double stderr_ = 0.0;
    std::uint64_t coincidences = 0;
    std::uint64_t pairs = 0;
};

struct G2Result {
    std::vector<G2Point> points; // lags -max_lag .. +max_lag
    double rate_a = 0.0;         // clicks per pulse period, channel A (position 0)
    double rate_b = 0.0;         // channel B (position delay)
    std::uint64_t periods = 0;
    G2Normalization normalization = G2Normalization::Singles;

    const G2Point& at_lag(int lag) const;
};

/// Single-detector intensity-correlation measurement: the parent pulse is
/// time-multiplexed onto gate positions 0 and delay_gates of every
/// period, detected, and the click stream demultiplexed by gate position
/// into channels A and B before correlating across period lags.
G2Result run_hbt_g2(const SourceSpec& parent, int period_gates, int delay_gates,
                    const DetectorSpec& spec, std::uint64_t periods, int max_lag, std::uint64_t seed,
                    double survival = 0.5, G2Normalization normalization = G2Normalization::Singles,
                    const ExperimentOptions& opts = {});

} // namespace sdapd
