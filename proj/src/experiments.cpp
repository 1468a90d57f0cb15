#include "sdapd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "sdapd/kernel.hpp"

namespace sdapd {

namespace {

struct ChunkPlan {
    std::uint64_t chunk_frames = 1;
    std::uint64_t n_chunks = 1;
};

// Chunk size is a function of the workload only; results are therefore
// reproducible across machines and thread counts. Chunks are kept above
// 64k gates so the cold detector state at each chunk start is negligible
// next to the afterpulse memory (tens of gates).
ChunkPlan plan_chunks(std::uint64_t frames, int frame_gates, std::uint64_t requested) {
    std::uint64_t cf = requested;
    if (cf == 0) {
        const std::uint64_t min_frames = (std::uint64_t{1} << 16) / static_cast<std::uint64_t>(frame_gates) + 1;
        const std::uint64_t by_target = (frames + 255) / 256;
        cf = std::max(min_frames, by_target);
    }
    cf = std::max<std::uint64_t>(1, std::min(cf, frames));
    return {cf, (frames + cf - 1) / cf};
}

template <class ChunkFn>
void for_each_chunk(const ChunkPlan& plan, std::uint64_t frames, bool parallel, ChunkFn&& fn) {
    const auto n = static_cast<std::int64_t>(plan.n_chunks);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t c = 0; c < n; ++c) {
        const std::uint64_t first = static_cast<std::uint64_t>(c) * plan.chunk_frames;
        const std::uint64_t count = std::min(plan.chunk_frames, frames - first);
        fn(static_cast<std::uint64_t>(c), count);
    }
}

struct TwoSlotCounts {
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;
    std::uint64_t n12 = 0;
};

struct TwoSlotSink {
    int pos_1;
    int pos_2;
    int gate_in_frame = 0;
    bool c1 = false;
    bool c2 = false;
    TwoSlotCounts counts;

    void gate(bool click, bool) {
        if (gate_in_frame == pos_1)
            c1 = click;
        else if (gate_in_frame == pos_2)
            c2 = click;
        ++gate_in_frame;
    }
    void end_frame() {
        counts.n1 += c1;
        counts.n2 += c2;
        counts.n12 += c1 && c2;
        gate_in_frame = 0;
        c1 = c2 = false;
    }
};

// Per-frame click outcomes at two slot positions, accumulated over chunked
// independent runs.
TwoSlotCounts count_two_slots(const PulseTrain& train, int pos_1, int pos_2, const DetectorSpec& spec,
                              std::uint64_t frames, std::uint64_t point_seed,
                              const ExperimentOptions& opts) {
    const auto plan = plan_chunks(frames, train.frame_gates, opts.chunk_frames);
    std::vector<TwoSlotCounts> partial(plan.n_chunks);
    for_each_chunk(plan, frames, opts.parallel, [&](std::uint64_t c, std::uint64_t count) {
        detail::TrainSource source(train);
        Rng avalanche_rng(derive_stream_seed(point_seed, 2 * c));
        Rng residual_rng(derive_stream_seed(point_seed, 2 * c + 1));
        DetectorState state;
        TwoSlotSink sink{pos_1, pos_2};
        detail::run_frames(source, spec, count, avalanche_rng, residual_rng, state, sink);
        partial[c] = sink.counts;
    });
    TwoSlotCounts total;
    for (const auto& p : partial) {
        total.n1 += p.n1;
        total.n2 += p.n2;
        total.n12 += p.n12;
    }
    return total;
}

struct ClickCountSink {
    std::uint64_t clicks = 0;
    void gate(bool click, bool) { clicks += click; }
    void end_frame() {}
};

std::uint64_t count_clicks(const PulseTrain& train, const DetectorSpec& spec, std::uint64_t frames,
                           std::uint64_t point_seed, const ExperimentOptions& opts) {
    const auto plan = plan_chunks(frames, train.frame_gates, opts.chunk_frames);
    std::vector<std::uint64_t> partial(plan.n_chunks, 0);
    for_each_chunk(plan, frames, opts.parallel, [&](std::uint64_t c, std::uint64_t count) {
        detail::TrainSource source(train);
        Rng avalanche_rng(derive_stream_seed(point_seed, 2 * c));
        Rng residual_rng(derive_stream_seed(point_seed, 2 * c + 1));
        DetectorState state;
        ClickCountSink sink;
        detail::run_frames(source, spec, count, avalanche_rng, residual_rng, state, sink);
        partial[c] = sink.clicks;
    });
    std::uint64_t total = 0;
    for (auto p : partial) total += p;
    return total;
}

DeadTimePoint make_dead_time_point(double mu, int separation, std::uint64_t frames,
                                   const TwoSlotCounts& counts) {
    DeadTimePoint point;
    point.mean_photons = mu;
    point.separation_gates = separation;
    point.frames = frames;
    point.p1 = estimate_proportion(counts.n1, frames);
    point.p2 = estimate_proportion(counts.n2, frames);
    point.p12 = estimate_proportion(counts.n12, frames);
    if (counts.n1 > 0) {
        const auto conditional = estimate_proportion(counts.n12, counts.n1);
        point.p2_given_1 = conditional.p;
        point.p2_given_1_stderr = conditional.stderr_();
        point.p2_given_1_ci95 = conditional.ci95;
    } else {
        point.p2_given_1 = std::numeric_limits<double>::quiet_NaN();
    }
    return point;
}

} // namespace

std::vector<DeadTimePoint> run_dead_time(const DetectorSpec& spec, int frame_gates, int separation_gates,
                                         std::span<const double> mu_list, std::uint64_t frames,
                                         std::uint64_t seed, const ExperimentOptions& opts) {
    spec.validate();
    if (frames < 1) throw std::invalid_argument("run_dead_time: frames must be >= 1");
    std::vector<DeadTimePoint> points;
    points.reserve(mu_list.size());
    for (std::size_t i = 0; i < mu_list.size(); ++i) {
        const auto train = build_double_pulse_train(frame_gates, separation_gates,
                                                    SourceSpec::coherent(mu_list[i]), spec.clock_hz);
        const auto counts = count_two_slots(train, 0, separation_gates, spec, frames,
                                            derive_stream_seed(seed, i), opts);
        points.push_back(make_dead_time_point(mu_list[i], separation_gates, frames, counts));
    }
    return points;
}

DelaySweepResult run_delay_sweep(const DetectorSpec& spec, int frame_gates,
                                 std::span<const int> separations, double target_click_probability,
                                 std::uint64_t frames, std::uint64_t seed,
                                 const ExperimentOptions& opts) {
    spec.validate();
    DelaySweepResult result;
    result.target_click_probability = target_click_probability;
    result.mean_photons =
        solve_flux_for_click_probability(target_click_probability, spec.efficiency, spec.dark_prob);
    result.frames = frames;
    const auto source = SourceSpec::coherent(result.mean_photons);
    for (std::size_t i = 0; i < separations.size(); ++i) {
        const auto train = build_double_pulse_train(frame_gates, separations[i], source, spec.clock_hz);
        const auto counts =
            count_two_slots(train, 0, separations[i], spec, frames, derive_stream_seed(seed, i), opts);
        DelayPoint point;
        point.separation_gates = separations[i];
        point.p12 = estimate_proportion(counts.n12, frames);
        result.points.push_back(point);
    }
    return result;
}

RateCurve run_saturation(const DetectorSpec& spec, std::span<const double> mu_list,
                         std::uint64_t gates_per_point, std::uint64_t seed,
                         const ExperimentOptions& opts) {
    spec.validate();
    if (gates_per_point < 2) throw std::invalid_argument("run_saturation: need at least one frame");
    RateCurve curve;
    curve.clock_hz = spec.clock_hz;
    curve.illumination_hz = spec.clock_hz / 2.0;
    const std::uint64_t frames = gates_per_point / 2;
    for (std::size_t i = 0; i < mu_list.size(); ++i) {
        const auto train = build_single_pulse_train(2, SourceSpec::coherent(mu_list[i]), spec.clock_hz);
        const std::uint64_t clicks = count_clicks(train, spec, frames, derive_stream_seed(seed, i), opts);
        RatePoint point;
        point.mean_photons = mu_list[i];
        point.clicks = clicks;
        point.gates = frames * 2;
        const double per_gate = static_cast<double>(clicks) / static_cast<double>(point.gates);
        point.rate_hz = per_gate * spec.clock_hz;
        const Ci ci = wilson_interval(clicks, point.gates);
        point.rate_ci95 = {ci.lo * spec.clock_hz, ci.hi * spec.clock_hz};
        curve.points.push_back(point);
    }
    for (const auto& p : curve.points)
        if (p.mean_photons >= 10.0) curve.asymptote_hz = std::max(curve.asymptote_hz, p.rate_hz);
    return curve;
}

namespace {

struct HbtChunk {
    std::vector<std::uint64_t> coincidences; // index lag + max_lag
    std::vector<std::uint64_t> pairs;
    std::uint64_t clicks_a = 0;
    std::uint64_t clicks_b = 0;
    std::uint64_t periods = 0;
};

struct HbtSink {
    int pos_b;
    int gate_in_frame = 0;
    std::uint8_t a = 0;
    std::uint8_t b = 0;
    std::vector<std::uint8_t> channel_a;
    std::vector<std::uint8_t> channel_b;

    void gate(bool click, bool) {
        if (gate_in_frame == 0)
            a = click;
        else if (gate_in_frame == pos_b)
            b = click;
        ++gate_in_frame;
    }
    void end_frame() {
        channel_a.push_back(a);
        channel_b.push_back(b);
        gate_in_frame = 0;
        a = b = 0;
    }
};

// Lag correlation within one chunk; cross-chunk pairs are dropped and the
// per-lag pair counts track exactly what was summed.
HbtChunk correlate_chunk(const HbtSink& sink, int max_lag) {
    HbtChunk out;
    const int lags = 2 * max_lag + 1;
    out.coincidences.assign(static_cast<std::size_t>(lags), 0);
    out.pairs.assign(static_cast<std::size_t>(lags), 0);
    const auto n = static_cast<std::int64_t>(sink.channel_a.size());
    out.periods = static_cast<std::uint64_t>(n);
    for (std::int64_t i = 0; i < n; ++i) {
        out.clicks_a += sink.channel_a[static_cast<std::size_t>(i)];
        out.clicks_b += sink.channel_b[static_cast<std::size_t>(i)];
        if (!sink.channel_a[static_cast<std::size_t>(i)]) continue;
        for (int m = -max_lag; m <= max_lag; ++m) {
            const std::int64_t j = i + m;
            if (j < 0 || j >= n) continue;
            out.coincidences[static_cast<std::size_t>(m + max_lag)] +=
                sink.channel_b[static_cast<std::size_t>(j)];
        }
    }
    for (int m = -max_lag; m <= max_lag; ++m)
        out.pairs[static_cast<std::size_t>(m + max_lag)] =
            static_cast<std::uint64_t>(std::max<std::int64_t>(0, n - std::abs(m)));
    return out;
}

} // namespace

const G2Point& G2Result::at_lag(int lag) const {
    for (const auto& p : points)
        if (p.lag_periods == lag) return p;
    throw std::out_of_range("G2Result: lag not measured");
}

G2Result run_hbt_g2(const SourceSpec& parent, int period_gates, int delay_gates,
                    const DetectorSpec& spec, std::uint64_t periods, int max_lag, std::uint64_t seed,
                    double survival, G2Normalization normalization, const ExperimentOptions& opts) {
    spec.validate();
    if (delay_gates >= period_gates)
        throw std::invalid_argument("run_hbt_g2: delay must be smaller than the pulse period "
                                    "(equal delay collapses both channels onto one gate)");
    if (max_lag < 1) throw std::invalid_argument("run_hbt_g2: max_lag must be >= 1");
    if (periods < static_cast<std::uint64_t>(2 * max_lag + 1))
        throw std::invalid_argument("run_hbt_g2: too few periods for the requested lag range");

    AmziTrain train = make_amzi_train(build_single_pulse_train(period_gates, parent, spec.clock_hz),
                                      delay_gates, survival);

    const auto plan = plan_chunks(periods, period_gates, opts.chunk_frames);
    std::vector<HbtChunk> partial(plan.n_chunks);
    for_each_chunk(plan, periods, opts.parallel, [&](std::uint64_t c, std::uint64_t count) {
        detail::AmziSource source(train);
        Rng avalanche_rng(derive_stream_seed(seed, 2 * c));
        Rng residual_rng(derive_stream_seed(seed, 2 * c + 1));
        DetectorState state;
        HbtSink sink{delay_gates};
        sink.channel_a.reserve(count);
        sink.channel_b.reserve(count);
        detail::run_frames(source, spec, count, avalanche_rng, residual_rng, state, sink);
        partial[c] = correlate_chunk(sink, max_lag);
    });

    const int lags = 2 * max_lag + 1;
    std::vector<std::uint64_t> coincidences(static_cast<std::size_t>(lags), 0);
    std::vector<std::uint64_t> pairs(static_cast<std::size_t>(lags), 0);
    std::uint64_t clicks_a = 0;
    std::uint64_t clicks_b = 0;
    std::uint64_t total_periods = 0;
    for (const auto& chunk : partial) {
        for (int i = 0; i < lags; ++i) {
            coincidences[static_cast<std::size_t>(i)] += chunk.coincidences[static_cast<std::size_t>(i)];
            pairs[static_cast<std::size_t>(i)] += chunk.pairs[static_cast<std::size_t>(i)];
        }
        clicks_a += chunk.clicks_a;
        clicks_b += chunk.clicks_b;
        total_periods += chunk.periods;
    }

    G2Result result;
    result.periods = total_periods;
    result.normalization = normalization;
    result.rate_a = static_cast<double>(clicks_a) / static_cast<double>(total_periods);
    result.rate_b = static_cast<double>(clicks_b) / static_cast<double>(total_periods);
    if (clicks_a == 0 || clicks_b == 0)
        throw std::runtime_error("run_hbt_g2: degenerate channel, singles rate is zero and the "
                                 "correlation normalization is undefined");

    double norm = result.rate_a * result.rate_b;
    double norm_counts = 0.0; // effective coincidence count behind the normalization
    if (normalization == G2Normalization::LongLag) {
        std::uint64_t c_outer = 0;
        std::uint64_t p_outer = 0;
        for (int m = -max_lag; m <= max_lag; ++m) {
            if (std::abs(m) <= max_lag / 2) continue;
            c_outer += coincidences[static_cast<std::size_t>(m + max_lag)];
            p_outer += pairs[static_cast<std::size_t>(m + max_lag)];
        }
        if (c_outer == 0) throw std::runtime_error("run_hbt_g2: no long-lag coincidences to normalize by");
        norm = static_cast<double>(c_outer) / static_cast<double>(p_outer);
        norm_counts = static_cast<double>(c_outer);
    }

    const double n_periods = static_cast<double>(total_periods);
    for (int m = -max_lag; m <= max_lag; ++m) {
        const auto idx = static_cast<std::size_t>(m + max_lag);
        G2Point point;
        point.lag_periods = m;
        point.coincidences = coincidences[idx];
        point.pairs = pairs[idx];
        const double raw = static_cast<double>(point.coincidences) / static_cast<double>(point.pairs);
        point.g2 = raw / norm;
        // Delta-method error: Poisson numerator plus singles-rate (or
        // long-lag count) uncertainty in the normalization.
        double rel_var = point.coincidences > 0 ? 1.0 / static_cast<double>(point.coincidences) : 1.0;
        if (normalization == G2Normalization::Singles)
            rel_var += (1.0 - result.rate_a) / (result.rate_a * n_periods) +
                       (1.0 - result.rate_b) / (result.rate_b * n_periods);
        else
            rel_var += 1.0 / norm_counts;
        point.stderr_ = (point.g2 > 0 ? point.g2 : 1.0 / (static_cast<double>(point.pairs) * norm)) *
                        std::sqrt(rel_var);
        result.points.push_back(point);
    }
    return result;
}

} // namespace sdapd
