#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "sdapd/config.hpp"
#include "sdapd/io.hpp"

namespace sdapd {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string deadtime_csv(const std::vector<DeadTimePoint>& points) {
    std::string out = "mu,P1,P1_lo,P1_hi,P2,P2_lo,P2_hi,P12,P12_lo,P12_hi,P2given1\n";
    for (const auto& p : points) {
        out += fmt(p.mean_photons) + ',' + fmt(p.p1.p) + ',' + fmt(p.p1.ci95.lo) + ',' +
               fmt(p.p1.ci95.hi) + ',' + fmt(p.p2.p) + ',' + fmt(p.p2.ci95.lo) + ',' +
               fmt(p.p2.ci95.hi) + ',' + fmt(p.p12.p) + ',' + fmt(p.p12.ci95.lo) + ',' +
               fmt(p.p12.ci95.hi) + ',' + fmt(p.p2_given_1) + '\n';
    }
    return out;
}

std::string delaysweep_csv(const DelaySweepResult& result) {
    std::string out = "delta_gates,P12,lo,hi\n";
    for (const auto& p : result.points)
        out += std::to_string(p.separation_gates) + ',' + fmt(p.p12.p) + ',' + fmt(p.p12.ci95.lo) +
               ',' + fmt(p.p12.ci95.hi) + '\n';
    return out;
}

std::string saturation_csv(const RateCurve& curve) {
    std::string out = "mu,rate_hz,lo,hi\n";
    for (const auto& p : curve.points)
        out += fmt(p.mean_photons) + ',' + fmt(p.rate_hz) + ',' + fmt(p.rate_ci95.lo) + ',' +
               fmt(p.rate_ci95.hi) + '\n';
    return out;
}

std::string hbt_csv(const G2Result& result) {
    std::string out = "lag_periods,g2,stderr\n";
    for (const auto& p : result.points)
        out += std::to_string(p.lag_periods) + ',' + fmt(p.g2) + ',' + fmt(p.stderr_) + '\n';
    return out;
}

nlohmann::json source_json(const SourceSpec& s) {
    nlohmann::json j;
    switch (s.kind) {
    case SourceSpec::Kind::Vacuum: j["type"] = "vacuum"; break;
    case SourceSpec::Kind::Coherent: j["type"] = "coherent"; break;
    case SourceSpec::Kind::Thermal: j["type"] = "thermal"; break;
    }
    j["mean_photons"] = s.mean_photons;
    j["mode_count"] = s.mode_count;
    return j;
}

} // namespace

RunOutput run(RunConfig config, const RunOverrides& overrides) {
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.frames) config.frames = *overrides.frames;
    if (overrides.out_dir) config.out_dir = *overrides.out_dir;
#ifdef _OPENMP
    if (overrides.jobs > 0) omp_set_num_threads(overrides.jobs);
#endif

    std::filesystem::create_directories(config.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    std::string csv;
    nlohmann::json extra;
    switch (config.experiment) {
    case ExperimentKind::DeadTime: {
        const auto points = run_dead_time(config.detector, config.frame_gates, config.separation_gates,
                                          config.mu_grid, config.frames, config.seed);
        csv = deadtime_csv(points);
        break;
    }
    case ExperimentKind::DelaySweep: {
        const auto result = run_delay_sweep(config.detector, config.frame_gates, config.delta_grid,
                                            config.target_click_prob, config.frames, config.seed);
        csv = delaysweep_csv(result);
        extra["solved_mean_photons"] = result.mean_photons;
        break;
    }
    case ExperimentKind::Saturation: {
        // frames counts two-gate illumination periods here.
        const auto curve = run_saturation(config.detector, config.mu_grid, config.frames * 2,
                                          config.seed);
        csv = saturation_csv(curve);
        extra["asymptote_hz"] = curve.asymptote_hz;
        extra["illumination_hz"] = curve.illumination_hz;
        break;
    }
    case ExperimentKind::Hbt: {
        const auto result = run_hbt_g2(config.source, config.pulse_period_gates, config.amzi_delay_gates,
                                       config.detector, config.frames, config.max_lag, config.seed,
                                       config.amzi_survival, config.normalization);
        csv = hbt_csv(result);
        extra["rate_a"] = result.rate_a;
        extra["rate_b"] = result.rate_b;
        // Pulse pileup grows with the per-channel click probability; flag
        // when it is no longer negligible for correlation estimates.
        extra["pileup_warning"] = result.rate_a > 0.1 || result.rate_b > 0.1;
        break;
    }
    }

    const auto t1 = std::chrono::steady_clock::now();

    RunOutput output;
    output.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    const std::string name = to_string(config.experiment);
    output.csv_path = (std::filesystem::path(config.out_dir) / (name + ".csv")).string();
    output.manifest_path = (std::filesystem::path(config.out_dir) / "manifest.json").string();

    {
        std::ofstream out(output.csv_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + output.csv_path + "'");
        out << csv;
    }

    nlohmann::json manifest;
    manifest["code_version"] = kVersion;
    manifest["experiment"] = name;
    manifest["seed"] = config.seed;
    manifest["frames"] = config.frames;
    manifest["out_dir"] = config.out_dir;
    manifest["detector"] = {{"efficiency", config.detector.efficiency},
                            {"dark_prob", config.detector.dark_prob},
                            {"afterpulse_total", config.detector.afterpulse_total},
                            {"afterpulse_decay_gates", config.detector.afterpulse_decay_gates},
                            {"sd_residual", config.detector.sd_residual},
                            {"sd_residual_per_photon", config.detector.sd_residual_per_photon},
                            {"clock_hz", config.detector.clock_hz}};
    manifest["source"] = source_json(config.source);
    manifest["sweep"] = {{"mu_grid", config.mu_grid},
                         {"delta_grid", config.delta_grid},
                         {"frame_gates", config.frame_gates},
                         {"separation_gates", config.separation_gates},
                         {"target_click_prob", config.target_click_prob},
                         {"pulse_period_gates", config.pulse_period_gates},
                         {"amzi_delay_gates", config.amzi_delay_gates},
                         {"amzi_survival", config.amzi_survival},
                         {"max_lag", config.max_lag},
                         {"normalization",
                          config.normalization == G2Normalization::Singles ? "singles" : "longlag"}};
    manifest["results"] = extra;
    manifest["outputs"] = {output.csv_path};
    manifest["wall_time_s"] = output.wall_time_s;
#ifdef _OPENMP
    manifest["threads"] = omp_get_max_threads();
#else
    manifest["threads"] = 1;
#endif

    {
        std::ofstream out(output.manifest_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + output.manifest_path + "'");
        out << manifest.dump(2) << '\n';
    }

    return output;
}

} // namespace sdapd
