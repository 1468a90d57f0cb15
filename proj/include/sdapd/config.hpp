#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdapd/detector.hpp"
#include "sdapd/experiments.hpp"
#include "sdapd/sources.hpp"

namespace sdapd {

/// Configuration or parameter problem, carrying the offending line when the
/// source is a config file.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

enum class ExperimentKind { DeadTime, DelaySweep, Saturation, Hbt };

const char* to_string(ExperimentKind kind);

/// Fully validated run description assembled from a config file plus
/// command-line overrides.
struct RunConfig {
    ExperimentKind experiment = ExperimentKind::DeadTime;
    DetectorSpec detector;
    SourceSpec source = SourceSpec::coherent(0.1);

    std::vector<double> mu_grid;   // deadtime, saturation
    std::vector<int> delta_grid;   // delaysweep
    int frame_gates = 64;          // deadtime, delaysweep
    int separation_gates = 2;      // deadtime
    double target_click_prob = 0.36; // delaysweep
    int pulse_period_gates = 8;    // hbt
    int amzi_delay_gates = 4;      // hbt
    double amzi_survival = 0.5;    // hbt
    int max_lag = 10;              // hbt
    G2Normalization normalization = G2Normalization::Singles;

    std::uint64_t frames = 1'000'000;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

/// Parses the flat key-value config text ([detector] / [source] /
/// [experiment] sections). Unknown sections or keys, repeated keys,
/// malformed values, missing required keys and out-of-range parameters all
/// raise ConfigError with the offending key and line.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::string& path);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> frames;
    std::optional<std::string> out_dir;
    int jobs = 0; // 0 = library default thread count
};

struct RunOutput {
    std::string csv_path;
    std::string manifest_path;
    double wall_time_s = 0.0;
};

/// Executes the configured experiment and writes one CSV table plus a JSON
/// run manifest into the output directory. Re-running with identical
/// config and seed reproduces the CSV byte for byte.
RunOutput run(RunConfig config, const RunOverrides& overrides = {});

} // namespace sdapd
