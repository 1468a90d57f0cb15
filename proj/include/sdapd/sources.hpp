#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sdapd/rng.hpp"

namespace sdapd {

/// Per-pulse photon-number statistics.
///  - Coherent(mu): Poissonian with mean mu.
///  - Thermal(nbar, M): negative binomial with mean nbar and mode count
///    M >= 1 (real-valued), so that g2(0) = 1 + 1/M. M = 1 is the
///    Bose-Einstein single mode.
///  - Vacuum: always zero photons (identical to Coherent(0)).
struct SourceSpec {
    enum class Kind { Vacuum, Coherent, Thermal };

    Kind kind = Kind::Vacuum;
    double mean_photons = 0.0;
    double mode_count = 1.0;

    static SourceSpec vacuum() { return SourceSpec{}; }
    static SourceSpec coherent(double mean_photons);
    static SourceSpec thermal(double mean_photons, double mode_count);

    void validate() const; // throws std::invalid_argument
};

/// Draws a photon number for one pulse of the given source.
int sample_photon_number(const SourceSpec& source, Rng& rng);

/// Binomial loss channel: each photon survives independently with
/// probability `transmission`.
int attenuate(int photons, double transmission, Rng& rng);

/// Splits a pulse on a beamsplitter of the given reflectance; photon
/// number is conserved between the two outputs.
std::pair<int, int> beamsplit(int photons, double reflectance, Rng& rng);

/// One slot of a periodic gate frame: a source firing at a fixed gate
/// position within every frame.
struct PulseSlot {
    int position = 0;
    SourceSpec source;
};

/// Periodic illumination pattern: a frame of `frame_gates` detector gates
/// that repeats identically, with sources attached to distinct positions.
struct PulseTrain {
    int frame_gates = 1;
    std::vector<PulseSlot> slots;
    double clock_hz = 1.036e9;

    double gate_period_s() const { return 1.0 / clock_hz; }
    void validate() const; // throws std::invalid_argument
};

/// Two equal-intensity pulses at positions 0 and `separation_gates` of a
/// frame, the standard double-pulse recovery-time geometry.
PulseTrain build_double_pulse_train(int frame_gates, int separation_gates, const SourceSpec& source,
                                    double clock_hz = 1.036e9);

/// Single pulse per frame at position 0.
PulseTrain build_single_pulse_train(int frame_gates, const SourceSpec& source, double clock_hz = 1.036e9);

/// Time-multiplexing interferometer: every photon of a parent pulse is
/// routed to the short arm (gate position 0) or the long arm (gate
/// position delay_gates) with probability 1/2 each, after surviving the
/// output coupler with probability `survival`. Photon counts in the two
/// slots stay correlated through the shared parent pulse.
struct AmziTrain {
    int frame_gates = 8;
    int delay_gates = 4;
    SourceSpec parent;
    double survival = 0.5;
    double clock_hz = 1.036e9;

    void validate() const;
};

AmziTrain make_amzi_train(const PulseTrain& single_slot_train, int delay_gates, double survival = 0.5);

/// Routes one parent pulse through the interferometer, returning photon
/// counts arriving at (position 0, position delay).
std::pair<int, int> amzi_route(int parent_photons, double survival, Rng& rng);

} // namespace sdapd
