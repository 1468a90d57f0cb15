#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdapd/rng.hpp"
#include "sdapd/sources.hpp"

namespace sdapd {

/// Gated Geiger-mode detector with self-differencing readout.
///
/// Per gate, an avalanche fires with probability
///   P = 1 - (1 - dark_prob) * (1 - efficiency)^n * (1 - trap_hazard)
/// and the self-differencing circuit suppresses the click of any avalanche
/// whose preceding gate also avalanched (up to the residual probability
/// sd_residual). Trapped carriers from every avalanche release over later
/// gates with a single-exponential hazard integrating to afterpulse_total.
struct DetectorSpec {
    double efficiency = 0.10;
    double dark_prob = 1.67e-5;
    double afterpulse_total = 0.05;
    double afterpulse_decay_gates = 10.0;
    double sd_residual = 0.0;
    // Optional photon-number dependence of the cancellation residual:
    // residual probability = sd_residual + sd_residual_per_photon * n.
    double sd_residual_per_photon = 0.0;
    double clock_hz = 1.036e9;

    double gate_period_s() const { return 1.0 / clock_hz; }
    // The self-differencing rule alone fixes the dead time at two gates.
    double dead_time_s() const { return 2.0 / clock_hz; }

    void validate() const; // throws std::invalid_argument
};

/// Carry-over state of the avalanche process between gates.
struct DetectorState {
    double trap_hazard = 0.0;      // afterpulse avalanche probability in the current gate
    bool previous_avalanche = false;
};

/// Avalanche probability for a gate containing `photons` photons, given the
/// current trap hazard.
double avalanche_probability(int photons, const DetectorSpec& spec, const DetectorState& state);

/// Advances the detector by one gate: draws the avalanche, then updates the
/// trap hazard (exponential decay, plus a new trap population normalized so
/// the expected number of induced afterpulses per avalanche is
/// afterpulse_total). Returns whether an avalanche fired.
bool step_gate(DetectorState& state, int photons, const DetectorSpec& spec, Rng& rng);

/// Frame-aligned per-gate event sequences.
struct AvalancheTrace {
    std::vector<std::uint8_t> fired;
    int frame_gates = 1;
};

struct ClickTrace {
    std::vector<std::uint8_t> clicks;
    int frame_gates = 1;

    std::uint64_t click_count() const;
    std::vector<std::uint64_t> click_gates() const; // ascending gate indices
};

/// Self-differencing click rule applied to a recorded avalanche trace:
/// click[k] = fired[k] && (!fired[k-1] || Bernoulli(residual)), with gate -1
/// avalanche-free. The rng is consumed only where fired[k] && fired[k-1] and
/// the residual is strictly inside (0,1).
ClickTrace self_difference(const AvalancheTrace& avalanches, double residual, Rng& rng);

/// End-to-end single-stream run over `frames` repetitions of the train.
/// This is the sequential reference implementation: one continuous detector
/// state, gates evolved strictly in order. Identical inputs give bit
/// identical traces.
struct DetectorRun {
    ClickTrace clicks;
    std::optional<AvalancheTrace> avalanches;
};

DetectorRun run_detector(const PulseTrain& train, const DetectorSpec& spec, std::uint64_t frames,
                         std::uint64_t seed, bool keep_avalanches = false);
DetectorRun run_detector(const AmziTrain& train, const DetectorSpec& spec, std::uint64_t frames,
                         std::uint64_t seed, bool keep_avalanches = false);

} // namespace sdapd
