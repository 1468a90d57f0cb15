#pragma once

// Inner gate loop shared by the trace-retaining reference path and the
// counting experiment kernels. Header-only so sinks and sources inline.

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "sdapd/detector.hpp"
#include "sdapd/rng.hpp"
#include "sdapd/sampling.hpp"
#include "sdapd/sources.hpp"

namespace sdapd::detail {

// Photon-number sampler prepared for repeated draws from one source.
// Coherent means use a tabulated CDF; thermal modes use exact inversion or
// the gamma-mixed construction.
class PreparedSource {
public:
    explicit PreparedSource(const SourceSpec& spec) : spec_(spec) {
        spec.validate();
        if (spec.kind == SourceSpec::Kind::Coherent && spec.mean_photons > 0.0)
            table_ = PoissonTable(spec.mean_photons);
    }

    int sample(Rng& rng) const {
        switch (spec_.kind) {
        case SourceSpec::Kind::Vacuum:
            return 0;
        case SourceSpec::Kind::Coherent:
            return spec_.mean_photons > 0.0 ? table_.sample(rng) : 0;
        case SourceSpec::Kind::Thermal:
            return negative_binomial_draw(spec_.mean_photons, spec_.mode_count, rng);
        }
        return 0;
    }

private:
    SourceSpec spec_;
    PoissonTable table_;
};

// Per-frame photon feed from a slotted pulse train.
class TrainSource {
public:
    explicit TrainSource(const PulseTrain& train) : frame_gates_(train.frame_gates) {
        train.validate();
        by_position_.assign(static_cast<std::size_t>(frame_gates_), -1);
        for (const auto& slot : train.slots) {
            by_position_[static_cast<std::size_t>(slot.position)] = static_cast<int>(samplers_.size());
            samplers_.emplace_back(slot.source);
        }
    }

    int frame_gates() const { return frame_gates_; }
    void begin_frame(Rng&) {}
    int photons(int position, Rng& rng) const {
        const int idx = by_position_[static_cast<std::size_t>(position)];
        return idx >= 0 ? samplers_[static_cast<std::size_t>(idx)].sample(rng) : 0;
    }

private:
    int frame_gates_;
    std::vector<int> by_position_;
    std::vector<PreparedSource> samplers_;
};

// Per-frame photon feed from the time-multiplexing interferometer: one
// parent pulse sampled per frame, photons routed to positions 0 and delay.
class AmziSource {
public:
    explicit AmziSource(const AmziTrain& train)
        : frame_gates_(train.frame_gates), delay_(train.delay_gates), survival_(train.survival),
          parent_(train.parent) {
        train.validate();
    }

    int frame_gates() const { return frame_gates_; }

    void begin_frame(Rng& rng) {
        const int n = parent_.sample(rng);
        const auto routed = amzi_route(n, survival_, rng);
        n_short_ = routed.first;
        n_long_ = routed.second;
    }

    int photons(int position, Rng&) const {
        if (position == 0) return n_short_;
        if (position == delay_) return n_long_;
        return 0;
    }

private:
    int frame_gates_;
    int delay_;
    double survival_;
    PreparedSource parent_;
    int n_short_ = 0;
    int n_long_ = 0;
};

// Per-detector constants precomputed for the gate loop.
struct GateModel {
    explicit GateModel(const DetectorSpec& spec)
        : dark_prob(spec.dark_prob), no_dark(1.0 - spec.dark_prob),
          decay(std::exp(-1.0 / spec.afterpulse_decay_gates)),
          kick(spec.afterpulse_total * (1.0 - std::exp(-1.0 / spec.afterpulse_decay_gates))),
          residual(spec.sd_residual), residual_per_photon(spec.sd_residual_per_photon),
          one_minus_eta(1.0 - spec.efficiency) {
        survival_table.resize(kTableSize);
        survival_table[0] = 1.0;
        for (std::size_t n = 1; n < kTableSize; ++n)
            survival_table[n] = survival_table[n - 1] * one_minus_eta;
    }

    double no_detection(int photons) const {
        const auto n = static_cast<std::size_t>(photons);
        return n < kTableSize ? survival_table[n] : std::pow(one_minus_eta, photons);
    }

    static constexpr std::size_t kTableSize = 1024;
    double dark_prob, no_dark, decay, kick, residual, residual_per_photon, one_minus_eta;
    std::vector<double> survival_table;
};

// Evolves `frames` frames of the source through the detector, feeding every
// gate's (click, avalanche) outcome to the sink. The avalanche stream and
// the cancellation-residual stream are separate generators so that the
// standalone self_difference pass reproduces the inline rule draw for draw.
template <class Source, class Sink>
void run_frames(Source& source, const DetectorSpec& spec, std::uint64_t frames, Rng& avalanche_rng,
                Rng& residual_rng, DetectorState& state, Sink&& sink) {
    const GateModel model(spec);
    const int gates = source.frame_gates();
    for (std::uint64_t f = 0; f < frames; ++f) {
        source.begin_frame(avalanche_rng);
        for (int g = 0; g < gates; ++g) {
            const int n = source.photons(g, avalanche_rng);
            double p;
            if (n == 0 && state.trap_hazard == 0.0)
                p = model.dark_prob;
            else
                p = 1.0 - model.no_dark * model.no_detection(n) * (1.0 - state.trap_hazard);
            const bool avalanche = avalanche_rng.bernoulli(p);
            bool click = false;
            if (avalanche) {
                if (!state.previous_avalanche)
                    click = true;
                else
                    click = residual_rng.bernoulli(model.residual + model.residual_per_photon * n);
            }
            state.trap_hazard = state.trap_hazard * model.decay + (avalanche ? model.kick : 0.0);
            state.previous_avalanche = avalanche;
            sink.gate(click, avalanche);
        }
        sink.end_frame();
    }
}

} // namespace sdapd::detail
