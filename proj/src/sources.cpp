#include "sdapd/sources.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sdapd/sampling.hpp"

namespace sdapd {

SourceSpec SourceSpec::coherent(double mean_photons) {
    SourceSpec s;
    s.kind = Kind::Coherent;
    s.mean_photons = mean_photons;
    s.validate();
    return s;
}

SourceSpec SourceSpec::thermal(double mean_photons, double mode_count) {
    SourceSpec s;
    s.kind = Kind::Thermal;
    s.mean_photons = mean_photons;
    s.mode_count = mode_count;
    s.validate();
    return s;
}

void SourceSpec::validate() const {
    if (!std::isfinite(mean_photons) || mean_photons < 0.0)
        throw std::invalid_argument("source: mean_photons must be finite and non-negative");
    if (kind == Kind::Thermal && (!std::isfinite(mode_count) || mode_count < 1.0))
        throw std::invalid_argument("source: mode_count must be >= 1");
}

int sample_photon_number(const SourceSpec& source, Rng& rng) {
    switch (source.kind) {
    case SourceSpec::Kind::Vacuum:
        return 0;
    case SourceSpec::Kind::Coherent:
        return poisson_draw(source.mean_photons, rng);
    case SourceSpec::Kind::Thermal:
        return negative_binomial_draw(source.mean_photons, source.mode_count, rng);
    }
    return 0;
}

int attenuate(int photons, double transmission, Rng& rng) {
    if (photons < 0) throw std::invalid_argument("attenuate: negative photon count");
    if (!(transmission >= 0.0 && transmission <= 1.0))
        throw std::invalid_argument("attenuate: transmission must be in [0,1]");
    return binomial_draw(photons, transmission, rng);
}

std::pair<int, int> beamsplit(int photons, double reflectance, Rng& rng) {
    if (photons < 0) throw std::invalid_argument("beamsplit: negative photon count");
    if (!(reflectance >= 0.0 && reflectance <= 1.0))
        throw std::invalid_argument("beamsplit: reflectance must be in [0,1]");
    const int reflected = binomial_draw(photons, reflectance, rng);
    return {reflected, photons - reflected};
}

void PulseTrain::validate() const {
    if (frame_gates < 1) throw std::invalid_argument("train: frame_gates must be >= 1");
    if (!(clock_hz > 0.0) || !std::isfinite(clock_hz))
        throw std::invalid_argument("train: clock_hz must be positive");
    std::vector<int> seen;
    for (const auto& slot : slots) {
        if (slot.position < 0 || slot.position >= frame_gates)
            throw std::invalid_argument("train: slot position " + std::to_string(slot.position) +
                                        " outside frame of " + std::to_string(frame_gates) + " gates");
        slot.source.validate();
        seen.push_back(slot.position);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw std::invalid_argument("train: duplicate slot positions");
}

PulseTrain build_double_pulse_train(int frame_gates, int separation_gates, const SourceSpec& source,
                                    double clock_hz) {
    if (frame_gates < 2) throw std::invalid_argument("double pulse train: frame_gates must be >= 2");
    if (separation_gates < 1 || separation_gates >= frame_gates)
        throw std::invalid_argument("double pulse train: separation must be in [1, frame_gates)");
    PulseTrain t;
    t.frame_gates = frame_gates;
    t.clock_hz = clock_hz;
    t.slots = {{0, source}, {separation_gates, source}};
    t.validate();
    return t;
}

PulseTrain build_single_pulse_train(int frame_gates, const SourceSpec& source, double clock_hz) {
    PulseTrain t;
    t.frame_gates = frame_gates;
    t.clock_hz = clock_hz;
    t.slots = {{0, source}};
    t.validate();
    return t;
}

void AmziTrain::validate() const {
    if (frame_gates < 2) throw std::invalid_argument("amzi: frame_gates must be >= 2");
    if (delay_gates < 1 || delay_gates >= frame_gates)
        throw std::invalid_argument("amzi: delay must be in [1, frame_gates)");
    if (!(survival >= 0.0 && survival <= 1.0))
        throw std::invalid_argument("amzi: survival must be in [0,1]");
    if (!(clock_hz > 0.0)) throw std::invalid_argument("amzi: clock_hz must be positive");
    parent.validate();
}

AmziTrain make_amzi_train(const PulseTrain& single_slot_train, int delay_gates, double survival) {
    single_slot_train.validate();
    if (single_slot_train.slots.size() != 1 || single_slot_train.slots[0].position != 0)
        throw std::invalid_argument("amzi: input train must have a single slot at position 0");
    AmziTrain a;
    a.frame_gates = single_slot_train.frame_gates;
    a.delay_gates = delay_gates;
    a.parent = single_slot_train.slots[0].source;
    a.survival = survival;
    a.clock_hz = single_slot_train.clock_hz;
    a.validate();
    return a;
}

std::pair<int, int> amzi_route(int parent_photons, double survival, Rng& rng) {
    int n_short = 0;
    int n_long = 0;
    const double half = 0.5 * survival;
    for (int i = 0; i < parent_photons; ++i) {
        const double u = rng.next_double();
        if (u < half)
            ++n_short;
        else if (u < survival)
            ++n_long;
        // else lost at the output coupler
    }
    return {n_short, n_long};
}

} // namespace sdapd
