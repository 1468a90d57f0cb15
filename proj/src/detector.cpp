#include "sdapd/detector.hpp"

#include <cmath>
#include <stdexcept>

#include "sdapd/kernel.hpp"

namespace sdapd {

void DetectorSpec::validate() const {
    auto in_unit = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
    if (!in_unit(efficiency)) throw std::invalid_argument("detector: efficiency must be in [0,1]");
    if (!in_unit(dark_prob)) throw std::invalid_argument("detector: dark_prob must be in [0,1]");
    if (!std::isfinite(afterpulse_total) || afterpulse_total < 0.0 || afterpulse_total >= 1.0)
        throw std::invalid_argument("detector: afterpulse_total must be in [0,1)");
    if (!std::isfinite(afterpulse_decay_gates) || afterpulse_decay_gates <= 0.0)
        throw std::invalid_argument("detector: afterpulse_decay_gates must be positive");
    if (!in_unit(sd_residual)) throw std::invalid_argument("detector: sd_residual must be in [0,1]");
    if (!std::isfinite(sd_residual_per_photon) || sd_residual_per_photon < 0.0)
        throw std::invalid_argument("detector: sd_residual_per_photon must be >= 0");
    if (!std::isfinite(clock_hz) || clock_hz <= 0.0)
        throw std::invalid_argument("detector: clock_hz must be positive");
}

double avalanche_probability(int photons, const DetectorSpec& spec, const DetectorState& state) {
    if (photons < 0) throw std::invalid_argument("avalanche_probability: negative photon count");
    const double survive = std::pow(1.0 - spec.efficiency, photons);
    return 1.0 - (1.0 - spec.dark_prob) * survive * (1.0 - state.trap_hazard);
}

bool step_gate(DetectorState& state, int photons, const DetectorSpec& spec, Rng& rng) {
    const double p = avalanche_probability(photons, spec, state);
    const bool avalanche = rng.bernoulli(p);
    const double decay = std::exp(-1.0 / spec.afterpulse_decay_gates);
    state.trap_hazard = state.trap_hazard * decay +
                        (avalanche ? spec.afterpulse_total * (1.0 - decay) : 0.0);
    state.previous_avalanche = avalanche;
    return avalanche;
}

std::uint64_t ClickTrace::click_count() const {
    std::uint64_t n = 0;
    for (auto c : clicks) n += c;
    return n;
}

std::vector<std::uint64_t> ClickTrace::click_gates() const {
    std::vector<std::uint64_t> gates;
    for (std::size_t i = 0; i < clicks.size(); ++i)
        if (clicks[i]) gates.push_back(static_cast<std::uint64_t>(i));
    return gates;
}

ClickTrace self_difference(const AvalancheTrace& avalanches, double residual, Rng& rng) {
    if (!(residual >= 0.0 && residual <= 1.0))
        throw std::invalid_argument("self_difference: residual must be in [0,1]");
    ClickTrace out;
    out.frame_gates = avalanches.frame_gates;
    out.clicks.resize(avalanches.fired.size());
    bool previous = false; // gate -1 is avalanche-free
    for (std::size_t k = 0; k < avalanches.fired.size(); ++k) {
        const bool fired = avalanches.fired[k] != 0;
        bool click = false;
        if (fired) click = !previous || rng.bernoulli(residual);
        out.clicks[k] = click ? 1 : 0;
        previous = fired;
    }
    return out;
}

namespace {

struct TraceSink {
    std::vector<std::uint8_t>* clicks;
    std::vector<std::uint8_t>* avalanches; // may be null

    void gate(bool click, bool avalanche) {
        clicks->push_back(click ? 1 : 0);
        if (avalanches) avalanches->push_back(avalanche ? 1 : 0);
    }
    void end_frame() {}
};

template <class Source, class Train>
DetectorRun run_detector_impl(Source& source, const Train& train, const DetectorSpec& spec,
                              std::uint64_t frames, std::uint64_t seed, bool keep_avalanches) {
    spec.validate();
    if (frames < 1) throw std::invalid_argument("run_detector: frames must be >= 1");
    DetectorRun run;
    run.clicks.frame_gates = train.frame_gates;
    run.clicks.clicks.reserve(frames * static_cast<std::uint64_t>(train.frame_gates));
    if (keep_avalanches) {
        run.avalanches.emplace();
        run.avalanches->frame_gates = train.frame_gates;
        run.avalanches->fired.reserve(frames * static_cast<std::uint64_t>(train.frame_gates));
    }
    Rng avalanche_rng(derive_stream_seed(seed, 0));
    Rng residual_rng(derive_stream_seed(seed, 1));
    DetectorState state;
    TraceSink sink{&run.clicks.clicks, keep_avalanches ? &run.avalanches->fired : nullptr};
    detail::run_frames(source, spec, frames, avalanche_rng, residual_rng, state, sink);
    return run;
}

} // namespace

DetectorRun run_detector(const PulseTrain& train, const DetectorSpec& spec, std::uint64_t frames,
                         std::uint64_t seed, bool keep_avalanches) {
    detail::TrainSource source(train);
    return run_detector_impl(source, train, spec, frames, seed, keep_avalanches);
}

DetectorRun run_detector(const AmziTrain& train, const DetectorSpec& spec, std::uint64_t frames,
                         std::uint64_t seed, bool keep_avalanches) {
    detail::AmziSource source(train);
    return run_detector_impl(source, train, spec, frames, seed, keep_avalanches);
}

} // namespace sdapd
