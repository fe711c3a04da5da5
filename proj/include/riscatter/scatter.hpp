#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riscatter/rng.hpp"

namespace riscatter {

using cplx = std::complex<double>;

// One-bit RIS configuration, one state per meta-atom.
struct RisConfig {
    std::vector<std::uint8_t> states;  // 0 = OFF, 1 = ON

    std::size_t size() const { return states.size(); }
    void flip(std::size_t i) { states.at(i) ^= 1u; }
    bool operator==(const RisConfig&) const = default;

    static RisConfig random(std::size_t n_elements, Rng& rng);
    static RisConfig all_off(std::size_t n_elements);
};

// Resonant one-bit meta-atom: each state is an all-pass Lorentzian phase
// response with a detuned resonance. With f_on/f_off at f_c +/- gamma/2 the
// ON/OFF phase contrast at f_c is exactly pi. The ideal flag pins the
// contrast to pi at every frequency (narrowband limit used in tests).
struct MetaAtomResponse {
    double f_on = 0.0;
    double f_off = 0.0;
    double gamma = 1.0;  // resonance linewidth, Hz
    bool ideal = false;

    double phase(bool on, double f) const;
    double contrast(double f) const { return phase(true, f) - phase(false, f); }

    static MetaAtomResponse resonant(double f_center, double gamma);
    static MetaAtomResponse pinned_pi();

    // parameter validation: |contrast(f_center)| must lie in [0.9 pi, 1.1 pi]
    void validate(double f_center) const;
};

// One propagation path. A path may bounce off the same RIS element more than
// once, so interactions is a multiset of element indices. region_tags marks
// which object grid positions intercept the path (at most one unless the
// ensemble's two-tag fraction is nonzero).
struct Path {
    double delay = 0.0;       // seconds
    double amplitude = 0.0;   // >= 0
    double base_phase = 0.0;  // radians
    std::vector<std::uint32_t> interactions;
    std::vector<std::int32_t> region_tags;
};

struct DisorderParams {
    double phase_jitter = 0.5;  // max |phase perturbation| in radians
    double amplitude_sigma = 0.2;  // log-normal sigma of amplitude factor
};

struct EnsembleParams {
    std::size_t n_paths = 600;
    std::size_t n_elements = 102;
    double t_max = 500e-9;         // seconds
    double tau_rc = 150e-9;        // reverberation decay constant, seconds
    double interaction_rate = 1.2; // Poisson rate lambda
    double f_center = 2.5e9;
    double bandwidth = 66e6;       // band grid width B
    std::size_t n_bins = 256;      // power of two
    double pulse_bandwidth = 66e6; // raised-cosine pulse width
    double pulse_rolloff = 0.25;
    double tagged_fraction = 0.5;  // fraction of paths carrying a region tag
    std::size_t n_grid_positions = 23;
    double two_tag_fraction = 0.0; // nonlinearity knob: fraction of tagged paths with a second tag
    MetaAtomResponse atom = MetaAtomResponse::resonant(2.5e9, 400e6);
    DisorderParams disorder;

    void validate() const;
};

// Seeded synthetic stand-in for a reverberant cavity: a fixed set of paths
// whose power decays exponentially and whose RIS interaction counts grow with
// lifetime.
struct PathEnsemble {
    EnsembleParams params;
    std::uint64_t seed = 0;
    std::vector<Path> paths;

    std::size_t n_elements() const { return params.n_elements; }
    double f_min() const { return params.f_center - params.bandwidth / 2.0; }
    double f_max() const { return params.f_center + params.bandwidth / 2.0; }

    std::string content_digest() const;
    std::string to_json() const;
    static PathEnsemble from_json(const std::string& text);
    void save(const std::string& path) const;
    static PathEnsemble load(const std::string& path);
};

// Per-path multiplicative jitter of one mode-stirrer position. Interactions
// and region tags are untouched: the stirrer moves scatterers, not the RIS
// or the objects.
struct DisorderRealization {
    std::uint64_t realization_seed = 0;
    std::vector<double> phase_jitter;       // radians, per path
    std::vector<double> amplitude_jitter;   // multiplicative, per path

    static DisorderRealization generate(const PathEnsemble& ensemble, std::uint64_t seed);
};

// Frequency response on the band grid paired with the band-limited CIR
// obtained through the raised-cosine pulse.
struct ChannelResponse {
    std::vector<double> freqs;
    std::vector<cplx> h_f;  // H(f) on the grid
    std::vector<cplx> h_t;  // CIR taps, spacing 1/B
    double pulse_bandwidth = 0.0;

    std::vector<double> envelope() const;
    double tap_spacing() const { return 1.0 / (freqs.size() * (freqs[1] - freqs[0])); }
};

PathEnsemble synthesize_ensemble(const EnsembleParams& params, std::uint64_t seed);

ChannelResponse freq_response(const PathEnsemble& ensemble, const RisConfig& config,
                              const DisorderRealization* realization = nullptr);

cplx s12(const PathEnsemble& ensemble, const RisConfig& config, double f0);

// Standard deviation of complex S12 over random configurations, per
// frequency: sqrt(var(Re) + var(Im)), population convention. The in-situ
// efficacy metric.
std::vector<double> in_situ_std(const PathEnsemble& ensemble, std::size_t n_configs,
                                const std::vector<double>& freqs, std::uint64_t seed);

// Raised-cosine pulse spectrum, evaluated at offset df from band center.
double pulse_spectrum(double df, double width, double rolloff);

// In-place radix-2 inverse DFT with 1/N normalization; n must be a power of
// two. Bins are in fftshift-less order matching the band grid (bin 0 at the
// lower band edge).
void inverse_dft(std::vector<cplx>& x);
void forward_dft(std::vector<cplx>& x);

// thread count for parallel sections (fixed reduction order regardless)
void set_thread_count(int n);
int thread_count();

}  // namespace riscatter
