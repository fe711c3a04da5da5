#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "riscatter/scatter.hpp"

namespace riscatter {

struct Grid {
    std::size_t n_positions = 23;
    std::vector<std::string> labels;  // optional, defaults to "p<i>"

    void validate() const;
    std::string label(std::size_t i) const;
};

// A scene is a set: objects are identical, so only which positions are
// occupied matters. Indices kept sorted.
struct Scene {
    std::vector<std::size_t> occupied;

    Scene() = default;
    explicit Scene(std::vector<std::size_t> positions);
    std::size_t k() const { return occupied.size(); }
    bool operator==(const Scene&) const = default;

    static Scene random(std::size_t n_positions, std::size_t k, Rng& rng);
};

struct ObjectModel {
    cplx blocking_factor = {0.0, 0.0};  // multiplier on tagged paths when occupied
};

// Baseline WFP plus per-position difference WFPs over a fixed random RIS
// configuration sequence.
struct FingerprintDictionary {
    std::uint64_t config_seed = 0;
    std::size_t m_configs = 0;
    std::size_t n_elements = 0;
    double f0 = 0.0;
    std::vector<cplx> baseline;               // length M
    std::vector<std::vector<cplx>> deltas;    // n_positions x M
    std::vector<std::size_t> warnings;        // positions with no tagged paths

    std::size_t n_positions() const { return deltas.size(); }
    std::vector<RisConfig> configs() const;

    std::string to_json() const;
    static FingerprintDictionary from_json(const std::string& text);
    void save(const std::string& path) const;
    static FingerprintDictionary load(const std::string& path);
};

struct DecodeResult {
    Scene scene;
    double residual = 0.0;
};

// Single-frequency transmission with objects present: every path whose region
// tag is occupied picks up the blocking factor once per occupied tag.
cplx s12_with_objects(const PathEnsemble& ensemble, const RisConfig& config, double f0,
                      const Scene& scene, const ObjectModel& model);

// One calibration sweep per grid position plus the empty-scene baseline:
// n_positions + 1 sweeps instead of C(n_positions, k).
FingerprintDictionary calibrate(const PathEnsemble& ensemble, const Grid& grid,
                                const ObjectModel& model, std::size_t m_configs, double f0,
                                std::uint64_t seed);

// Measurement of a scene through the full model, plus circular complex
// Gaussian noise calibrated so the empirical SNR matches snr_db. Pass
// +infinity to disable noise.
std::vector<cplx> measure(const PathEnsemble& ensemble, const FingerprintDictionary& dictionary,
                          const Scene& scene, const ObjectModel& model, double snr_db,
                          std::uint64_t noise_seed);

// Noiseless linear synthesis from the dictionary alone (baseline + deltas).
std::vector<cplx> synth_measurement(const FingerprintDictionary& dictionary, const Scene& scene);

// Exhaustive search over all C(n_positions, k) subsets for the combination of
// WFPs closest to the measurement. Lexicographically first subset wins ties.
DecodeResult brute_force_decode(const std::vector<cplx>& measurement,
                                const FingerprintDictionary& dictionary, std::size_t k);

double success_rate(const Scene& decoded, const Scene& truth);

std::uint64_t binomial(std::size_t n, std::size_t k);

// Visit k-subsets of [0, n) in lexicographic order.
template <typename F>
void for_each_subset(std::size_t n, std::size_t k, F&& body) {
    if (k > n) return;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        body(const_cast<const std::vector<std::size_t>&>(idx));
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace riscatter
