#pragma once

#include <string>
#include <vector>

namespace riscatter {

struct WaterfillResult {
    double capacity = 0.0;              // bits per channel use
    std::vector<double> allocation;     // per-bin power, sums to 1
    double water_level = 0.0;
    bool degenerate = false;            // all-zero gains
};

struct CapacityCurve {
    std::vector<double> snr_db;
    std::vector<double> bits_per_channel_use;
    std::string channel_label;

    void export_csv(const std::string& path) const;
};

// Frequency-domain waterfilling over bin gains |H_k|^2 under unit transmit
// power per channel use. SNR is the inverse of the noise variance; the noise
// splits evenly across the N bins, so a flat unit-gain channel attains
// log2(1 + SNR).
WaterfillResult waterfill(const std::vector<double>& gains, double snr_db);

// Treat a nonnegative CIR envelope as real tap magnitudes: normalize to unit
// energy, transform to bin gains, waterfill per SNR point.
CapacityCurve capacity_from_cir(const std::vector<double>& envelope,
                                const std::vector<double>& snr_grid,
                                const std::string& label = "",
                                bool normalize_energy = true);

}  // namespace riscatter
