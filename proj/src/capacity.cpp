#include "riscatter/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "riscatter/scatter.hpp"

namespace riscatter {

WaterfillResult waterfill(const std::vector<double>& gains, double snr_db) {
    if (gains.empty()) throw std::invalid_argument("waterfill: empty gain vector");
    for (double g : gains)
        if (g < 0.0 || !std::isfinite(g)) throw std::invalid_argument("waterfill: gains must be finite and nonnegative");

    const std::size_t n = gains.size();
    WaterfillResult res;
    res.allocation.assign(n, 0.0);
    if (std::all_of(gains.begin(), gains.end(), [](double g) { return g == 0.0; })) {
        res.degenerate = true;
        return res;
    }

    const double sigma2 = std::pow(10.0, -snr_db / 10.0);
    // per-bin inverse effective gain; noise variance sigma2 splits over n bins
    std::vector<double> floor(n);
    for (std::size_t k = 0; k < n; ++k)
        floor[k] = gains[k] > 0.0 ? sigma2 / (static_cast<double>(n) * gains[k])
                                  : std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return floor[a] < floor[b]; });

    // standard sorted-bins water level: try m active bins, accept when the
    // level sits between floor[m-1] and floor[m]
    double mu = 0.0;
    std::size_t active = 0;
    double cum = 0.0;
    for (std::size_t m = 1; m <= n; ++m) {
        if (!std::isfinite(floor[order[m - 1]])) break;
        cum += floor[order[m - 1]];
        const double cand = (1.0 + cum) / static_cast<double>(m);
        if (cand > floor[order[m - 1]] && (m == n || cand <= floor[order[m]])) {
            mu = cand;
            active = m;
        }
    }
    if (active == 0) throw std::logic_error("waterfill: no feasible water level");

    res.water_level = mu;
    double cap = 0.0;
    for (std::size_t m = 0; m < active; ++m) {
        const std::size_t k = order[m];
        const double p = mu - floor[k];
        res.allocation[k] = p;
        cap += std::log2(1.0 + p / floor[k]);
    }
    res.capacity = cap / static_cast<double>(n);
    return res;
}

CapacityCurve capacity_from_cir(const std::vector<double>& envelope,
                                const std::vector<double>& snr_grid, const std::string& label,
                                bool normalize_energy) {
    if (envelope.empty()) throw std::invalid_argument("capacity_from_cir: empty envelope");
    double energy = 0.0;
    for (double v : envelope) {
        if (v < 0.0) throw std::invalid_argument("capacity_from_cir: envelope must be nonnegative");
        energy += v * v;
    }
    if (energy <= 0.0) throw std::invalid_argument("capacity_from_cir: zero envelope");

    const double scale = normalize_energy ? 1.0 / std::sqrt(energy) : 1.0;
    std::vector<cplx> taps(envelope.size());
    for (std::size_t i = 0; i < envelope.size(); ++i) taps[i] = cplx(envelope[i] * scale, 0.0);
    forward_dft(taps);
    std::vector<double> gains(taps.size());
    for (std::size_t k = 0; k < taps.size(); ++k) gains[k] = std::norm(taps[k]);

    CapacityCurve curve;
    curve.channel_label = label;
    curve.snr_db = snr_grid;
    curve.bits_per_channel_use.reserve(snr_grid.size());
    for (double snr : snr_grid) curve.bits_per_channel_use.push_back(waterfill(gains, snr).capacity);
    return curve;
}

void CapacityCurve::export_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "snr_db,capacity_bits_per_channel_use,label\n";
    out.precision(17);
    for (std::size_t i = 0; i < snr_db.size(); ++i)
        out << snr_db[i] << "," << bits_per_channel_use[i] << "," << channel_label << "\n";
}

}  // namespace riscatter
