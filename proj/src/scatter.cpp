#include "riscatter/scatter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "riscatter/digest.hpp"

namespace riscatter {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

int g_threads = 1;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// iterative radix-2 Cooley-Tukey, sign = +1 inverse / -1 forward
void fft_radix2(std::vector<cplx>& x, int sign) {
    const std::size_t n = x.size();
    if (n <= 1) return;
    if (!is_pow2(n)) throw std::invalid_argument("DFT size must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = x[i + k];
                cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Parallel map over [0, n) writing into independent slots; chunked so runs
// with any thread count produce identical results.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
    const int nthreads = std::min<int>(g_threads, static_cast<int>(n));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads; }

void forward_dft(std::vector<cplx>& x) { fft_radix2(x, -1); }

void inverse_dft(std::vector<cplx>& x) {
    fft_radix2(x, +1);
    const double inv = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v *= inv;
}

RisConfig RisConfig::random(std::size_t n_elements, Rng& rng) {
    RisConfig c;
    c.states.resize(n_elements);
    for (auto& s : c.states) s = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    return c;
}

RisConfig RisConfig::all_off(std::size_t n_elements) {
    RisConfig c;
    c.states.assign(n_elements, 0);
    return c;
}

double MetaAtomResponse::phase(bool on, double f) const {
    if (ideal) return on ? kPi / 2.0 : -kPi / 2.0;
    const double fs = on ? f_on : f_off;
    return 2.0 * std::atan((f - fs) / (gamma / 2.0));
}

MetaAtomResponse MetaAtomResponse::resonant(double f_center, double gamma) {
    MetaAtomResponse r;
    r.gamma = gamma;
    r.f_on = f_center + gamma / 2.0;
    r.f_off = f_center - gamma / 2.0;
    return r;
}

MetaAtomResponse MetaAtomResponse::pinned_pi() {
    MetaAtomResponse r;
    r.ideal = true;
    return r;
}

void MetaAtomResponse::validate(double f_center) const {
    if (!ideal && gamma <= 0.0) throw std::invalid_argument("meta-atom gamma must be positive");
    const double c = std::abs(contrast(f_center));
    if (c < 0.9 * kPi || c > 1.1 * kPi)
        throw std::invalid_argument("meta-atom ON/OFF phase contrast at f_center outside [0.9 pi, 1.1 pi]");
}

void EnsembleParams::validate() const {
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (tau_rc <= 0.0) throw std::invalid_argument("tau_rc must be positive");
    if (t_max <= 0.0) throw std::invalid_argument("t_max must be positive");
    if (interaction_rate < 0.0) throw std::invalid_argument("interaction_rate must be >= 0");
    if (bandwidth <= 0.0) throw std::invalid_argument("bandwidth must be positive");
    if (!is_pow2(n_bins)) throw std::invalid_argument("n_bins must be a power of two");
    if (tagged_fraction < 0.0 || tagged_fraction > 1.0)
        throw std::invalid_argument("tagged_fraction must lie in [0, 1]");
    if (two_tag_fraction < 0.0 || two_tag_fraction > 1.0)
        throw std::invalid_argument("two_tag_fraction must lie in [0, 1]");
    if (t_max >= static_cast<double>(n_bins) / bandwidth)
        throw std::invalid_argument("t_max exceeds the DFT time window n_bins / bandwidth");
    atom.validate(f_center);
}

PathEnsemble synthesize_ensemble(const EnsembleParams& params, std::uint64_t seed) {
    params.validate();
    PathEnsemble e;
    e.params = params;
    e.seed = seed;
    e.paths.reserve(params.n_paths);
    Rng rng(derive_seed(seed, "ensemble"));
    for (std::size_t i = 0; i < params.n_paths; ++i) {
        Path p;
        p.delay = rng.uniform(0.0, params.t_max);
        // Rayleigh amplitude with scale tracking the exponential power decay:
        // E[a^2] proportional to exp(-tau / tau_rc)
        p.amplitude = rng.rayleigh(std::exp(-p.delay / (2.0 * params.tau_rc)));
        p.base_phase = rng.uniform(0.0, kTwoPi);
        if (params.n_elements > 0 && params.interaction_rate > 0.0) {
            const double mean = params.interaction_rate * (1.0 + p.delay / params.tau_rc);
            const std::uint32_t k = rng.poisson(mean);
            p.interactions.resize(k);
            for (auto& el : p.interactions)
                el = static_cast<std::uint32_t>(rng.below(params.n_elements));
        }
        if (params.n_grid_positions > 0 && rng.uniform() < params.tagged_fraction) {
            p.region_tags.push_back(static_cast<std::int32_t>(rng.below(params.n_grid_positions)));
            if (params.two_tag_fraction > 0.0 && rng.uniform() < params.two_tag_fraction)
                p.region_tags.push_back(static_cast<std::int32_t>(rng.below(params.n_grid_positions)));
        }
        e.paths.push_back(std::move(p));
    }
    return e;
}

DisorderRealization DisorderRealization::generate(const PathEnsemble& ensemble, std::uint64_t seed) {
    DisorderRealization r;
    r.realization_seed = seed;
    const auto& d = ensemble.params.disorder;
    r.phase_jitter.resize(ensemble.paths.size());
    r.amplitude_jitter.resize(ensemble.paths.size());
    Rng rng(derive_seed(seed, "disorder"));
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        r.phase_jitter[i] = rng.uniform(-d.phase_jitter, d.phase_jitter);
        r.amplitude_jitter[i] =
            d.amplitude_sigma > 0.0 ? std::exp(d.amplitude_sigma * rng.normal()) : 1.0;
    }
    return r;
}

namespace {

// Per-path complex factor for one config at one frequency. Counts how many of
// the path's bounces hit ON elements, then applies the two state phases.
cplx interaction_factor(const Path& p, const RisConfig& config, const MetaAtomResponse& atom,
                        double f) {
    if (p.interactions.empty()) return {1.0, 0.0};
    std::size_t n_on = 0;
    for (auto el : p.interactions) n_on += config.states[el];
    const double phase = static_cast<double>(n_on) * atom.phase(true, f) +
                         static_cast<double>(p.interactions.size() - n_on) * atom.phase(false, f);
    return std::polar(1.0, phase);
}

void check_config(const PathEnsemble& ensemble, const RisConfig& config) {
    if (config.size() != ensemble.n_elements())
        throw std::invalid_argument("RIS config length does not match ensemble element count");
}

}  // namespace

double pulse_spectrum(double df, double width, double rolloff) {
    const double a = std::abs(df);
    const double flat = (1.0 - rolloff) * width / 2.0;
    const double edge = (1.0 + rolloff) * width / 2.0;
    if (a <= flat) return 1.0;
    if (a >= edge) return 0.0;
    const double t = (a - flat) / (edge - flat);
    return 0.5 * (1.0 + std::cos(kPi * t));
}

ChannelResponse freq_response(const PathEnsemble& ensemble, const RisConfig& config,
                              const DisorderRealization* realization) {
    check_config(ensemble, config);
    const auto& prm = ensemble.params;
    const std::size_t n = prm.n_bins;
    const double df = prm.bandwidth / static_cast<double>(n);
    ChannelResponse out;
    out.pulse_bandwidth = prm.pulse_bandwidth;
    out.freqs.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        out.freqs[k] = prm.f_center - prm.bandwidth / 2.0 + static_cast<double>(k) * df;

    out.h_f.assign(n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const Path& p = ensemble.paths[i];
        double amp = p.amplitude;
        double ph0 = p.base_phase;
        if (realization) {
            amp *= realization->amplitude_jitter[i];
            ph0 += realization->phase_jitter[i];
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double f = out.freqs[k];
            const cplx term = std::polar(amp, ph0 - kTwoPi * f * p.delay) *
                              interaction_factor(p, config, prm.atom, f);
            out.h_f[k] += term;
        }
    }

    out.h_t.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        out.h_t[k] = out.h_f[k] *
                     pulse_spectrum(out.freqs[k] - prm.f_center, prm.pulse_bandwidth, prm.pulse_rolloff);
    inverse_dft(out.h_t);
    return out;
}

std::vector<double> ChannelResponse::envelope() const {
    std::vector<double> env(h_t.size());
    for (std::size_t i = 0; i < h_t.size(); ++i) env[i] = std::abs(h_t[i]);
    return env;
}

cplx s12(const PathEnsemble& ensemble, const RisConfig& config, double f0) {
    check_config(ensemble, config);
    if (f0 < ensemble.f_min() || f0 > ensemble.f_max())
        throw std::invalid_argument("s12 frequency outside the modeled band");
    cplx acc(0.0, 0.0);
    for (const Path& p : ensemble.paths)
        acc += std::polar(p.amplitude, p.base_phase - kTwoPi * f0 * p.delay) *
               interaction_factor(p, config, ensemble.params.atom, f0);
    return acc;
}

std::vector<double> in_situ_std(const PathEnsemble& ensemble, std::size_t n_configs,
                                const std::vector<double>& freqs, std::uint64_t seed) {
    if (n_configs < 2) throw std::invalid_argument("in_situ_std needs at least 2 configurations");
    const std::size_t n_paths = ensemble.paths.size();
    const std::size_t n_freqs = freqs.size();
    const auto& atom = ensemble.params.atom;

    // Precompute the config-independent part per (path, freq) and the per-state
    // phasors raised to every occurring bounce count.
    std::size_t max_bounces = 0;
    for (const Path& p : ensemble.paths) max_bounces = std::max(max_bounces, p.interactions.size());

    std::vector<cplx> statics(n_paths * n_freqs);
    std::vector<cplx> pow_on((max_bounces + 1) * n_freqs), pow_off((max_bounces + 1) * n_freqs);
    for (std::size_t fi = 0; fi < n_freqs; ++fi) {
        const double f = freqs[fi];
        const cplx u_on = std::polar(1.0, atom.phase(true, f));
        const cplx u_off = std::polar(1.0, atom.phase(false, f));
        cplx a(1.0, 0.0), b(1.0, 0.0);
        for (std::size_t k = 0; k <= max_bounces; ++k) {
            pow_on[k * n_freqs + fi] = a;
            pow_off[k * n_freqs + fi] = b;
            a *= u_on;
            b *= u_off;
        }
        for (std::size_t pi = 0; pi < n_paths; ++pi) {
            const Path& p = ensemble.paths[pi];
            statics[pi * n_freqs + fi] = std::polar(p.amplitude, p.base_phase - kTwoPi * f * p.delay);
        }
    }

    // per-config S12 rows, filled in parallel, reduced sequentially
    std::vector<cplx> rows(n_configs * n_freqs);
    std::vector<RisConfig> configs(n_configs);
    {
        Rng rng(derive_seed(seed, "insitu-configs"));
        for (auto& c : configs) c = RisConfig::random(ensemble.n_elements(), rng);
    }
    parallel_for(n_configs, [&](std::size_t ci) {
        const RisConfig& config = configs[ci];
        cplx* row = rows.data() + ci * n_freqs;
        std::fill(row, row + n_freqs, cplx(0.0, 0.0));
        for (std::size_t pi = 0; pi < n_paths; ++pi) {
            const Path& p = ensemble.paths[pi];
            std::size_t n_on = 0;
            for (auto el : p.interactions) n_on += config.states[el];
            const std::size_t n_off = p.interactions.size() - n_on;
            const cplx* st = statics.data() + pi * n_freqs;
            const cplx* po = pow_on.data() + n_on * n_freqs;
            const cplx* pf = pow_off.data() + n_off * n_freqs;
            for (std::size_t fi = 0; fi < n_freqs; ++fi) row[fi] += st[fi] * po[fi] * pf[fi];
        }
    });

    // two-pass variance: exact zero when the rows are identical
    std::vector<double> out(n_freqs);
    const double n = static_cast<double>(n_configs);
    for (std::size_t fi = 0; fi < n_freqs; ++fi) {
        double sr = 0.0, si = 0.0;
        for (std::size_t ci = 0; ci < n_configs; ++ci) {
            sr += rows[ci * n_freqs + fi].real();
            si += rows[ci * n_freqs + fi].imag();
        }
        const double mr = sr / n, mi = si / n;
        double var = 0.0;
        for (std::size_t ci = 0; ci < n_configs; ++ci) {
            const cplx v = rows[ci * n_freqs + fi];
            var += (v.real() - mr) * (v.real() - mr) + (v.imag() - mi) * (v.imag() - mi);
        }
        out[fi] = std::sqrt(var / n);
    }
    return out;
}

std::string PathEnsemble::content_digest() const {
    Digest d;
    d.update_u64(seed);
    d.update_u64(paths.size());
    for (const Path& p : paths) {
        d.update_double(p.delay);
        d.update_double(p.amplitude);
        d.update_double(p.base_phase);
        d.update_u64(p.interactions.size());
        for (auto el : p.interactions) d.update_u64(el);
        d.update_u64(p.region_tags.size());
        for (auto t : p.region_tags) d.update_u64(static_cast<std::uint64_t>(t));
    }
    return d.hex();
}

namespace {

nlohmann::json params_to_json(const EnsembleParams& p) {
    return {
        {"n_paths", p.n_paths},
        {"n_elements", p.n_elements},
        {"t_max", p.t_max},
        {"tau_rc", p.tau_rc},
        {"interaction_rate", p.interaction_rate},
        {"f_center", p.f_center},
        {"bandwidth", p.bandwidth},
        {"n_bins", p.n_bins},
        {"pulse_bandwidth", p.pulse_bandwidth},
        {"pulse_rolloff", p.pulse_rolloff},
        {"tagged_fraction", p.tagged_fraction},
        {"n_grid_positions", p.n_grid_positions},
        {"two_tag_fraction", p.two_tag_fraction},
        {"atom",
         {{"f_on", p.atom.f_on},
          {"f_off", p.atom.f_off},
          {"gamma", p.atom.gamma},
          {"ideal", p.atom.ideal}}},
        {"disorder",
         {{"phase_jitter", p.disorder.phase_jitter},
          {"amplitude_sigma", p.disorder.amplitude_sigma}}},
    };
}

EnsembleParams params_from_json(const nlohmann::json& j) {
    EnsembleParams p;
    p.n_paths = j.at("n_paths").get<std::size_t>();
    p.n_elements = j.at("n_elements").get<std::size_t>();
    p.t_max = j.at("t_max").get<double>();
    p.tau_rc = j.at("tau_rc").get<double>();
    p.interaction_rate = j.at("interaction_rate").get<double>();
    p.f_center = j.at("f_center").get<double>();
    p.bandwidth = j.at("bandwidth").get<double>();
    p.n_bins = j.at("n_bins").get<std::size_t>();
    p.pulse_bandwidth = j.at("pulse_bandwidth").get<double>();
    p.pulse_rolloff = j.at("pulse_rolloff").get<double>();
    p.tagged_fraction = j.at("tagged_fraction").get<double>();
    p.n_grid_positions = j.at("n_grid_positions").get<std::size_t>();
    p.two_tag_fraction = j.at("two_tag_fraction").get<double>();
    const auto& a = j.at("atom");
    p.atom.f_on = a.at("f_on").get<double>();
    p.atom.f_off = a.at("f_off").get<double>();
    p.atom.gamma = a.at("gamma").get<double>();
    p.atom.ideal = a.at("ideal").get<bool>();
    const auto& d = j.at("disorder");
    p.disorder.phase_jitter = d.at("phase_jitter").get<double>();
    p.disorder.amplitude_sigma = d.at("amplitude_sigma").get<double>();
    return p;
}

}  // namespace

std::string PathEnsemble::to_json() const {
    nlohmann::json j = {
        {"format", "riscatter-ensemble-v1"},
        {"seed", seed},
        {"params", params_to_json(params)},
        {"digest", content_digest()},
    };
    return j.dump(2);
}

PathEnsemble PathEnsemble::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "riscatter-ensemble-v1")
        throw std::invalid_argument("unsupported ensemble file format");
    PathEnsemble e = synthesize_ensemble(params_from_json(j.at("params")), j.at("seed").get<std::uint64_t>());
    if (e.content_digest() != j.at("digest").get<std::string>())
        throw std::runtime_error("ensemble digest mismatch: stored file does not match re-synthesis");
    return e;
}

void PathEnsemble::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_json() << "\n";
}

PathEnsemble PathEnsemble::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string digest_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    Digest d;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        d.update(buf, static_cast<std::size_t>(in.gcount()));
    return d.hex();
}

}  // namespace riscatter
