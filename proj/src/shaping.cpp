#include "riscatter/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace riscatter {

ShapingObjective ShapingObjective::envelope_at_time(double t, std::size_t n_realizations) {
    return {ObjectiveKind::EnvelopeAtTime, t, 0.0, 0.0, n_realizations};
}
ShapingObjective ShapingObjective::bimodal(double t1, double t2, std::size_t n_realizations) {
    return {ObjectiveKind::Bimodal, 0.0, t1, t2, n_realizations};
}
ShapingObjective ShapingObjective::suppress_at_time(double t, std::size_t n_realizations) {
    return {ObjectiveKind::SuppressAtTime, t, 0.0, 0.0, n_realizations};
}

std::size_t tap_index(const PathEnsemble& ensemble, double t) {
    const double dt = 1.0 / ensemble.params.bandwidth;
    const auto idx = static_cast<std::size_t>(std::llround(t / dt));
    if (t < 0.0 || idx >= ensemble.params.n_bins)
        throw std::invalid_argument("focal time outside the CIR duration");
    return idx;
}

ShapingEvaluator::ShapingEvaluator(const PathEnsemble& ensemble, std::size_t n_realizations,
                                   std::uint64_t seed)
    : ensemble_(ensemble), n_realizations_(n_realizations), n_bins_(ensemble.params.n_bins) {
    if (n_realizations < 1) throw std::invalid_argument("n_realizations must be >= 1");
    const auto& prm = ensemble.params;
    const std::size_t n_paths = ensemble.paths.size();
    const double df = prm.bandwidth / static_cast<double>(n_bins_);
    constexpr double kTwoPi = 6.283185307179586476925286766559;

    max_bounces_ = 0;
    for (const Path& p : ensemble.paths) max_bounces_ = std::max(max_bounces_, p.interactions.size());

    pulse_.resize(n_bins_);
    pow_on_.resize((max_bounces_ + 1) * n_bins_);
    pow_off_.resize((max_bounces_ + 1) * n_bins_);
    std::vector<double> freqs(n_bins_);
    for (std::size_t k = 0; k < n_bins_; ++k) {
        freqs[k] = prm.f_center - prm.bandwidth / 2.0 + static_cast<double>(k) * df;
        pulse_[k] = pulse_spectrum(freqs[k] - prm.f_center, prm.pulse_bandwidth, prm.pulse_rolloff);
        const cplx u_on = std::polar(1.0, prm.atom.phase(true, freqs[k]));
        const cplx u_off = std::polar(1.0, prm.atom.phase(false, freqs[k]));
        cplx a(1.0, 0.0), b(1.0, 0.0);
        for (std::size_t c = 0; c <= max_bounces_; ++c) {
            pow_on_[c * n_bins_ + k] = a;
            pow_off_[c * n_bins_ + k] = b;
            a *= u_on;
            b *= u_off;
        }
    }

    statics_.resize(n_realizations * n_paths * n_bins_);
    for (std::size_t r = 0; r < n_realizations; ++r) {
        const auto real = DisorderRealization::generate(ensemble, derive_seed(seed, "realization", r));
        for (std::size_t p = 0; p < n_paths; ++p) {
            const Path& path = ensemble.paths[p];
            const double amp = path.amplitude * real.amplitude_jitter[p];
            const double ph0 = path.base_phase + real.phase_jitter[p];
            cplx* row = statics_.data() + (r * n_paths + p) * n_bins_;
            for (std::size_t k = 0; k < n_bins_; ++k)
                row[k] = std::polar(amp, ph0 - kTwoPi * freqs[k] * path.delay);
        }
    }
}

std::vector<double> ShapingEvaluator::envelope(const RisConfig& config) const {
    if (config.size() != ensemble_.n_elements())
        throw std::invalid_argument("RIS config length does not match ensemble element count");
    const std::size_t n_paths = ensemble_.paths.size();
    std::vector<double> env(n_bins_, 0.0);
    std::vector<cplx> acc(n_bins_);
    for (std::size_t r = 0; r < n_realizations_; ++r) {
        std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
        for (std::size_t p = 0; p < n_paths; ++p) {
            const Path& path = ensemble_.paths[p];
            std::size_t n_on = 0;
            for (auto el : path.interactions) n_on += config.states[el];
            const std::size_t n_off = path.interactions.size() - n_on;
            const cplx* st = statics_.data() + (r * n_paths + p) * n_bins_;
            const cplx* po = pow_on_.data() + n_on * n_bins_;
            const cplx* pf = pow_off_.data() + n_off * n_bins_;
            for (std::size_t k = 0; k < n_bins_; ++k) acc[k] += st[k] * po[k] * pf[k];
        }
        for (std::size_t k = 0; k < n_bins_; ++k) acc[k] *= pulse_[k];
        inverse_dft(acc);
        for (std::size_t k = 0; k < n_bins_; ++k) env[k] += std::abs(acc[k]);
    }
    for (auto& v : env) v /= static_cast<double>(n_realizations_);
    return env;
}

double ShapingEvaluator::objective(const RisConfig& config, const ShapingObjective& obj) const {
    const auto env = envelope(config);
    switch (obj.kind) {
        case ObjectiveKind::EnvelopeAtTime:
            return env[tap_index(ensemble_, obj.t_focus)];
        case ObjectiveKind::Bimodal:
            return std::min(env[tap_index(ensemble_, obj.t1)], env[tap_index(ensemble_, obj.t2)]);
        case ObjectiveKind::SuppressAtTime:
            return -env[tap_index(ensemble_, obj.t_focus)];
    }
    throw std::logic_error("unknown objective kind");
}

std::vector<double> averaged_envelope(const PathEnsemble& ensemble, const RisConfig& config,
                                      std::size_t n_realizations, std::uint64_t seed) {
    if (n_realizations < 1) throw std::invalid_argument("n_realizations must be >= 1");
    std::vector<double> acc(ensemble.params.n_bins, 0.0);
    for (std::size_t r = 0; r < n_realizations; ++r) {
        const auto real = DisorderRealization::generate(ensemble, derive_seed(seed, "realization", r));
        const auto resp = freq_response(ensemble, config, &real);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::abs(resp.h_t[i]);
    }
    for (auto& v : acc) v /= static_cast<double>(n_realizations);
    return acc;
}

double evaluate_objective(const PathEnsemble& ensemble, const RisConfig& config,
                          const ShapingObjective& objective, std::uint64_t seed) {
    return ShapingEvaluator(ensemble, objective.n_realizations, seed).objective(config, objective);
}

GreedyResult greedy_optimize(const PathEnsemble& ensemble, const ShapingObjective& objective,
                             std::size_t max_passes, std::uint64_t seed) {
    if (max_passes < 1) throw std::invalid_argument("max_passes must be >= 1");
    const std::size_t n = ensemble.n_elements();
    // one common disorder stream for all candidate evaluations, so flips are
    // compared on the same realizations
    const std::uint64_t disorder_seed = derive_seed(seed, "shaping-disorder");
    const ShapingEvaluator evaluator(ensemble, objective.n_realizations, disorder_seed);

    GreedyResult res;
    {
        Rng rng(derive_seed(seed, "shaping-init"));
        res.config = RisConfig::random(n, rng);
    }
    double best = evaluator.objective(res.config, objective);
    res.trace.configs.push_back(res.config);
    res.trace.objective_values.push_back(best);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t pass = 0; pass < max_passes; ++pass) {
        res.trace.passes = pass + 1;
        Rng perm_rng(derive_seed(seed, "shaping-pass", pass));
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[perm_rng.below(i)]);

        bool any_accepted = false;
        for (std::size_t el : order) {
            res.config.flip(el);
            const double cand = evaluator.objective(res.config, objective);
            ++res.trace.flips_attempted;
            const bool accept = cand > best;  // equal objective rejected
            if (accept) {
                best = cand;
                any_accepted = true;
                res.trace.configs.push_back(res.config);
                res.trace.objective_values.push_back(best);
            } else {
                res.config.flip(el);  // revert
            }
            res.trace.flips.push_back({pass, res.trace.flips_attempted, el, accept, best});
        }
        if (!any_accepted) {
            res.trace.converged = true;
            break;
        }
    }
    return res;
}

void OptimizationTrace::export_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "pass,flip_index,element,accepted,objective_value\n";
    out.precision(17);
    for (const auto& f : flips)
        out << f.pass << "," << f.flip_index << "," << f.element << "," << (f.accepted ? 1 : 0)
            << "," << f.objective << "\n";
}

}  // namespace riscatter
