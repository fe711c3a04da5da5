#include "riscatter/wfp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace riscatter {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void Grid::validate() const {
    if (n_positions < 1) throw std::invalid_argument("grid needs at least one position");
    if (!labels.empty() && labels.size() != n_positions)
        throw std::invalid_argument("grid label count does not match n_positions");
}

std::string Grid::label(std::size_t i) const {
    if (i < labels.size()) return labels[i];
    return "p" + std::to_string(i);
}

Scene::Scene(std::vector<std::size_t> positions) : occupied(std::move(positions)) {
    std::sort(occupied.begin(), occupied.end());
    if (std::adjacent_find(occupied.begin(), occupied.end()) != occupied.end())
        throw std::invalid_argument("scene positions must be distinct");
}

Scene Scene::random(std::size_t n_positions, std::size_t k, Rng& rng) {
    if (k > n_positions) throw std::invalid_argument("scene size exceeds grid size");
    // partial Fisher-Yates over position indices
    std::vector<std::size_t> pool(n_positions);
    for (std::size_t i = 0; i < n_positions; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + rng.below(n_positions - i)]);
    pool.resize(k);
    return Scene(std::move(pool));
}

cplx s12_with_objects(const PathEnsemble& ensemble, const RisConfig& config, double f0,
                      const Scene& scene, const ObjectModel& model) {
    if (config.size() != ensemble.n_elements())
        throw std::invalid_argument("RIS config length does not match ensemble element count");
    if (f0 < ensemble.f_min() || f0 > ensemble.f_max())
        throw std::invalid_argument("s12 frequency outside the modeled band");
    const auto& atom = ensemble.params.atom;
    cplx acc(0.0, 0.0);
    for (const Path& p : ensemble.paths) {
        cplx mult(1.0, 0.0);
        for (auto tag : p.region_tags)
            if (std::binary_search(scene.occupied.begin(), scene.occupied.end(),
                                   static_cast<std::size_t>(tag)))
                mult *= model.blocking_factor;
        std::size_t n_on = 0;
        for (auto el : p.interactions) n_on += config.states[el];
        const double phase = p.base_phase - kTwoPi * f0 * p.delay +
                             static_cast<double>(n_on) * atom.phase(true, f0) +
                             static_cast<double>(p.interactions.size() - n_on) * atom.phase(false, f0);
        acc += mult * std::polar(p.amplitude, phase);
    }
    return acc;
}

std::vector<RisConfig> FingerprintDictionary::configs() const {
    Rng rng(derive_seed(config_seed, "wfp-configs"));
    std::vector<RisConfig> out(m_configs);
    for (auto& c : out) c = RisConfig::random(n_elements, rng);
    return out;
}

FingerprintDictionary calibrate(const PathEnsemble& ensemble, const Grid& grid,
                                const ObjectModel& model, std::size_t m_configs, double f0,
                                std::uint64_t seed) {
    grid.validate();
    if (m_configs < 1) throw std::invalid_argument("calibrate needs m_configs >= 1");
    if (grid.n_positions > ensemble.params.n_grid_positions)
        throw std::invalid_argument("grid has more positions than the ensemble's tag range");

    FingerprintDictionary dict;
    dict.config_seed = seed;
    dict.m_configs = m_configs;
    dict.n_elements = ensemble.n_elements();
    dict.f0 = f0;
    const auto configs = dict.configs();

    dict.baseline.resize(m_configs);
    for (std::size_t j = 0; j < m_configs; ++j)
        dict.baseline[j] = s12_with_objects(ensemble, configs[j], f0, Scene{}, model);

    std::vector<std::size_t> tagged_count(grid.n_positions, 0);
    for (const Path& p : ensemble.paths)
        for (auto tag : p.region_tags)
            if (static_cast<std::size_t>(tag) < grid.n_positions)
                ++tagged_count[static_cast<std::size_t>(tag)];

    dict.deltas.assign(grid.n_positions, std::vector<cplx>(m_configs));
    for (std::size_t g = 0; g < grid.n_positions; ++g) {
        const Scene single(std::vector<std::size_t>{g});
        for (std::size_t j = 0; j < m_configs; ++j)
            dict.deltas[g][j] = s12_with_objects(ensemble, configs[j], f0, single, model) - dict.baseline[j];
        if (tagged_count[g] == 0) dict.warnings.push_back(g);
    }
    return dict;
}

std::vector<cplx> synth_measurement(const FingerprintDictionary& dictionary, const Scene& scene) {
    std::vector<cplx> v = dictionary.baseline;
    for (auto g : scene.occupied) {
        if (g >= dictionary.n_positions()) throw std::invalid_argument("scene position outside dictionary grid");
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += dictionary.deltas[g][j];
    }
    return v;
}

std::vector<cplx> measure(const PathEnsemble& ensemble, const FingerprintDictionary& dictionary,
                          const Scene& scene, const ObjectModel& model, double snr_db,
                          std::uint64_t noise_seed) {
    for (auto g : scene.occupied)
        if (g >= dictionary.n_positions())
            throw std::invalid_argument("scene position outside dictionary grid");
    const auto configs = dictionary.configs();
    std::vector<cplx> v(dictionary.m_configs);
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = s12_with_objects(ensemble, configs[j], dictionary.f0, scene, model);

    if (std::isinf(snr_db)) return v;

    double mean_power = 0.0;
    for (const auto& x : v) mean_power += std::norm(x);
    mean_power /= static_cast<double>(v.size());
    const double noise_var = mean_power / std::pow(10.0, snr_db / 10.0);
    const double s = std::sqrt(noise_var / 2.0);
    Rng rng(derive_seed(noise_seed, "wfp-noise"));
    for (auto& x : v) x += cplx(s * rng.normal(), s * rng.normal());
    return v;
}

DecodeResult brute_force_decode(const std::vector<cplx>& measurement,
                                const FingerprintDictionary& dictionary, std::size_t k) {
    const std::size_t n = dictionary.n_positions();
    if (k > n) throw std::invalid_argument("decode: k exceeds the number of grid positions");
    if (measurement.size() != dictionary.m_configs)
        throw std::invalid_argument("decode: measurement length does not match dictionary");

    std::vector<cplx> centered(measurement.size());
    for (std::size_t j = 0; j < measurement.size(); ++j)
        centered[j] = measurement[j] - dictionary.baseline[j];

    DecodeResult best;
    double best_sq = std::numeric_limits<double>::infinity();
    for_each_subset(n, k, [&](const std::vector<std::size_t>& subset) {
        double sq = 0.0;
        for (std::size_t j = 0; j < centered.size(); ++j) {
            cplx r = centered[j];
            for (auto g : subset) r -= dictionary.deltas[g][j];
            sq += std::norm(r);
        }
        if (sq < best_sq) {  // strict: lexicographically first subset keeps ties
            best_sq = sq;
            best.scene.occupied = subset;
        }
    });
    best.residual = std::sqrt(best_sq);
    return best;
}

double success_rate(const Scene& decoded, const Scene& truth) {
    if (decoded.k() != truth.k()) throw std::invalid_argument("success_rate: scene sizes differ");
    if (truth.k() == 0) return 1.0;
    std::size_t hits = 0;
    for (auto g : decoded.occupied)
        if (std::binary_search(truth.occupied.begin(), truth.occupied.end(), g)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.k());
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

namespace {

nlohmann::json cvec_to_json(const std::vector<cplx>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& x : v) arr.push_back({x.real(), x.imag()});
    return arr;
}

std::vector<cplx> cvec_from_json(const nlohmann::json& arr) {
    std::vector<cplx> v;
    v.reserve(arr.size());
    for (const auto& p : arr) v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return v;
}

}  // namespace

std::string FingerprintDictionary::to_json() const {
    nlohmann::json j = {
        {"format", "riscatter-wfp-dictionary-v1"},
        {"config_seed", config_seed},
        {"m_configs", m_configs},
        {"n_elements", n_elements},
        {"f0", f0},
        {"baseline", cvec_to_json(baseline)},
        {"warnings", warnings},
    };
    nlohmann::json d = nlohmann::json::array();
    for (const auto& row : deltas) d.push_back(cvec_to_json(row));
    j["deltas"] = d;
    return j.dump();
}

FingerprintDictionary FingerprintDictionary::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "riscatter-wfp-dictionary-v1")
        throw std::invalid_argument("unsupported dictionary file format");
    FingerprintDictionary d;
    d.config_seed = j.at("config_seed").get<std::uint64_t>();
    d.m_configs = j.at("m_configs").get<std::size_t>();
    d.n_elements = j.at("n_elements").get<std::size_t>();
    d.f0 = j.at("f0").get<double>();
    d.baseline = cvec_from_json(j.at("baseline"));
    d.warnings = j.at("warnings").get<std::vector<std::size_t>>();
    for (const auto& row : j.at("deltas")) d.deltas.push_back(cvec_from_json(row));
    return d;
}

void FingerprintDictionary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_json() << "\n";
}

FingerprintDictionary FingerprintDictionary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace riscatter
