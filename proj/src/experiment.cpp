#include "riscatter/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "riscatter/capacity.hpp"
#include "riscatter/digest.hpp"
#include "riscatter/mlp.hpp"
#include "riscatter/shaping.hpp"
#include "riscatter/wfp.hpp"

namespace fs = std::filesystem;

namespace riscatter {

const char* kToolVersion = "0.1.0";

ExperimentKind parse_kind(const std::string& s) {
    if (s == "characterize") return ExperimentKind::Characterize;
    if (s == "shape") return ExperimentKind::Shape;
    if (s == "capacity") return ExperimentKind::Capacity;
    if (s == "localize") return ExperimentKind::Localize;
    if (s == "sweep") return ExperimentKind::Sweep;
    throw ValidationError("kind", "unknown experiment kind '" + s + "'");
}

std::string kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Characterize: return "characterize";
        case ExperimentKind::Shape: return "shape";
        case ExperimentKind::Capacity: return "capacity";
        case ExperimentKind::Localize: return "localize";
        case ExperimentKind::Sweep: return "sweep";
    }
    return "?";
}

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_ensemble(const nlohmann::json& j, EnsembleParams& p) {
    read_if(j, "n_paths", p.n_paths);
    read_if(j, "n_elements", p.n_elements);
    read_if(j, "t_max", p.t_max);
    read_if(j, "tau_rc", p.tau_rc);
    read_if(j, "interaction_rate", p.interaction_rate);
    read_if(j, "f_center", p.f_center);
    read_if(j, "bandwidth", p.bandwidth);
    read_if(j, "n_bins", p.n_bins);
    read_if(j, "pulse_bandwidth", p.pulse_bandwidth);
    read_if(j, "pulse_rolloff", p.pulse_rolloff);
    read_if(j, "tagged_fraction", p.tagged_fraction);
    read_if(j, "n_grid_positions", p.n_grid_positions);
    read_if(j, "two_tag_fraction", p.two_tag_fraction);
    if (j.contains("atom")) {
        const auto& a = j.at("atom");
        double gamma = p.atom.gamma;
        double f_center = p.f_center;
        read_if(a, "gamma", gamma);
        p.atom = MetaAtomResponse::resonant(f_center, gamma);
        read_if(a, "f_on", p.atom.f_on);
        read_if(a, "f_off", p.atom.f_off);
        read_if(a, "ideal", p.atom.ideal);
    }
    if (j.contains("disorder")) {
        const auto& d = j.at("disorder");
        read_if(d, "phase_jitter", p.disorder.phase_jitter);
        read_if(d, "amplitude_sigma", p.disorder.amplitude_sigma);
    }
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("<document>", std::string("not valid JSON: ") + e.what());
    }
    ExperimentSpec s;
    if (!j.contains("kind")) throw ValidationError("kind", "missing");
    s.kind = parse_kind(j.at("kind").get<std::string>());
    if (!j.contains("seed")) throw ValidationError("seed", "master seed is mandatory");
    s.master_seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("ensemble")) read_ensemble(j.at("ensemble"), s.ensemble);

    if (j.contains("characterize")) {
        const auto& c = j.at("characterize");
        read_if(c, "n_configs", s.char_n_configs);
        read_if(c, "n_freqs", s.char_n_freqs);
        read_if(c, "span_hz", s.char_span);
    }
    if (j.contains("shape")) {
        const auto& c = j.at("shape");
        read_if(c, "objective", s.shape_objective);
        read_if(c, "t_focus", s.shape_t_focus);
        read_if(c, "t1", s.shape_t1);
        read_if(c, "t2", s.shape_t2);
        read_if(c, "n_realizations", s.shape_n_realizations);
        read_if(c, "max_passes", s.shape_max_passes);
        read_if(c, "n_random_configs", s.shape_n_random_configs);
    }
    if (j.contains("capacity")) {
        const auto& c = j.at("capacity");
        read_if(c, "snr_db", s.capacity_snr_db);
        if (c.contains("envelopes")) {
            for (const auto& e : c.at("envelopes"))
                s.capacity_envelopes.emplace_back(e.at("label").get<std::string>(),
                                                  e.at("path").get<std::string>());
        }
    }
    if (j.contains("localize")) {
        const auto& c = j.at("localize");
        read_if(c, "m_configs", s.loc_m_configs);
        read_if(c, "k", s.loc_k);
        read_if(c, "snr_db", s.loc_snr_db);
        read_if(c, "n_scenes", s.loc_n_scenes);
        read_if(c, "f0", s.loc_f0);
    }
    if (j.contains("sweep")) {
        const auto& c = j.at("sweep");
        read_if(c, "m_values", s.sweep_m_values);
        read_if(c, "snr_values", s.sweep_snr_values);
        read_if(c, "n_eval_scenes", s.sweep_n_eval_scenes);
        read_if(c, "k", s.sweep_k);
        read_if(c, "epochs", s.sweep_epochs);
        read_if(c, "n_train_scenes", s.sweep_n_train_scenes);
    }
    s.raw_json = j.dump();
    s.validate();
    return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void ExperimentSpec::validate() const {
    try {
        ensemble.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError("ensemble", e.what());
    }
    switch (kind) {
        case ExperimentKind::Characterize:
            if (char_n_configs < 2) throw ValidationError("characterize.n_configs", "must be >= 2");
            if (char_n_freqs < 2) throw ValidationError("characterize.n_freqs", "must be >= 2");
            if (char_span <= 0.0) throw ValidationError("characterize.span_hz", "must be positive");
            break;
        case ExperimentKind::Shape: {
            if (shape_objective != "envelope_at_time" && shape_objective != "bimodal" &&
                shape_objective != "suppress_at_time")
                throw ValidationError("shape.objective", "unknown objective '" + shape_objective + "'");
            if (shape_n_realizations < 1)
                throw ValidationError("shape.n_realizations", "must be >= 1");
            if (shape_max_passes < 1) throw ValidationError("shape.max_passes", "must be >= 1");
            const double window = static_cast<double>(ensemble.n_bins) / ensemble.bandwidth;
            for (double t : {shape_t_focus, shape_t1, shape_t2})
                if (t < 0.0 || t >= window)
                    throw ValidationError("shape.t_focus", "focal time outside the CIR duration");
            break;
        }
        case ExperimentKind::Capacity:
            if (capacity_envelopes.empty())
                throw ValidationError("capacity.envelopes", "at least one envelope file required");
            if (capacity_snr_db.empty()) throw ValidationError("capacity.snr_db", "must be non-empty");
            break;
        case ExperimentKind::Localize: {
            if (loc_m_configs < 1) throw ValidationError("localize.m_configs", "must be >= 1");
            if (loc_k < 1 || loc_k > ensemble.n_grid_positions)
                throw ValidationError("localize.k", "must lie in [1, n_grid_positions]");
            if (loc_n_scenes < 1) throw ValidationError("localize.n_scenes", "must be >= 1");
            const double f0 = loc_f0 > 0.0 ? loc_f0 : ensemble.f_center;
            if (f0 < ensemble.f_center - ensemble.bandwidth / 2.0 ||
                f0 > ensemble.f_center + ensemble.bandwidth / 2.0)
                throw ValidationError("localize.f0", "outside the modeled band");
            break;
        }
        case ExperimentKind::Sweep:
            if (sweep_m_values.empty()) throw ValidationError("sweep.m_values", "must be non-empty");
            for (auto m : sweep_m_values)
                if (m == 0) throw ValidationError("sweep.m_values", "m_configs must be >= 1");
            if (sweep_snr_values.empty()) throw ValidationError("sweep.snr_values", "must be non-empty");
            if (sweep_k < 1 || sweep_k > ensemble.n_grid_positions)
                throw ValidationError("sweep.k", "must lie in [1, n_grid_positions]");
            break;
    }
}

namespace {

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

class ArtifactWriter {
  public:
    explicit ArtifactWriter(const std::string& out_dir) : dir_(out_dir) {
        fs::create_directories(dir_);
    }

    std::string path(const std::string& name) {
        written_.push_back(name);
        return (dir_ / name).string();
    }

    void write_csv(const std::string& name, const std::string& header,
                   const std::vector<std::vector<double>>& rows) {
        std::ofstream out(path(name));
        if (!out) throw std::runtime_error("cannot open " + name + " for writing");
        out << header << "\n";
        out.precision(17);
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
            out << "\n";
        }
    }

    std::vector<ArtifactRecord> records() const {
        std::vector<ArtifactRecord> recs;
        for (const auto& name : written_)
            recs.push_back({name, digest_file_hex((dir_ / name).string())});
        return recs;
    }

    void remove_written() {
        for (const auto& name : written_) {
            std::error_code ec;
            fs::remove(dir_ / name, ec);
        }
    }

  private:
    fs::path dir_;
    std::vector<std::string> written_;
};

std::vector<double> load_envelope_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open envelope file " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> env;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("malformed envelope CSV row in " + path);
        env.push_back(std::stod(line.substr(comma + 1)));
    }
    return env;
}

void run_characterize(const ExperimentSpec& spec, ArtifactWriter& w) {
    const auto ensemble =
        synthesize_ensemble(spec.ensemble, derive_seed(spec.master_seed, "ensemble"));
    ensemble.save(w.path("ensemble.json"));
    std::vector<double> freqs(spec.char_n_freqs);
    for (std::size_t i = 0; i < freqs.size(); ++i)
        freqs[i] = spec.ensemble.f_center - spec.char_span / 2.0 +
                   spec.char_span * static_cast<double>(i) / static_cast<double>(freqs.size() - 1);
    const auto std_curve =
        in_situ_std(ensemble, spec.char_n_configs, freqs, derive_seed(spec.master_seed, "characterize"));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < freqs.size(); ++i) rows.push_back({freqs[i], std_curve[i]});
    w.write_csv("insitu_std.csv", "frequency_hz,s12_std", rows);
}

void run_shape(const ExperimentSpec& spec, ArtifactWriter& w) {
    const auto ensemble =
        synthesize_ensemble(spec.ensemble, derive_seed(spec.master_seed, "ensemble"));
    ensemble.save(w.path("ensemble.json"));

    ShapingObjective obj;
    if (spec.shape_objective == "envelope_at_time")
        obj = ShapingObjective::envelope_at_time(spec.shape_t_focus, spec.shape_n_realizations);
    else if (spec.shape_objective == "bimodal")
        obj = ShapingObjective::bimodal(spec.shape_t1, spec.shape_t2, spec.shape_n_realizations);
    else
        obj = ShapingObjective::suppress_at_time(spec.shape_t_focus, spec.shape_n_realizations);

    const std::uint64_t opt_seed = derive_seed(spec.master_seed, "shape-opt");
    const auto result = greedy_optimize(ensemble, obj, spec.shape_max_passes, opt_seed);
    result.trace.export_csv(w.path("trace.csv"));

    const std::uint64_t env_seed = derive_seed(spec.master_seed, "shape-envelope");
    const auto optimized =
        averaged_envelope(ensemble, result.config, spec.shape_n_realizations, env_seed);
    Rng rng(derive_seed(spec.master_seed, "shape-random-config"));
    const auto random_env = averaged_envelope(ensemble, RisConfig::random(ensemble.n_elements(), rng),
                                              spec.shape_n_realizations, env_seed);
    const double dt = 1.0 / spec.ensemble.bandwidth;
    std::vector<std::vector<double>> opt_rows, rnd_rows;
    for (std::size_t i = 0; i < optimized.size(); ++i) {
        opt_rows.push_back({static_cast<double>(i) * dt, optimized[i]});
        rnd_rows.push_back({static_cast<double>(i) * dt, random_env[i]});
    }
    w.write_csv("envelope_optimized.csv", "time_s,mean_envelope", opt_rows);
    w.write_csv("envelope_random.csv", "time_s,mean_envelope", rnd_rows);
}

void run_capacity(const ExperimentSpec& spec, ArtifactWriter& w) {
    std::ofstream out(w.path("capacity.csv"));
    if (!out) throw std::runtime_error("cannot open capacity.csv for writing");
    out << "snr_db,capacity_bits_per_channel_use,label\n";
    out.precision(17);
    for (const auto& [label, path] : spec.capacity_envelopes) {
        const auto env = load_envelope_csv(path);
        const auto curve = capacity_from_cir(env, spec.capacity_snr_db, label);
        for (std::size_t i = 0; i < curve.snr_db.size(); ++i)
            out << curve.snr_db[i] << "," << curve.bits_per_channel_use[i] << "," << label << "\n";
    }
}

void run_localize(const ExperimentSpec& spec, ArtifactWriter& w) {
    const auto ensemble =
        synthesize_ensemble(spec.ensemble, derive_seed(spec.master_seed, "ensemble"));
    ensemble.save(w.path("ensemble.json"));
    Grid grid{spec.ensemble.n_grid_positions, {}};
    ObjectModel model;
    const double f0 = spec.loc_f0 > 0.0 ? spec.loc_f0 : spec.ensemble.f_center;
    const auto dict = calibrate(ensemble, grid, model, spec.loc_m_configs, f0,
                                derive_seed(spec.master_seed, "localize-dict"));
    dict.save(w.path("dictionary.json"));

    std::vector<Scene> scenes;
    {
        Rng rng(derive_seed(spec.master_seed, "localize-scenes"));
        for (std::size_t i = 0; i < spec.loc_n_scenes; ++i)
            scenes.push_back(Scene::random(grid.n_positions, spec.loc_k, rng));
    }
    std::vector<std::vector<double>> rows;
    for (double snr : spec.loc_snr_db) {
        double acc = 0.0;
        for (std::size_t i = 0; i < scenes.size(); ++i) {
            const auto meas = measure(ensemble, dict, scenes[i], model, snr,
                                      derive_seed(spec.master_seed, "localize-noise", i));
            acc += success_rate(brute_force_decode(meas, dict, spec.loc_k).scene, scenes[i]);
        }
        rows.push_back({static_cast<double>(spec.loc_m_configs), snr,
                        acc / static_cast<double>(scenes.size())});
    }
    w.write_csv("success_vs_snr.csv", "m_configs,snr_db,mean_success_rate", rows);
}

void run_sweep(const ExperimentSpec& spec, ArtifactWriter& w) {
    const auto ensemble =
        synthesize_ensemble(spec.ensemble, derive_seed(spec.master_seed, "ensemble"));
    Grid grid{spec.ensemble.n_grid_positions, {}};
    SweepParams sp;
    sp.m_values = spec.sweep_m_values;
    sp.snr_values = spec.sweep_snr_values;
    sp.n_eval_scenes = spec.sweep_n_eval_scenes;
    sp.scene_k = spec.sweep_k;
    sp.seed = derive_seed(spec.master_seed, "sweep");
    sp.train_template.epochs = spec.sweep_epochs;
    sp.train_template.n_train_scenes = spec.sweep_n_train_scenes;
    const auto cells = sweep_success_surface(ensemble, grid, sp);
    export_sweep_csv(cells, w.path("heatmap.csv"));
}

}  // namespace

std::string RunManifest::to_json() const {
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& a : artifacts) arts.push_back({{"name", a.name}, {"digest", a.digest}});
    nlohmann::json j = {
        {"spec_digest", spec_digest}, {"tool_version", tool_version},
        {"started", started},         {"finished", finished},
        {"artifacts", arts},
    };
    return j.dump(2);
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_json() << "\n";
}

RunManifest run(const ExperimentSpec& spec, const std::string& out_dir) {
    spec.validate();
    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.started = timestamp_now();
    {
        Digest d;
        d.update(spec.raw_json);
        manifest.spec_digest = d.hex();
    }

    ArtifactWriter writer(out_dir);
    try {
        switch (spec.kind) {
            case ExperimentKind::Characterize: run_characterize(spec, writer); break;
            case ExperimentKind::Shape: run_shape(spec, writer); break;
            case ExperimentKind::Capacity: run_capacity(spec, writer); break;
            case ExperimentKind::Localize: run_localize(spec, writer); break;
            case ExperimentKind::Sweep: run_sweep(spec, writer); break;
        }
    } catch (...) {
        writer.remove_written();
        throw;
    }
    manifest.artifacts = writer.records();
    manifest.finished = timestamp_now();
    manifest.save((fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

}  // namespace riscatter
