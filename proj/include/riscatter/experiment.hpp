#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "riscatter/scatter.hpp"

namespace riscatter {

class ValidationError : public std::runtime_error {
  public:
    ValidationError(const std::string& field, const std::string& message)
        : std::runtime_error("invalid field '" + field + "': " + message), field_(field) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

enum class ExperimentKind { Characterize, Shape, Capacity, Localize, Sweep };

ExperimentKind parse_kind(const std::string& s);
std::string kind_name(ExperimentKind k);

// JSON experiment description with a `kind` discriminator. All derived seeds
// come from the single master seed.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Characterize;
    std::uint64_t master_seed = 0;
    std::string raw_json;  // canonical dump, digested into the manifest

    EnsembleParams ensemble;

    // characterize
    std::size_t char_n_configs = 500;
    std::size_t char_n_freqs = 201;
    double char_span = 2e9;

    // shape
    std::string shape_objective = "envelope_at_time";
    double shape_t_focus = 250e-9;
    double shape_t1 = 150e-9;
    double shape_t2 = 350e-9;
    std::size_t shape_n_realizations = 8;
    std::size_t shape_max_passes = 5;
    std::size_t shape_n_random_configs = 500;

    // capacity
    std::vector<std::pair<std::string, std::string>> capacity_envelopes;  // (label, csv path)
    std::vector<double> capacity_snr_db = {0, 5, 10, 15, 20, 25, 30};

    // localize
    std::size_t loc_m_configs = 100;
    std::size_t loc_k = 3;
    std::vector<double> loc_snr_db = {30, 20, 10, 0};
    std::size_t loc_n_scenes = 100;
    double loc_f0 = 0.0;  // 0 = band center

    // sweep
    std::vector<std::size_t> sweep_m_values = {1, 10, 50, 100};
    std::vector<double> sweep_snr_values = {30};
    std::size_t sweep_n_eval_scenes = 100;
    std::size_t sweep_k = 3;
    std::size_t sweep_epochs = 60;
    std::size_t sweep_n_train_scenes = 2500;

    static ExperimentSpec from_json(const std::string& text);
    static ExperimentSpec load(const std::string& path);
    void validate() const;
};

struct ArtifactRecord {
    std::string name;    // path relative to the output directory
    std::string digest;  // FNV-1a 64, hex
};

struct RunManifest {
    std::string spec_digest;
    std::string tool_version;
    std::string started;
    std::string finished;
    std::vector<ArtifactRecord> artifacts;

    std::string to_json() const;
    void save(const std::string& path) const;
};

// Executes the experiment, writes CSV/JSON artifacts plus manifest.json into
// out_dir. Partial outputs are removed if the run fails.
RunManifest run(const ExperimentSpec& spec, const std::string& out_dir);

extern const char* kToolVersion;

}  // namespace riscatter
