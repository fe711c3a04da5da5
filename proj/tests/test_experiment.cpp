#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "riscatter/experiment.hpp"

using namespace riscatter;
namespace fs = std::filesystem;

namespace {

const std::string kEnsemble = R"("ensemble": {
    "n_paths": 80, "n_elements": 8, "n_bins": 64, "n_grid_positions": 8,
    "tagged_fraction": 0.7
})";

std::string spec_text(const std::string& kind, const std::string& extra = "") {
    std::string s = "{\"kind\": \"" + kind + "\", \"seed\": 7, " + kEnsemble;
    if (!extra.empty()) s += ", " + extra;
    s += "}";
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_rows(const fs::path& csv) {
    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);  // header
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    return rows;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(name) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RISCATTER_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("kind parsing round-trips and rejects unknowns") {
    for (const char* k : {"characterize", "shape", "capacity", "localize", "sweep"})
        CHECK(kind_name(parse_kind(k)) == k);
    CHECK_THROWS_AS(parse_kind("frobnicate"), ValidationError);
}

TEST_CASE("spec validation points at the offending field") {
    auto field_of = [](const std::string& text) {
        try {
            ExperimentSpec::from_json(text);
        } catch (const ValidationError& e) {
            return e.field();
        }
        return std::string("<no error>");
    };
    CHECK(field_of("{\"kind\": \"shape\"}") == "seed");
    CHECK(field_of("not json at all") == "<document>");
    CHECK(field_of(spec_text("shape", "\"shape\": {\"objective\": \"maximize_vibes\"}")) ==
          "shape.objective");
    CHECK(field_of(spec_text("shape", "\"shape\": {\"t_focus\": 1.0}")) == "shape.t_focus");
    CHECK(field_of(spec_text("capacity")) == "capacity.envelopes");
    CHECK(field_of(spec_text("localize", "\"localize\": {\"f0\": 1.0e9}")) == "localize.f0");
    CHECK(field_of(spec_text("localize", "\"localize\": {\"k\": 9}")) == "localize.k");
    CHECK(field_of(spec_text("sweep", "\"sweep\": {\"m_values\": []}")) == "sweep.m_values");
    CHECK(field_of(spec_text("characterize",
                             "\"characterize\": {\"n_configs\": 1}")) == "characterize.n_configs");
}

TEST_CASE("characterize runs are deterministic artifact for artifact") {
    const auto spec = ExperimentSpec::from_json(
        spec_text("characterize", "\"characterize\": {\"n_configs\": 40, \"n_freqs\": 11}"));
    TempDir a("exp_char_a"), b("exp_char_b");
    const auto ma = run(spec, a.path.string());
    const auto mb = run(spec, b.path.string());
    REQUIRE(!ma.artifacts.empty());
    REQUIRE(ma.artifacts.size() == mb.artifacts.size());
    for (std::size_t i = 0; i < ma.artifacts.size(); ++i) {
        CHECK(ma.artifacts[i].name == mb.artifacts[i].name);
        CHECK(ma.artifacts[i].digest == mb.artifacts[i].digest);
    }
    CHECK(ma.spec_digest == mb.spec_digest);
    CHECK(count_rows(a.path / "insitu_std.csv") == 11);
    const auto manifest = nlohmann::json::parse(slurp(a.path / "manifest.json"));
    CHECK(manifest.at("tool_version").get<std::string>() == kToolVersion);
    CHECK(manifest.at("artifacts").size() == ma.artifacts.size());
}

TEST_CASE("shape output feeds the capacity experiment") {
    TempDir shape_dir("exp_shape"), cap_dir("exp_cap");
    const auto shape_spec = ExperimentSpec::from_json(
        spec_text("shape", "\"shape\": {\"n_realizations\": 2, \"max_passes\": 2}"));
    run(shape_spec, shape_dir.path.string());
    REQUIRE(fs::exists(shape_dir.path / "envelope_optimized.csv"));
    REQUIRE(fs::exists(shape_dir.path / "envelope_random.csv"));
    REQUIRE(fs::exists(shape_dir.path / "trace.csv"));
    CHECK(count_rows(shape_dir.path / "envelope_optimized.csv") == 64);

    const std::string cap_text = spec_text(
        "capacity", "\"capacity\": {\"snr_db\": [0, 10, 20], \"envelopes\": ["
                    "{\"label\": \"shaped\", \"path\": \"" +
                        (shape_dir.path / "envelope_optimized.csv").string() + "\"},"
                    "{\"label\": \"random\", \"path\": \"" +
                        (shape_dir.path / "envelope_random.csv").string() + "\"}]}");
    const auto cap_spec = ExperimentSpec::from_json(cap_text);
    run(cap_spec, cap_dir.path.string());
    const auto csv = slurp(cap_dir.path / "capacity.csv");
    CHECK(csv.rfind("snr_db,capacity_bits_per_channel_use,label", 0) == 0);
    CHECK(count_rows(cap_dir.path / "capacity.csv") == 6);  // 2 labels x 3 SNRs
}

TEST_CASE("localize writes one success row per SNR") {
    TempDir dir("exp_loc");
    const auto spec = ExperimentSpec::from_json(spec_text(
        "localize", "\"localize\": {\"m_configs\": 8, \"k\": 2, \"snr_db\": [1000, 10], "
                    "\"n_scenes\": 20}"));
    run(spec, dir.path.string());
    REQUIRE(fs::exists(dir.path / "dictionary.json"));
    REQUIRE(count_rows(dir.path / "success_vs_snr.csv") == 2);
    std::ifstream in(dir.path / "success_vs_snr.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "m_configs,snr_db,mean_success_rate");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto last = line.rfind(',');
        const double rate = std::stod(line.substr(last + 1));
        CHECK(rate >= 0.0);
        CHECK(rate <= 1.0);
    }
}

TEST_CASE("sweep writes one row per cell and decoder") {
    TempDir dir("exp_sweep");
    const auto spec = ExperimentSpec::from_json(spec_text(
        "sweep", "\"sweep\": {\"m_values\": [2, 4], \"snr_values\": [30], \"n_eval_scenes\": 10, "
                 "\"k\": 2, \"epochs\": 3, \"n_train_scenes\": 40}"));
    run(spec, dir.path.string());
    const auto csv = slurp(dir.path / "heatmap.csv");
    CHECK(csv.rfind("m_configs,snr_db,mean_success_rate,ci_half_width_95,decoder_label", 0) == 0);
    CHECK(count_rows(dir.path / "heatmap.csv") == 4);  // 2 M-values x 1 SNR x 2 decoders
}

TEST_CASE("failed runs clean up their partial artifacts") {
    TempDir dir("exp_fail");
    const auto spec = ExperimentSpec::from_json(spec_text(
        "capacity", "\"capacity\": {\"envelopes\": [{\"label\": \"x\", \"path\": "
                    "\"no_such_envelope_file.csv\"}]}"));
    CHECK_THROWS_AS(run(spec, dir.path.string()), std::runtime_error);
    CHECK(!fs::exists(dir.path / "capacity.csv"));
    CHECK(!fs::exists(dir.path / "manifest.json"));
}

TEST_CASE("CLI exit codes: 0 success, 2 validation, 1 runtime") {
    TempDir dir("exp_cli");
    fs::create_directories(dir.path);
    const fs::path good = dir.path / "good.json";
    std::ofstream(good) << spec_text("characterize",
                                     "\"characterize\": {\"n_configs\": 10, \"n_freqs\": 5}");
    const fs::path bad_json = dir.path / "bad.json";
    std::ofstream(bad_json) << "{ this is not json";
    const fs::path missing_env = dir.path / "cap.json";
    std::ofstream(missing_env) << spec_text(
        "capacity", "\"capacity\": {\"envelopes\": [{\"label\": \"x\", \"path\": "
                    "\"no_such_envelope_file.csv\"}]}");

    const std::string out = (dir.path / "out").string();
    CHECK(run_cli("characterize --spec " + good.string() + " --out " + out) == 0);
    CHECK(fs::exists(dir.path / "out" / "manifest.json"));
    // same spec again with a seed override and more threads still succeeds
    CHECK(run_cli("characterize --spec " + good.string() + " --out " + out +
                  " --seed 9 --threads 2") == 0);
    // spec kind does not match the subcommand
    CHECK(run_cli("shape --spec " + good.string() + " --out " + out) == 2);
    CHECK(run_cli("characterize --spec " + bad_json.string() + " --out " + out) == 2);
    // spec is valid but the referenced envelope file is missing
    CHECK(run_cli("capacity --spec " + missing_env.string() + " --out " + out) == 1);
    // missing required --out
    CHECK(run_cli("characterize --spec " + good.string()) != 0);
}
