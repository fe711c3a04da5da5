#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "riscatter/experiment.hpp"

namespace {

int verbosity() {
    const char* env = std::getenv("RISCATTER_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"riscatter - RIS rich-scattering channel experiments"};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    std::int64_t seed_override = -1;
    int threads = 1;

    const char* kinds[] = {"characterize", "shape", "capacity", "localize", "sweep"};
    for (const char* kind : kinds) {
        auto* sub = app.add_subcommand(kind);
        sub->add_option("--spec", spec_path, "experiment spec JSON file")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed_override, "override the spec's master seed");
        sub->add_option("--threads", threads, "worker thread count");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string requested_kind = app.get_subcommands().front()->get_name();
    const int log_level = verbosity();

    try {
        riscatter::set_thread_count(threads);
        auto spec = riscatter::ExperimentSpec::load(spec_path);
        if (riscatter::kind_name(spec.kind) != requested_kind)
            throw riscatter::ValidationError(
                "kind", "spec kind '" + riscatter::kind_name(spec.kind) +
                            "' does not match subcommand '" + requested_kind + "'");
        if (seed_override >= 0) {
            spec.master_seed = static_cast<std::uint64_t>(seed_override);
            spec.validate();
        }
        if (log_level >= 1)
            std::cerr << "riscatter " << requested_kind << " seed=" << spec.master_seed
                      << " out=" << out_dir << "\n";
        const auto manifest = riscatter::run(spec, out_dir);
        if (log_level >= 2)
            for (const auto& a : manifest.artifacts)
                std::cerr << "  artifact " << a.name << " " << a.digest << "\n";
        if (log_level >= 1) std::cerr << "wrote " << manifest.artifacts.size() << " artifacts\n";
        return 0;
    } catch (const riscatter::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
