#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "riscatter/capacity.hpp"
#include "riscatter/experiment.hpp"
#include "riscatter/mlp.hpp"
#include "riscatter/scatter.hpp"
#include "riscatter/shaping.hpp"
#include "riscatter/wfp.hpp"

namespace py = pybind11;
using namespace riscatter;

PYBIND11_MODULE(_riscatter, m) {
    m.doc() = "RIS rich-scattering channel simulator core";

    py::class_<MetaAtomResponse>(m, "MetaAtomResponse")
        .def(py::init<>())
        .def_readwrite("f_on", &MetaAtomResponse::f_on)
        .def_readwrite("f_off", &MetaAtomResponse::f_off)
        .def_readwrite("gamma", &MetaAtomResponse::gamma)
        .def_readwrite("ideal", &MetaAtomResponse::ideal)
        .def("phase", &MetaAtomResponse::phase)
        .def("contrast", &MetaAtomResponse::contrast)
        .def_static("resonant", &MetaAtomResponse::resonant)
        .def_static("pinned_pi", &MetaAtomResponse::pinned_pi);

    py::class_<DisorderParams>(m, "DisorderParams")
        .def(py::init<>())
        .def_readwrite("phase_jitter", &DisorderParams::phase_jitter)
        .def_readwrite("amplitude_sigma", &DisorderParams::amplitude_sigma);

    py::class_<EnsembleParams>(m, "EnsembleParams")
        .def(py::init<>())
        .def_readwrite("n_paths", &EnsembleParams::n_paths)
        .def_readwrite("n_elements", &EnsembleParams::n_elements)
        .def_readwrite("t_max", &EnsembleParams::t_max)
        .def_readwrite("tau_rc", &EnsembleParams::tau_rc)
        .def_readwrite("interaction_rate", &EnsembleParams::interaction_rate)
        .def_readwrite("f_center", &EnsembleParams::f_center)
        .def_readwrite("bandwidth", &EnsembleParams::bandwidth)
        .def_readwrite("n_bins", &EnsembleParams::n_bins)
        .def_readwrite("pulse_bandwidth", &EnsembleParams::pulse_bandwidth)
        .def_readwrite("pulse_rolloff", &EnsembleParams::pulse_rolloff)
        .def_readwrite("tagged_fraction", &EnsembleParams::tagged_fraction)
        .def_readwrite("n_grid_positions", &EnsembleParams::n_grid_positions)
        .def_readwrite("two_tag_fraction", &EnsembleParams::two_tag_fraction)
        .def_readwrite("atom", &EnsembleParams::atom)
        .def_readwrite("disorder", &EnsembleParams::disorder);

    py::class_<RisConfig>(m, "RisConfig")
        .def(py::init<>())
        .def_readwrite("states", &RisConfig::states)
        .def("flip", &RisConfig::flip)
        .def("__len__", &RisConfig::size)
        .def("__eq__", [](const RisConfig& a, const RisConfig& b) { return a == b; });

    py::class_<Path>(m, "Path")
        .def_readonly("delay", &Path::delay)
        .def_readonly("amplitude", &Path::amplitude)
        .def_readonly("base_phase", &Path::base_phase)
        .def_readonly("interactions", &Path::interactions)
        .def_readonly("region_tags", &Path::region_tags);

    py::class_<PathEnsemble>(m, "PathEnsemble")
        .def_readonly("params", &PathEnsemble::params)
        .def_readonly("seed", &PathEnsemble::seed)
        .def_readonly("paths", &PathEnsemble::paths)
        .def("n_elements", &PathEnsemble::n_elements)
        .def("content_digest", &PathEnsemble::content_digest)
        .def("to_json", &PathEnsemble::to_json)
        .def_static("from_json", &PathEnsemble::from_json)
        .def("save", &PathEnsemble::save)
        .def_static("load", &PathEnsemble::load);

    py::class_<DisorderRealization>(m, "DisorderRealization")
        .def_static("generate", &DisorderRealization::generate);

    py::class_<ChannelResponse>(m, "ChannelResponse")
        .def_readonly("freqs", &ChannelResponse::freqs)
        .def_readonly("h_f", &ChannelResponse::h_f)
        .def_readonly("h_t", &ChannelResponse::h_t)
        .def_readonly("pulse_bandwidth", &ChannelResponse::pulse_bandwidth)
        .def("envelope", &ChannelResponse::envelope);

    m.def("random_config", [](std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        return RisConfig::random(n, rng);
    });
    m.def("synthesize_ensemble", &synthesize_ensemble);
    m.def("freq_response",
          [](const PathEnsemble& e, const RisConfig& c) { return freq_response(e, c); });
    m.def("freq_response_disordered",
          [](const PathEnsemble& e, const RisConfig& c, const DisorderRealization& r) {
              return freq_response(e, c, &r);
          });
    m.def("s12", &s12);
    m.def("in_situ_std", &in_situ_std);

    // shaping
    py::class_<ShapingObjective>(m, "ShapingObjective")
        .def_static("envelope_at_time", &ShapingObjective::envelope_at_time, py::arg("t"),
                    py::arg("n_realizations") = 1)
        .def_static("bimodal", &ShapingObjective::bimodal, py::arg("t1"), py::arg("t2"),
                    py::arg("n_realizations") = 1)
        .def_static("suppress_at_time", &ShapingObjective::suppress_at_time, py::arg("t"),
                    py::arg("n_realizations") = 1);
    py::class_<OptimizationTrace>(m, "OptimizationTrace")
        .def_readonly("objective_values", &OptimizationTrace::objective_values)
        .def_readonly("flips_attempted", &OptimizationTrace::flips_attempted)
        .def_readonly("passes", &OptimizationTrace::passes)
        .def_readonly("converged", &OptimizationTrace::converged)
        .def("export_csv", &OptimizationTrace::export_csv);
    py::class_<GreedyResult>(m, "GreedyResult")
        .def_readonly("config", &GreedyResult::config)
        .def_readonly("trace", &GreedyResult::trace);
    m.def("averaged_envelope", &averaged_envelope);
    m.def("evaluate_objective", &evaluate_objective);
    m.def("greedy_optimize", &greedy_optimize);

    // capacity
    py::class_<WaterfillResult>(m, "WaterfillResult")
        .def_readonly("capacity", &WaterfillResult::capacity)
        .def_readonly("allocation", &WaterfillResult::allocation)
        .def_readonly("water_level", &WaterfillResult::water_level)
        .def_readonly("degenerate", &WaterfillResult::degenerate);
    py::class_<CapacityCurve>(m, "CapacityCurve")
        .def_readonly("snr_db", &CapacityCurve::snr_db)
        .def_readonly("bits_per_channel_use", &CapacityCurve::bits_per_channel_use)
        .def_readonly("channel_label", &CapacityCurve::channel_label)
        .def("export_csv", &CapacityCurve::export_csv);
    m.def("waterfill", &waterfill);
    m.def("capacity_from_cir", &capacity_from_cir, py::arg("envelope"), py::arg("snr_grid"),
          py::arg("label") = "", py::arg("normalize_energy") = true);

    // localization
    py::class_<Grid>(m, "Grid")
        .def(py::init([](std::size_t n) { return Grid{n, {}}; }), py::arg("n_positions") = 23)
        .def_readwrite("n_positions", &Grid::n_positions);
    py::class_<Scene>(m, "Scene")
        .def(py::init<std::vector<std::size_t>>())
        .def_readonly("occupied", &Scene::occupied)
        .def("__eq__", [](const Scene& a, const Scene& b) { return a == b; });
    py::class_<ObjectModel>(m, "ObjectModel")
        .def(py::init<>())
        .def_readwrite("blocking_factor", &ObjectModel::blocking_factor);
    py::class_<FingerprintDictionary>(m, "FingerprintDictionary")
        .def_readonly("m_configs", &FingerprintDictionary::m_configs)
        .def_readonly("f0", &FingerprintDictionary::f0)
        .def_readonly("baseline", &FingerprintDictionary::baseline)
        .def_readonly("deltas", &FingerprintDictionary::deltas)
        .def_readonly("warnings", &FingerprintDictionary::warnings)
        .def("save", &FingerprintDictionary::save)
        .def_static("load", &FingerprintDictionary::load);
    py::class_<DecodeResult>(m, "DecodeResult")
        .def_readonly("scene", &DecodeResult::scene)
        .def_readonly("residual", &DecodeResult::residual);
    m.def("calibrate", &calibrate);
    m.def("measure", &measure);
    m.def("synth_measurement", &synth_measurement);
    m.def("brute_force_decode", &brute_force_decode);
    m.def("success_rate", &success_rate);

    // mlp decoder
    py::class_<MlpModel>(m, "MlpModel")
        .def_readonly("in_dim", &MlpModel::in_dim)
        .def_readonly("hidden_dim", &MlpModel::hidden_dim)
        .def_readonly("out_dim", &MlpModel::out_dim)
        .def("save", &MlpModel::save)
        .def_static("load", &MlpModel::load);
    py::class_<TrainSpec>(m, "TrainSpec")
        .def(py::init<>())
        .def_readwrite("n_train_scenes", &TrainSpec::n_train_scenes)
        .def_readwrite("n_val_scenes", &TrainSpec::n_val_scenes)
        .def_readwrite("scene_k", &TrainSpec::scene_k)
        .def_readwrite("epochs", &TrainSpec::epochs)
        .def_readwrite("batch_size", &TrainSpec::batch_size)
        .def_readwrite("learning_rate", &TrainSpec::learning_rate)
        .def_readwrite("momentum", &TrainSpec::momentum)
        .def_readwrite("optimizer_seed", &TrainSpec::optimizer_seed)
        .def_readwrite("noise_snr_db", &TrainSpec::noise_snr_db);
    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("train_loss", &TrainResult::train_loss)
        .def_readonly("val_loss", &TrainResult::val_loss)
        .def_readonly("diverged", &TrainResult::diverged);
    m.def("forward", &forward);
    m.def("train", &train);
    m.def("decode_topk", &decode_topk);

    m.def("set_thread_count", &set_thread_count);
    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("component"),
          py::arg("index") = 0);
}
