#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riscatter/wfp.hpp"

namespace riscatter {

// input -> 256 ReLU -> n_positions sigmoid decoder. Weights row-major.
struct MlpModel {
    std::size_t in_dim = 0;
    std::size_t hidden_dim = 256;
    std::size_t out_dim = 23;
    std::vector<double> w1;  // hidden_dim x in_dim
    std::vector<double> b1;  // hidden_dim
    std::vector<double> w2;  // out_dim x hidden_dim
    std::vector<double> b2;  // out_dim
    std::vector<double> feature_mean;  // in_dim, training-set standardization
    std::vector<double> feature_std;   // in_dim

    static MlpModel init(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed,
                         std::size_t hidden_dim = 256);
    static MlpModel random(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed,
                           std::size_t hidden_dim = 256);

    std::string to_json() const;
    static MlpModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static MlpModel load(const std::string& path);
};

struct MlpGradients {
    std::vector<double> w1, b1, w2, b2;
};

struct TrainSpec {
    std::size_t n_train_scenes = 3000;  // 0 = all k-subsets in lexicographic order
    std::size_t n_val_scenes = 300;
    std::size_t scene_k = 3;
    std::size_t epochs = 80;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    std::uint64_t optimizer_seed = 0;
    double noise_snr_db = 30.0;  // augmentation noise; +inf disables

    void validate() const;
};

struct TrainResult {
    MlpModel model;
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch (empty when n_val_scenes == 0)
    bool diverged = false;
    std::size_t divergence_epoch = 0;
};

// One forward pass; input is (Re, Im) of the measurement stacked, length 2M.
std::vector<double> forward(const MlpModel& model, const std::vector<double>& input);

// Mean binary cross-entropy over a batch plus analytic gradients. Inputs are
// raw (un-standardized); rows of x have length in_dim, rows of y length
// out_dim.
double bce_loss_and_grad(const MlpModel& model, const std::vector<std::vector<double>>& x,
                         const std::vector<std::vector<double>>& y, MlpGradients& grad);

double bce_loss(const MlpModel& model, const std::vector<std::vector<double>>& x,
                const std::vector<std::vector<double>>& y);

// Mini-batch gradient descent with momentum on synthetic measurements drawn
// from the dictionary (linear superposition plus noise augmentation).
TrainResult train(const FingerprintDictionary& dictionary, const TrainSpec& spec);

Scene decode_topk(const MlpModel& model, const std::vector<cplx>& measurement, std::size_t k);

std::vector<double> features_from_measurement(const std::vector<cplx>& measurement);

struct SweepCell {
    std::size_t m_configs = 0;
    double snr_db = 0.0;
    std::string decoder_label;  // "mlp" or "brute_force"
    double mean_success = 0.0;
    double ci_half_width = 0.0;  // 95% normal approximation
};

struct SweepParams {
    std::vector<std::size_t> m_values;
    std::vector<double> snr_values;
    std::size_t n_eval_scenes = 100;
    std::size_t scene_k = 3;
    std::uint64_t seed = 0;
    TrainSpec train_template;
    ObjectModel object_model;
    double f0 = 0.0;  // 0 = ensemble center frequency
    bool include_brute_force = true;
};

// Per (M, SNR) cell: calibrate, train, evaluate mean success rate.
std::vector<SweepCell> sweep_success_surface(const PathEnsemble& ensemble, const Grid& grid,
                                  const SweepParams& params);

void export_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path);

}  // namespace riscatter
