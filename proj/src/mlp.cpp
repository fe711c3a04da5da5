#include "riscatter/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace riscatter {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// numerically stable BCE from the logit
double bce_from_logit(double logit, double y) {
    return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
}

struct ForwardCache {
    std::vector<double> z;       // standardized input
    std::vector<double> pre1;    // W1 z + b1
    std::vector<double> h;       // relu(pre1)
    std::vector<double> logits;  // W2 h + b2
};

void forward_cached(const MlpModel& m, const std::vector<double>& x, ForwardCache& c) {
    if (x.size() != m.in_dim) throw std::invalid_argument("mlp forward: input dimension mismatch");
    c.z.resize(m.in_dim);
    for (std::size_t i = 0; i < m.in_dim; ++i) {
        const double s = m.feature_std.empty() ? 1.0 : m.feature_std[i];
        const double mu = m.feature_mean.empty() ? 0.0 : m.feature_mean[i];
        c.z[i] = (x[i] - mu) / s;
    }
    c.pre1.assign(m.hidden_dim, 0.0);
    for (std::size_t j = 0; j < m.hidden_dim; ++j) {
        const double* row = m.w1.data() + j * m.in_dim;
        double acc = m.b1[j];
        for (std::size_t i = 0; i < m.in_dim; ++i) acc += row[i] * c.z[i];
        c.pre1[j] = acc;
    }
    c.h.resize(m.hidden_dim);
    for (std::size_t j = 0; j < m.hidden_dim; ++j) c.h[j] = std::max(0.0, c.pre1[j]);
    c.logits.assign(m.out_dim, 0.0);
    for (std::size_t o = 0; o < m.out_dim; ++o) {
        const double* row = m.w2.data() + o * m.hidden_dim;
        double acc = m.b2[o];
        for (std::size_t j = 0; j < m.hidden_dim; ++j) acc += row[j] * c.h[j];
        c.logits[o] = acc;
    }
}

}  // namespace

MlpModel MlpModel::init(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed,
                        std::size_t hidden_dim) {
    MlpModel m;
    m.in_dim = in_dim;
    m.hidden_dim = hidden_dim;
    m.out_dim = out_dim;
    m.w1.resize(hidden_dim * in_dim);
    m.b1.assign(hidden_dim, 0.0);
    // output layer starts at zero so the trajectory is equivariant under
    // position relabeling; hidden layer breaks the symmetry
    m.w2.assign(out_dim * hidden_dim, 0.0);
    m.b2.assign(out_dim, 0.0);
    Rng rng(derive_seed(seed, "mlp-init"));
    const double lim = std::sqrt(6.0 / static_cast<double>(in_dim + hidden_dim));
    for (auto& w : m.w1) w = rng.uniform(-lim, lim);
    return m;
}

MlpModel MlpModel::random(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed,
                          std::size_t hidden_dim) {
    MlpModel m = init(in_dim, out_dim, seed, hidden_dim);
    Rng rng(derive_seed(seed, "mlp-random"));
    for (auto& w : m.w1) w = 0.5 * rng.normal();
    for (auto& w : m.b1) w = 0.1 * rng.normal();
    for (auto& w : m.w2) w = 0.5 * rng.normal();
    for (auto& w : m.b2) w = 0.1 * rng.normal();
    return m;
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& input) {
    ForwardCache c;
    forward_cached(model, input, c);
    std::vector<double> out(model.out_dim);
    for (std::size_t o = 0; o < model.out_dim; ++o) out[o] = sigmoid(c.logits[o]);
    return out;
}

double bce_loss_and_grad(const MlpModel& model, const std::vector<std::vector<double>>& x,
                         const std::vector<std::vector<double>>& y, MlpGradients& grad) {
    if (x.empty() || x.size() != y.size()) throw std::invalid_argument("bce: bad batch");
    grad.w1.assign(model.w1.size(), 0.0);
    grad.b1.assign(model.b1.size(), 0.0);
    grad.w2.assign(model.w2.size(), 0.0);
    grad.b2.assign(model.b2.size(), 0.0);

    const double norm = 1.0 / (static_cast<double>(x.size()) * static_cast<double>(model.out_dim));
    double loss = 0.0;
    ForwardCache c;
    std::vector<double> delta_out(model.out_dim), delta_h(model.hidden_dim);
    for (std::size_t s = 0; s < x.size(); ++s) {
        forward_cached(model, x[s], c);
        for (std::size_t o = 0; o < model.out_dim; ++o) {
            loss += bce_from_logit(c.logits[o], y[s][o]);
            delta_out[o] = (sigmoid(c.logits[o]) - y[s][o]) * norm;
        }
        std::fill(delta_h.begin(), delta_h.end(), 0.0);
        for (std::size_t o = 0; o < model.out_dim; ++o) {
            double* gw2 = grad.w2.data() + o * model.hidden_dim;
            const double* w2 = model.w2.data() + o * model.hidden_dim;
            const double d = delta_out[o];
            grad.b2[o] += d;
            for (std::size_t j = 0; j < model.hidden_dim; ++j) {
                gw2[j] += d * c.h[j];
                delta_h[j] += d * w2[j];
            }
        }
        for (std::size_t j = 0; j < model.hidden_dim; ++j) {
            if (c.pre1[j] <= 0.0) continue;
            const double d = delta_h[j];
            grad.b1[j] += d;
            double* gw1 = grad.w1.data() + j * model.in_dim;
            for (std::size_t i = 0; i < model.in_dim; ++i) gw1[i] += d * c.z[i];
        }
    }
    return loss * norm;
}

double bce_loss(const MlpModel& model, const std::vector<std::vector<double>>& x,
                const std::vector<std::vector<double>>& y) {
    double loss = 0.0;
    ForwardCache c;
    for (std::size_t s = 0; s < x.size(); ++s) {
        forward_cached(model, x[s], c);
        for (std::size_t o = 0; o < model.out_dim; ++o) loss += bce_from_logit(c.logits[o], y[s][o]);
    }
    return loss / (static_cast<double>(x.size()) * static_cast<double>(model.out_dim));
}

std::vector<double> features_from_measurement(const std::vector<cplx>& measurement) {
    std::vector<double> f;
    f.reserve(2 * measurement.size());
    for (const auto& v : measurement) f.push_back(v.real());
    for (const auto& v : measurement) f.push_back(v.imag());
    return f;
}

void TrainSpec::validate() const {
    if (scene_k < 1) throw std::invalid_argument("train: scene_k must be >= 1");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("train: momentum must lie in [0, 1)");
}

namespace {

std::vector<cplx> noisy_synth(const FingerprintDictionary& dict, const Scene& scene,
                              double snr_db, std::uint64_t noise_seed) {
    auto v = synth_measurement(dict, scene);
    if (std::isinf(snr_db)) return v;
    double mean_power = 0.0;
    for (const auto& x : v) mean_power += std::norm(x);
    mean_power /= static_cast<double>(v.size());
    const double s = std::sqrt(mean_power / std::pow(10.0, snr_db / 10.0) / 2.0);
    Rng rng(derive_seed(noise_seed, "wfp-noise"));
    for (auto& x : v) x += cplx(s * rng.normal(), s * rng.normal());
    return v;
}

void make_dataset(const FingerprintDictionary& dict, const TrainSpec& spec, std::size_t count,
                  std::string_view stream, std::vector<std::vector<double>>& xs,
                  std::vector<std::vector<double>>& ys) {
    const std::size_t n_pos = dict.n_positions();
    auto push = [&](const Scene& scene, std::uint64_t noise_seed) {
        xs.push_back(features_from_measurement(noisy_synth(dict, scene, spec.noise_snr_db, noise_seed)));
        std::vector<double> y(n_pos, 0.0);
        for (auto g : scene.occupied) y[g] = 1.0;
        ys.push_back(std::move(y));
    };
    if (count == 0) {
        std::size_t i = 0;
        for_each_subset(n_pos, spec.scene_k, [&](const std::vector<std::size_t>& subset) {
            push(Scene(subset), derive_seed(spec.optimizer_seed, stream, i));
            ++i;
        });
        return;
    }
    Rng scene_rng(derive_seed(spec.optimizer_seed, std::string(stream) + "-scenes"));
    for (std::size_t i = 0; i < count; ++i)
        push(Scene::random(n_pos, spec.scene_k, scene_rng), derive_seed(spec.optimizer_seed, stream, i));
}

}  // namespace

TrainResult train(const FingerprintDictionary& dictionary, const TrainSpec& spec) {
    spec.validate();
    if (dictionary.m_configs < 1) throw std::invalid_argument("train: dictionary has no configurations");

    std::vector<std::vector<double>> xs, ys, vxs, vys;
    make_dataset(dictionary, spec, spec.n_train_scenes, "train", xs, ys);
    if (spec.n_val_scenes > 0) make_dataset(dictionary, spec, spec.n_val_scenes, "val", vxs, vys);

    TrainResult res;
    res.model = MlpModel::init(2 * dictionary.m_configs, dictionary.n_positions(),
                               derive_seed(spec.optimizer_seed, "weights"));

    // per-feature standardization from the training set
    const std::size_t d = res.model.in_dim;
    res.model.feature_mean.assign(d, 0.0);
    res.model.feature_std.assign(d, 1.0);
    for (const auto& x : xs)
        for (std::size_t i = 0; i < d; ++i) res.model.feature_mean[i] += x[i];
    for (auto& v : res.model.feature_mean) v /= static_cast<double>(xs.size());
    std::vector<double> var(d, 0.0);
    for (const auto& x : xs)
        for (std::size_t i = 0; i < d; ++i) {
            const double c = x[i] - res.model.feature_mean[i];
            var[i] += c * c;
        }
    for (std::size_t i = 0; i < d; ++i) {
        const double s = std::sqrt(var[i] / static_cast<double>(xs.size()));
        res.model.feature_std[i] = s > 1e-12 ? s : 1.0;
    }

    MlpGradients grad;
    MlpGradients vel;
    vel.w1.assign(res.model.w1.size(), 0.0);
    vel.b1.assign(res.model.b1.size(), 0.0);
    vel.w2.assign(res.model.w2.size(), 0.0);
    vel.b2.assign(res.model.b2.size(), 0.0);

    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::vector<double>> bx, by;

    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(spec.optimizer_seed, "shuffle", epoch));
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[shuffle_rng.below(i)]);

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < idx.size(); start += spec.batch_size) {
            const std::size_t end = std::min(start + spec.batch_size, idx.size());
            bx.clear();
            by.clear();
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(xs[idx[i]]);
                by.push_back(ys[idx[i]]);
            }
            const double loss = bce_loss_and_grad(res.model, bx, by, grad);
            epoch_loss += loss;
            ++n_batches;
            if (!std::isfinite(loss)) {
                res.diverged = true;
                res.divergence_epoch = epoch;
                res.train_loss.push_back(loss);
                return res;
            }
            auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g) {
                for (std::size_t i = 0; i < w.size(); ++i) {
                    v[i] = spec.momentum * v[i] - spec.learning_rate * g[i];
                    w[i] += v[i];
                }
            };
            step(res.model.w1, vel.w1, grad.w1);
            step(res.model.b1, vel.b1, grad.b1);
            step(res.model.w2, vel.w2, grad.w2);
            step(res.model.b2, vel.b2, grad.b2);
        }
        res.train_loss.push_back(epoch_loss / static_cast<double>(n_batches));
        if (!vxs.empty()) res.val_loss.push_back(bce_loss(res.model, vxs, vys));
    }
    return res;
}

Scene decode_topk(const MlpModel& model, const std::vector<cplx>& measurement, std::size_t k) {
    const auto out = forward(model, features_from_measurement(measurement));
    if (k > out.size()) throw std::invalid_argument("decode_topk: k exceeds output dimension");
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out[a] > out[b]; });
    order.resize(k);
    return Scene(std::move(order));
}

std::vector<SweepCell> sweep_success_surface(const PathEnsemble& ensemble, const Grid& grid,
                                  const SweepParams& params) {
    grid.validate();
    if (params.m_values.empty() || params.snr_values.empty())
        throw std::invalid_argument("sweep: m_values and snr_values must be non-empty");
    for (auto m : params.m_values)
        if (m == 0) throw std::invalid_argument("sweep: m_configs must be >= 1");
    if (params.n_eval_scenes < 1) throw std::invalid_argument("sweep: n_eval_scenes must be >= 1");

    const double f0 = params.f0 > 0.0 ? params.f0 : ensemble.params.f_center;

    // evaluation scenes and unit noise seeds shared across cells
    std::vector<Scene> scenes;
    {
        Rng rng(derive_seed(params.seed, "sweep-eval-scenes"));
        for (std::size_t i = 0; i < params.n_eval_scenes; ++i)
            scenes.push_back(Scene::random(grid.n_positions, params.scene_k, rng));
    }

    std::vector<SweepCell> cells;
    for (std::size_t mi = 0; mi < params.m_values.size(); ++mi) {
        const std::size_t m = params.m_values[mi];
        const auto dict = calibrate(ensemble, grid, params.object_model, m, f0,
                                    derive_seed(params.seed, "sweep-dict", mi));
        for (double snr : params.snr_values) {
            TrainSpec ts = params.train_template;
            ts.scene_k = params.scene_k;
            ts.noise_snr_db = snr;
            ts.optimizer_seed = derive_seed(params.seed, "sweep-train", mi);
            const auto trained = train(dict, ts);
            if (trained.diverged)
                throw std::runtime_error("sweep: training diverged at epoch " +
                                         std::to_string(trained.divergence_epoch));

            std::vector<double> mlp_succ, bf_succ;
            for (std::size_t i = 0; i < scenes.size(); ++i) {
                const auto meas = measure(ensemble, dict, scenes[i], params.object_model, snr,
                                          derive_seed(params.seed, "sweep-eval-noise", i));
                mlp_succ.push_back(success_rate(decode_topk(trained.model, meas, params.scene_k), scenes[i]));
                if (params.include_brute_force)
                    bf_succ.push_back(
                        success_rate(brute_force_decode(meas, dict, params.scene_k).scene, scenes[i]));
            }
            auto stats = [](const std::vector<double>& v) {
                double mean = 0.0;
                for (double x : v) mean += x;
                mean /= static_cast<double>(v.size());
                double var = 0.0;
                for (double x : v) var += (x - mean) * (x - mean);
                var /= static_cast<double>(v.size());
                return std::pair<double, double>(mean, 1.96 * std::sqrt(var / static_cast<double>(v.size())));
            };
            const auto [m_mean, m_ci] = stats(mlp_succ);
            cells.push_back({m, snr, "mlp", m_mean, m_ci});
            if (params.include_brute_force) {
                const auto [b_mean, b_ci] = stats(bf_succ);
                cells.push_back({m, snr, "brute_force", b_mean, b_ci});
            }
        }
    }
    return cells;
}

void export_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "m_configs,snr_db,mean_success_rate,ci_half_width_95,decoder_label\n";
    out.precision(17);
    for (const auto& c : cells)
        out << c.m_configs << "," << c.snr_db << "," << c.mean_success << "," << c.ci_half_width
            << "," << c.decoder_label << "\n";
}

namespace {

nlohmann::json dvec(const std::vector<double>& v) { return nlohmann::json(v); }

}  // namespace

std::string MlpModel::to_json() const {
    nlohmann::json j = {
        {"format", "riscatter-mlp-v1"},
        {"in_dim", in_dim},
        {"hidden_dim", hidden_dim},
        {"out_dim", out_dim},
        {"w1", dvec(w1)},
        {"b1", dvec(b1)},
        {"w2", dvec(w2)},
        {"b2", dvec(b2)},
        {"feature_mean", dvec(feature_mean)},
        {"feature_std", dvec(feature_std)},
    };
    return j.dump();
}

MlpModel MlpModel::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "riscatter-mlp-v1")
        throw std::invalid_argument("unsupported model file format");
    MlpModel m;
    m.in_dim = j.at("in_dim").get<std::size_t>();
    m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    m.out_dim = j.at("out_dim").get<std::size_t>();
    m.w1 = j.at("w1").get<std::vector<double>>();
    m.b1 = j.at("b1").get<std::vector<double>>();
    m.w2 = j.at("w2").get<std::vector<double>>();
    m.b2 = j.at("b2").get<std::vector<double>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_std = j.at("feature_std").get<std::vector<double>>();
    if (m.w1.size() != m.hidden_dim * m.in_dim || m.w2.size() != m.out_dim * m.hidden_dim)
        throw std::invalid_argument("model weight dimensions inconsistent");
    return m;
}

void MlpModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_json() << "\n";
}

MlpModel MlpModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace riscatter
