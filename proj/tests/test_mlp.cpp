#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "riscatter/mlp.hpp"

using namespace riscatter;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// hand-built dictionary with random complex entries, no physics behind it
FingerprintDictionary toy_dictionary(std::size_t n_positions, std::size_t m_configs,
                                     std::uint64_t seed) {
    FingerprintDictionary d;
    d.config_seed = seed;
    d.m_configs = m_configs;
    d.n_elements = 4;
    d.f0 = 2.5e9;
    Rng rng(seed);
    d.baseline.resize(m_configs);
    for (auto& v : d.baseline) v = cplx(rng.normal(), rng.normal());
    d.deltas.assign(n_positions, std::vector<cplx>(m_configs));
    for (auto& row : d.deltas)
        for (auto& v : row) v = cplx(0.5 * rng.normal(), 0.5 * rng.normal());
    return d;
}

TrainSpec full_batch_spec(std::uint64_t seed, std::size_t epochs, double lr) {
    TrainSpec s;
    s.n_train_scenes = 0;  // every k-subset once, lexicographic
    s.n_val_scenes = 0;
    s.scene_k = 3;
    s.epochs = epochs;
    s.batch_size = 100000;  // single batch
    s.learning_rate = lr;
    s.momentum = 0.9;
    s.optimizer_seed = seed;
    s.noise_snr_db = kInf;
    return s;
}

}  // namespace

TEST_CASE("freshly initialized model outputs 0.5 everywhere") {
    const auto m = MlpModel::init(8, 5, 123);
    const auto out = forward(m, std::vector<double>(8, 0.7));
    REQUIRE(out.size() == 5);
    for (double v : out) CHECK(v == 0.5);
}

TEST_CASE("large biases saturate the sigmoid outputs") {
    auto m = MlpModel::init(4, 3, 1);
    m.b2 = {40.0, -40.0, 0.0};
    const auto out = forward(m, {0.0, 0.0, 0.0, 0.0});
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out[2] == 0.5);
}

TEST_CASE("forward pass matches an explicit matmul oracle") {
    const std::size_t in = 6, hid = 9, out_dim = 4;
    auto m = MlpModel::random(in, out_dim, 77, hid);
    m.feature_mean.assign(in, 0.3);
    m.feature_std.assign(in, 1.7);
    Rng rng(5);
    std::vector<double> x(in);
    for (auto& v : x) v = rng.normal();

    std::vector<double> z(in), h(hid), logits(out_dim);
    for (std::size_t i = 0; i < in; ++i) z[i] = (x[i] - 0.3) / 1.7;
    for (std::size_t j = 0; j < hid; ++j) {
        double a = m.b1[j];
        for (std::size_t i = 0; i < in; ++i) a += m.w1[j * in + i] * z[i];
        h[j] = a > 0.0 ? a : 0.0;
    }
    for (std::size_t o = 0; o < out_dim; ++o) {
        double a = m.b2[o];
        for (std::size_t j = 0; j < hid; ++j) a += m.w2[o * hid + j] * h[j];
        logits[o] = a;
    }
    const auto got = forward(m, x);
    for (std::size_t o = 0; o < out_dim; ++o)
        CHECK(got[o] == doctest::Approx(1.0 / (1.0 + std::exp(-logits[o]))).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    const std::size_t in = 6, hid = 8, out_dim = 4, batch = 5;
    for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
        auto m = MlpModel::random(in, out_dim, seed, hid);
        m.feature_mean.assign(in, 0.1);
        m.feature_std.assign(in, 0.9);
        Rng rng(seed + 1000);
        std::vector<std::vector<double>> xs(batch, std::vector<double>(in));
        std::vector<std::vector<double>> ys(batch, std::vector<double>(out_dim, 0.0));
        for (auto& row : xs)
            for (auto& v : row) v = rng.normal();
        for (auto& row : ys) row[rng.below(out_dim)] = 1.0;

        MlpGradients g;
        bce_loss_and_grad(m, xs, ys, g);

        const double h = 1e-5;
        auto check_block = [&](std::vector<double>& w, const std::vector<double>& gw) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double saved = w[i];
                w[i] = saved + h;
                const double lp = bce_loss(m, xs, ys);
                w[i] = saved - h;
                const double lm = bce_loss(m, xs, ys);
                w[i] = saved;
                const double fd = (lp - lm) / (2.0 * h);
                CHECK(std::abs(fd - gw[i]) < 1e-5 * (1.0 + std::abs(fd)));
            }
        };
        check_block(m.w1, g.w1);
        check_block(m.b1, g.b1);
        check_block(m.w2, g.w2);
        check_block(m.b2, g.b2);
    }
}

TEST_CASE("training overfits a small noiseless dataset") {
    const auto dict = toy_dictionary(6, 4, 99);
    const auto spec = full_batch_spec(7, 2000, 0.3);
    const auto res = train(dict, spec);
    REQUIRE(!res.diverged);
    CHECK(res.train_loss.back() < 0.01);
}

TEST_CASE("training loss history is bit-reproducible") {
    const auto dict = toy_dictionary(6, 4, 101);
    TrainSpec spec = full_batch_spec(13, 40, 0.2);
    spec.n_train_scenes = 30;  // exercise the random-scene path too
    spec.n_val_scenes = 10;
    spec.noise_snr_db = 25.0;
    spec.batch_size = 8;
    const auto a = train(dict, spec);
    const auto b = train(dict, spec);
    REQUIRE(a.train_loss.size() == b.train_loss.size());
    for (std::size_t i = 0; i < a.train_loss.size(); ++i)
        CHECK(a.train_loss[i] == b.train_loss[i]);
    REQUIRE(a.val_loss.size() == b.val_loss.size());
    for (std::size_t i = 0; i < a.val_loss.size(); ++i) CHECK(a.val_loss[i] == b.val_loss[i]);
    for (std::size_t i = 0; i < a.model.w1.size(); ++i) CHECK(a.model.w1[i] == b.model.w1[i]);
}

TEST_CASE("top-k decoding ranks by output score with index-order ties") {
    auto m = MlpModel::init(2, 5, 3, 4);  // w2 = 0: outputs depend on b2 only
    m.b2 = {2.0, 0.1, 1.5, 1.0, -1.0};
    const std::vector<cplx> meas = {cplx(0.1, 0.2)};
    const auto top3 = decode_topk(m, meas, 3);
    CHECK(top3.occupied == std::vector<std::size_t>{0, 2, 3});

    m.b2.assign(5, 0.25);  // all equal: earliest indices win
    const auto first2 = decode_topk(m, meas, 2);
    CHECK(first2.occupied == std::vector<std::size_t>{0, 1});

    CHECK_THROWS_AS(decode_topk(m, meas, 6), std::invalid_argument);
}

TEST_CASE("training is equivariant under relabeling the grid positions") {
    const std::size_t n_pos = 6, k = 2;
    const auto dict_a = toy_dictionary(n_pos, 5, 202);
    const std::vector<std::size_t> sigma = {3, 0, 5, 1, 4, 2};
    FingerprintDictionary dict_b = dict_a;
    for (std::size_t g = 0; g < n_pos; ++g) dict_b.deltas[sigma[g]] = dict_a.deltas[g];

    TrainSpec spec = full_batch_spec(31, 150, 0.1);
    spec.scene_k = k;
    const auto ra = train(dict_a, spec);
    const auto rb = train(dict_b, spec);
    REQUIRE(!ra.diverged);
    REQUIRE(!rb.diverged);

    std::size_t agree = 0, total = 0;
    for_each_subset(n_pos, k, [&](const std::vector<std::size_t>& subset) {
        const auto meas = synth_measurement(dict_a, Scene(subset));
        const auto da = decode_topk(ra.model, meas, k);
        const auto db = decode_topk(rb.model, meas, k);
        std::vector<std::size_t> mapped;
        for (auto g : da.occupied) mapped.push_back(sigma[g]);
        std::sort(mapped.begin(), mapped.end());
        agree += (mapped == db.occupied);
        ++total;
    });
    CHECK(agree == total);
}

TEST_CASE("absurd learning rates trip the divergence flag") {
    const auto dict = toy_dictionary(6, 4, 55);
    TrainSpec spec = full_batch_spec(1, 50, 1e9);
    const auto res = train(dict, spec);
    CHECK(res.diverged);
    CHECK(res.divergence_epoch < 50);
}

TEST_CASE("train spec validation rejects bad hyperparameters") {
    const auto dict = toy_dictionary(6, 4, 66);
    TrainSpec spec = full_batch_spec(1, 10, 0.1);
    spec.learning_rate = 0.0;
    CHECK_THROWS_AS(train(dict, spec), std::invalid_argument);
    spec = full_batch_spec(1, 10, 0.1);
    spec.momentum = 1.0;
    CHECK_THROWS_AS(train(dict, spec), std::invalid_argument);
    spec = full_batch_spec(1, 10, 0.1);
    spec.epochs = 0;
    CHECK_THROWS_AS(train(dict, spec), std::invalid_argument);
}

TEST_CASE("model persistence round-trips bitwise") {
    const auto dict = toy_dictionary(5, 3, 77);
    TrainSpec spec = full_batch_spec(9, 10, 0.1);
    const auto res = train(dict, spec);
    const std::string path = "mlp_test.json";
    res.model.save(path);
    const auto loaded = MlpModel::load(path);
    CHECK(loaded.in_dim == res.model.in_dim);
    for (std::size_t i = 0; i < res.model.w1.size(); ++i) CHECK(loaded.w1[i] == res.model.w1[i]);
    for (std::size_t i = 0; i < res.model.w2.size(); ++i) CHECK(loaded.w2[i] == res.model.w2[i]);
    const std::vector<cplx> meas = {cplx(0.3, -0.1), cplx(1.0, 0.2), cplx(-0.4, 0.6)};
    const auto a = forward(res.model, features_from_measurement(meas));
    const auto b = forward(loaded, features_from_measurement(meas));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    std::remove(path.c_str());
}
