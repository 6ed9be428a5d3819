#include <doctest.h>

#include <cmath>
#include <random>

#include "perfdiag/autoencoder.hpp"
#include "perfdiag/errors.hpp"

#include "oracles.hpp"

using namespace perfdiag;

namespace {

std::vector<std::vector<double>> manifold_samples(std::size_t count, std::size_t dim,
                                                  std::size_t latent_dim, std::uint64_t seed,
                                                  double noise = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> loadings(dim, std::vector<double>(latent_dim));
    for (auto& row : loadings) {
        for (double& v : row) {
            v = unit(rng);
        }
    }
    std::vector<std::vector<double>> samples(count, std::vector<double>(dim));
    for (auto& sample : samples) {
        std::vector<double> u(latent_dim);
        for (double& v : u) {
            v = unit(rng);
        }
        for (std::size_t j = 0; j < dim; ++j) {
            double value = 0.1 * static_cast<double>(j);
            for (std::size_t l = 0; l < latent_dim; ++l) {
                value += loadings[j][l] * u[l];
            }
            sample[j] = value + noise * unit(rng);
        }
    }
    return samples;
}

double mean_reconstruction_error(const AutoencoderModel& model,
                                 const std::vector<std::vector<double>>& samples) {
    double total = 0.0;
    for (const auto& s : samples) {
        total += reconstruction_error(model, s);
    }
    return total / static_cast<double>(samples.size());
}

// test-only construction: exact identity through a widened linear stack
AutoencoderModel identity_model(std::size_t dim) {
    AutoencoderModel model;
    model.topology.layer_sizes = {dim, 2 * dim, dim};
    model.topology.activation = Activation::Linear;
    model.scaler = Scaler::identity(dim);
    model.weights.resize(2);
    model.biases.resize(2);
    model.weights[0].assign(2 * dim * dim, 0.0);
    model.weights[1].assign(dim * 2 * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        model.weights[0][i * dim + i] = 1.0;
        model.weights[1][i * 2 * dim + i] = 1.0;
    }
    model.biases[0].assign(2 * dim, 0.0);
    model.biases[1].assign(dim, 0.0);
    return model;
}

} // namespace

TEST_CASE("fit_scaler computes population statistics") {
    const auto scaler = fit_scaler({{0.0, 0.0}, {2.0, 4.0}});
    CHECK(scaler.mean == std::vector<double>{1.0, 2.0});
    CHECK(scaler.stddev == std::vector<double>{1.0, 2.0});
    CHECK(scaler.constant == std::vector<bool>{false, false});
}

TEST_CASE("fit_scaler flags zero-variance features with std 1") {
    const auto scaler = fit_scaler({{3.0, 1.0}, {3.0, 2.0}, {3.0, 3.0}});
    CHECK(scaler.stddev[0] == 1.0);
    CHECK(scaler.constant[0]);
    CHECK_FALSE(scaler.constant[1]);
}

TEST_CASE("fit_scaler requires two samples") {
    CHECK_THROWS_AS(fit_scaler({{1.0}}), DataError);
}

TEST_CASE("scaler round-trips non-constant features") {
    const auto samples = manifold_samples(50, 5, 2, 7, 0.01);
    const auto scaler = fit_scaler(samples);
    for (const auto& x : samples) {
        const auto back = scaler.destandardize(scaler.standardize(x));
        for (std::size_t j = 0; j < x.size(); ++j) {
            CHECK(back[j] == doctest::Approx(x[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("topology validation") {
    Topology topo;
    topo.layer_sizes = {4, 2, 4};
    CHECK_NOTHROW(topo.validate());
    topo.layer_sizes = {4, 2};
    CHECK_THROWS_AS(topo.validate(), ConfigError);
    topo.layer_sizes = {4, 2, 3}; // asymmetric
    CHECK_THROWS_AS(topo.validate(), ConfigError);
    topo.layer_sizes = {4, 4, 4}; // no bottleneck
    CHECK_THROWS_AS(topo.validate(), ConfigError);
    const auto def = Topology::default_for(33);
    CHECK(def.layer_sizes == std::vector<std::size_t>{33, 17, 9, 17, 33});
}

TEST_CASE("zero-weight linear net reconstructs the scaler mean") {
    auto model = init_model({{4, 2, 4}, Activation::Linear}, 3);
    for (auto& layer : model.weights) {
        std::fill(layer.begin(), layer.end(), 0.0);
    }
    model.scaler.mean = {1.0, 2.0, 3.0, 4.0};
    model.scaler.stddev = {1.0, 1.0, 2.0, 2.0};
    const auto out = forward(model, std::vector<double>{9.0, 9.0, 9.0, 9.0});
    CHECK(out == std::vector<double>{1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("identity-initialized net reproduces its input exactly") {
    const auto model = identity_model(3);
    const std::vector<double> x = {0.5, -1.25, 3.75};
    CHECK(forward(model, x) == x);
    CHECK(reconstruction_error(model, x) == 0.0);
}

TEST_CASE("forward matches an independent reference implementation") {
    for (auto activation : {Activation::Tanh, Activation::Relu, Activation::Sigmoid}) {
        auto model = init_model({{6, 4, 2, 4, 6}, activation}, 42);
        std::mt19937_64 rng(99);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> x(6);
            for (double& v : x) {
                v = unit(rng);
            }
            const auto ours = forward_scaled(model, x);
            const auto reference = oracles::reference_forward_scaled(model, x);
            for (std::size_t j = 0; j < x.size(); ++j) {
                CHECK(ours[j] == doctest::Approx(reference[j]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("forward validates dimension and finiteness") {
    const auto model = init_model({{4, 2, 4}, Activation::Tanh}, 1);
    CHECK_THROWS_AS(forward(model, std::vector<double>{1.0, 2.0}), DataError);
    CHECK_THROWS_AS(
        forward(model, std::vector<double>{1.0, std::numeric_limits<double>::infinity(), 0.0, 0.0}),
        DataError);
}

TEST_CASE("reconstruction error of a zero net is the scaled input norm") {
    auto model = init_model({{3, 1, 3}, Activation::Linear}, 5);
    for (auto& layer : model.weights) {
        std::fill(layer.begin(), layer.end(), 0.0);
    }
    model.scaler.mean = {1.0, 1.0, 1.0};
    model.scaler.stddev = {2.0, 2.0, 2.0};
    const std::vector<double> z = {3.0, 5.0, 1.0};
    // standardized: [1, 2, 0]
    CHECK(reconstruction_error(model, z) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("reconstruction error equals the independently recomputed norm") {
    const auto samples = manifold_samples(30, 6, 2, 11, 0.05);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 8;
    cfg.validation_fraction = 0.0;
    const auto model = train(samples, Topology::default_for(6), cfg);
    for (const auto& x : samples) {
        const auto reconstruction = forward(model, x);
        const auto xs = model.scaler.standardize(x);
        const auto rs = model.scaler.standardize(reconstruction);
        double sum = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            sum += (xs[j] - rs[j]) * (xs[j] - rs[j]);
        }
        CHECK(reconstruction_error(model, x) == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
    }
}

TEST_CASE("training on a linear manifold collapses the reconstruction error") {
    const auto samples = manifold_samples(500, 8, 2, 21);
    Topology topo;
    topo.layer_sizes = {8, 4, 2, 4, 8};
    topo.activation = Activation::Tanh;

    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 32;
    cfg.learning_rate = 3e-3;
    cfg.seed = 17;
    cfg.validation_fraction = 0.1;
    cfg.early_stop_patience = 50;

    TrainConfig zero_epochs = cfg;
    zero_epochs.epochs = 0;
    const auto initial = train(samples, topo, zero_epochs);
    const auto trained = train(samples, topo, cfg);

    const double before = mean_reconstruction_error(initial, samples);
    const double after = mean_reconstruction_error(trained, samples);
    CHECK(after <= 0.1 * before);
    CHECK(trained.meta.final_loss <= trained.meta.initial_loss);
}

TEST_CASE("training is deterministic per seed") {
    const auto samples = manifold_samples(64, 5, 2, 31, 0.05);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 16;
    cfg.seed = 1234;
    const auto topo = Topology::default_for(5);
    const auto a = train(samples, topo, cfg);
    const auto b = train(samples, topo, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);
    CHECK(a.meta.final_loss == b.meta.final_loss);
}

TEST_CASE("zero epochs returns the initialized weights") {
    const auto samples = manifold_samples(32, 4, 1, 41, 0.05);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 777;
    const auto topo = Topology::default_for(4);
    const auto model = train(samples, topo, cfg);
    CHECK(model.meta.epochs_run == 0);
    CHECK(model.meta.final_loss == model.meta.initial_loss);
    CHECK(model.weights == init_model(topo, 777).weights);
}

TEST_CASE("training rejects undersized sample sets") {
    TrainConfig cfg;
    cfg.batch_size = 32;
    CHECK_THROWS_WITH_AS(train(manifold_samples(8, 4, 1, 3), Topology::default_for(4), cfg),
                         doctest::Contains("too few samples"), DataError);
}

TEST_CASE("full-batch gradient descent decreases the loss monotonically") {
    const auto samples = manifold_samples(24, 4, 1, 51, 0.02);
    Topology topo;
    topo.layer_sizes = {4, 2, 1, 2, 4};
    topo.activation = Activation::Tanh;
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.batch_size = static_cast<int>(samples.size());
    cfg.learning_rate = 1e-3;
    cfg.optimizer = OptimizerKind::Sgd;
    cfg.validation_fraction = 0.0;
    cfg.seed = 5;
    const auto model = train(samples, topo, cfg);
    REQUIRE(model.meta.loss_history.size() == 60);
    double previous = model.meta.initial_loss;
    for (double loss : model.meta.loss_history) {
        CHECK(loss <= previous + 1e-12);
        previous = loss;
    }
}

TEST_CASE("sample order does not affect full-batch training observably") {
    auto samples = manifold_samples(20, 4, 1, 61, 0.02);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = static_cast<int>(samples.size());
    cfg.learning_rate = 1e-3;
    cfg.optimizer = OptimizerKind::Sgd;
    cfg.validation_fraction = 0.0;
    const auto topo = Topology::default_for(4);

    const auto forward_order = train(samples, topo, cfg);
    std::reverse(samples.begin(), samples.end());
    const auto reverse_order = train(samples, topo, cfg);
    // equal up to floating-point reassociation of the batch sums
    CHECK(forward_order.meta.final_loss ==
          doctest::Approx(reverse_order.meta.final_loss).epsilon(1e-8));
    const std::vector<double> probe = {0.1, -0.2, 0.3, 0.05};
    const auto a = forward(forward_order, probe);
    const auto b = forward(reverse_order, probe);
    for (std::size_t j = 0; j < probe.size(); ++j) {
        CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-8));
    }
}

TEST_CASE("gradient check stays under 1e-4 for every activation") {
    CHECK(gradient_check({{6, 3, 2, 3, 6}, Activation::Tanh}, 1) < 1e-4);
    CHECK(gradient_check({{6, 3, 2, 3, 6}, Activation::Sigmoid}, 2) < 1e-4);
    CHECK(gradient_check({{6, 3, 2, 3, 6}, Activation::Relu}, 3) < 1e-4);
    CHECK(gradient_check({{8, 4, 2, 4, 8}, Activation::Tanh}, 4) < 1e-4);
}

TEST_CASE("linear 2-2-2 gradients match the closed form to 1e-10") {
    // test-only construction; bypasses the bottleneck rule on purpose
    AutoencoderModel model;
    model.topology.layer_sizes = {2, 2, 2};
    model.topology.activation = Activation::Linear;
    model.scaler = Scaler::identity(2);
    model.weights = {{0.3, -0.7, 0.5, 0.2}, {-0.4, 0.9, 0.1, 0.6}};
    model.biases = {{0.05, -0.1}, {0.2, 0.0}};
    const std::vector<double> x = {0.8, -0.3};

    Gradients grads;
    batch_loss(model, {x}, &grads);

    // closed form for y = W2 (W1 x + b1) + b2, L = ||y - x||^2
    const auto& w1 = model.weights[0];
    const auto& w2 = model.weights[1];
    const double h0 = w1[0] * x[0] + w1[1] * x[1] + model.biases[0][0];
    const double h1 = w1[2] * x[0] + w1[3] * x[1] + model.biases[0][1];
    const double y0 = w2[0] * h0 + w2[1] * h1 + model.biases[1][0];
    const double y1 = w2[2] * h0 + w2[3] * h1 + model.biases[1][1];
    const double e0 = 2.0 * (y0 - x[0]);
    const double e1 = 2.0 * (y1 - x[1]);

    const std::vector<double> gw2 = {e0 * h0, e0 * h1, e1 * h0, e1 * h1};
    const std::vector<double> gb2 = {e0, e1};
    const double back0 = w2[0] * e0 + w2[2] * e1;
    const double back1 = w2[1] * e0 + w2[3] * e1;
    const std::vector<double> gw1 = {back0 * x[0], back0 * x[1], back1 * x[0], back1 * x[1]};
    const std::vector<double> gb1 = {back0, back1};

    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(grads.weights[1][i] == doctest::Approx(gw2[i]).epsilon(1e-10));
        CHECK(grads.weights[0][i] == doctest::Approx(gw1[i]).epsilon(1e-10));
    }
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(grads.biases[1][i] == doctest::Approx(gb2[i]).epsilon(1e-10));
        CHECK(grads.biases[0][i] == doctest::Approx(gb1[i]).epsilon(1e-10));
    }
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.validation_fraction = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.validation_fraction = 0.1;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
