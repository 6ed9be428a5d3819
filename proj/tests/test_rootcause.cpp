#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "perfdiag/errors.hpp"
#include "perfdiag/rootcause.hpp"

#include "helpers.hpp"

using namespace perfdiag;

namespace {

// zero net with identity scaler: per-counter error is exactly |z_j|
AutoencoderModel zero_model(std::size_t dim) {
    auto model = init_model({{dim, 1, dim}, Activation::Linear}, 0);
    for (auto& layer : model.weights) {
        std::fill(layer.begin(), layer.end(), 0.0);
    }
    return model;
}

} // namespace

TEST_CASE("per-counter errors of the identity reconstruction are zero") {
    AutoencoderModel model;
    model.topology.layer_sizes = {2, 4, 2};
    model.topology.activation = Activation::Linear;
    model.scaler = Scaler::identity(2);
    model.weights = {std::vector<double>(8, 0.0), std::vector<double>(8, 0.0)};
    model.biases = {std::vector<double>(4, 0.0), std::vector<double>(2, 0.0)};
    model.weights[0][0] = 1.0; // 4x2, row 0 col 0
    model.weights[0][3] = 1.0; // 4x2, row 1 col 1
    model.weights[1][0] = 1.0; // 2x4, row 0 col 0
    model.weights[1][5] = 1.0; // 2x4, row 1 col 1
    const auto errors = per_counter_errors(model, std::vector<double>{0.7, -0.4});
    CHECK(errors == std::vector<double>{0.0, 0.0});
}

TEST_CASE("per-counter errors of a zero net are the absolute scaled components") {
    auto model = zero_model(3);
    model.scaler.mean = {1.0, 1.0, 1.0};
    model.scaler.stddev = {2.0, 2.0, 2.0};
    const auto errors = per_counter_errors(model, std::vector<double>{3.0, -1.0, 1.0});
    CHECK(errors == std::vector<double>{1.0, 1.0, 0.0});
}

TEST_CASE("per-counter error decomposition matches the scalar reconstruction error") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> unit(0.0, 1.0);
    const auto model = init_model({{5, 3, 2, 3, 5}, Activation::Tanh}, 77);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> z(5);
        for (double& v : z) {
            v = unit(rng);
        }
        const auto per_counter = per_counter_errors(model, z);
        double sum = 0.0;
        for (double e : per_counter) {
            CHECK(e >= 0.0);
            sum += e * e;
        }
        const double epsilon = reconstruction_error(model, z);
        CHECK(std::sqrt(sum) == doctest::Approx(epsilon).epsilon(1e-12));
    }
}

TEST_CASE("single-sample ranking sorts by descending error") {
    const auto spec = helpers::spec_of({"c0", "c1", "c2"});
    const auto model = zero_model(3);
    const auto ranking =
        rank_counters({{0.1, 0.9, 0.2}}, model, spec, DefectMapping::defaults());
    REQUIRE(ranking.per_sample_rankings.size() == 1);
    CHECK(ranking.per_sample_rankings[0] == std::vector<std::size_t>{1, 2, 0});
    CHECK(ranking.winner == "c1");
    CHECK(ranking.vote_counts.at("c1") == 1);
}

TEST_CASE("plurality of rank-1 counters wins the vote") {
    const auto spec = helpers::spec_of({"c0", "c1", "c2", "c3"});
    const auto model = zero_model(4);
    const std::vector<std::vector<double>> samples = {
        {0.0, 9.0, 0.0, 1.0}, // votes c1
        {0.1, 5.0, 0.2, 1.0}, // votes c1
        {0.0, 1.0, 0.0, 7.0}, // votes c3
    };
    const auto ranking = rank_counters(samples, model, spec, DefectMapping::defaults());
    CHECK(ranking.winner == "c1");
    CHECK(ranking.vote_counts.at("c1") == 2);
    CHECK(ranking.vote_counts.at("c3") == 1);
    std::size_t total = 0;
    for (const auto& [name, votes] : ranking.vote_counts) {
        total += votes;
    }
    CHECK(total == samples.size());
}

TEST_CASE("vote ties break to the lowest counter index") {
    const auto spec = helpers::spec_of({"c0", "c1", "c2"});
    const auto model = zero_model(3);
    const std::vector<std::vector<double>> samples = {
        {5.0, 0.0, 1.0}, // votes c0
        {1.0, 0.0, 5.0}, // votes c2
    };
    CHECK(rank_counters(samples, model, spec, DefectMapping::defaults()).winner == "c0");
}

TEST_CASE("rank ties within a sample break to the lowest counter index") {
    const auto spec = helpers::spec_of({"c0", "c1", "c2"});
    const auto model = zero_model(3);
    const auto ranking = rank_counters({{3.0, 3.0, 1.0}}, model, spec, DefectMapping::defaults());
    CHECK(ranking.per_sample_rankings[0] == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("ranking is invariant under sample permutation") {
    const auto spec = helpers::spec_of({"c0", "c1", "c2"});
    const auto model = zero_model(3);
    std::vector<std::vector<double>> samples = {
        {5.0, 0.0, 1.0}, {0.0, 4.0, 1.0}, {6.0, 0.0, 1.0}, {0.1, 0.0, 2.0}};
    const auto before = rank_counters(samples, model, spec, DefectMapping::defaults());
    std::reverse(samples.begin(), samples.end());
    const auto after = rank_counters(samples, model, spec, DefectMapping::defaults());
    CHECK(before.winner == after.winner);
    CHECK(before.vote_counts == after.vote_counts);
}

TEST_CASE("empty anomalous sample lists are rejected") {
    const auto spec = helpers::spec_of({"c0", "c1"});
    CHECK_THROWS_AS(rank_counters({}, zero_model(2), spec, DefectMapping::defaults()), DataError);
}

TEST_CASE("default defect mapping") {
    const auto mapping = DefectMapping::defaults();
    CHECK(map_defect("HITM", mapping) == DefectType::CacheContention);
    CHECK(map_defect("OFFCORE_RESPONSE:REMOTE_DRAM", mapping) == DefectType::NumaLatency);
    CHECK(map_defect("BRANCH_MISPRED", mapping) == DefectType::Unknown);
}

TEST_CASE("mapping matches case-insensitively, first rule wins") {
    DefectMapping mapping;
    mapping.rules = {{"dram", DefectType::NumaLatency}, {"remote", DefectType::TrueSharing}};
    CHECK(map_defect("OFFCORE_RESPONSE:REMOTE_DRAM", mapping) == DefectType::NumaLatency);
    CHECK(map_defect("offcore_response:remote_dram", mapping) == DefectType::NumaLatency);
    CHECK(map_defect("REMOTE_X", mapping) == DefectType::TrueSharing);
}

TEST_CASE("amplifying one standardized dimension makes it the winner") {
    // in-distribution samples reconstruct near the mean; a 5-std bump on one
    // dimension dominates the per-counter decomposition
    std::mt19937_64 rng(9);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> train_set(200, std::vector<double>(4));
    for (auto& s : train_set) {
        for (double& v : s) {
            v = unit(rng);
        }
    }
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 32;
    cfg.validation_fraction = 0.0;
    const auto model = train(train_set, Topology::default_for(4), cfg);

    const auto spec = helpers::spec_of({"c0", "c1", "c2", "c3"});
    std::vector<std::vector<double>> anomalous;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> z(4);
        for (double& v : z) {
            v = unit(rng);
        }
        z[2] += 5.0 * model.scaler.stddev[2];
        anomalous.push_back(std::move(z));
    }
    const auto ranking = rank_counters(anomalous, model, spec, DefectMapping::defaults());
    CHECK(ranking.winner == "c2");
    CHECK(ranking.vote_counts.at("c2") == anomalous.size());
}
