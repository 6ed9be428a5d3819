#include <doctest.h>

#include <random>

#include "perfdiag/detector.hpp"
#include "perfdiag/errors.hpp"

#include "oracles.hpp"

using namespace perfdiag;

TEST_CASE("threshold arithmetic") {
    SUBCASE("zero variance collapses to the mean") {
        const std::vector<double> errors = {0.1, 0.1, 0.1};
        const auto threshold = compute_threshold(errors, 2.0);
        CHECK(threshold.mu == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(threshold.sigma == 0.0);
        CHECK(threshold.gamma == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("population std with t = 1") {
        const std::vector<double> errors = {0.0, 0.2};
        const auto threshold = compute_threshold(errors, 1.0);
        CHECK(threshold.mu == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(threshold.sigma == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(threshold.gamma == doctest::Approx(0.2).epsilon(1e-15));
    }
    SUBCASE("t = 0 is exactly the mean") {
        const std::vector<double> errors = {0.0, 0.2};
        CHECK(compute_threshold(errors, 0.0).gamma == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("gamma is recomputable from the stored fields") {
        const std::vector<double> errors = {0.03, 0.18, 0.22, 0.4};
        const auto threshold = compute_threshold(errors, 1.7);
        CHECK(threshold.gamma == threshold.mu + threshold.t * threshold.sigma);
    }
}

TEST_CASE("threshold matches an independent mean/popstd oracle on random inputs") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> value(0.0, 3.0);
    std::uniform_real_distribution<double> multiplier(0.0, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> errors(2 + trial % 40);
        for (double& e : errors) {
            e = value(rng);
        }
        const double t = multiplier(rng);
        const auto threshold = compute_threshold(errors, t);
        const auto [mean, std] = oracles::reference_mean_popstd(errors);
        CHECK(threshold.mu == doctest::Approx(mean).epsilon(1e-12));
        CHECK(threshold.sigma == doctest::Approx(std).epsilon(1e-12));
        CHECK(threshold.gamma == doctest::Approx(mean + t * std).epsilon(1e-12));
    }
}

TEST_CASE("threshold input validation") {
    CHECK_THROWS_AS(compute_threshold(std::vector<double>{0.1}, 2.0), DataError);
    CHECK_THROWS_AS(compute_threshold(std::vector<double>{0.1, -0.2}, 2.0), DataError);
    CHECK_THROWS_AS(compute_threshold(std::vector<double>{0.1, std::nan("")}, 2.0), DataError);
    CHECK_THROWS_AS(compute_threshold(std::vector<double>{0.1, 0.2}, -1.0), DataError);
}

TEST_CASE("sample classification uses a strict inequality") {
    const auto threshold = compute_threshold(std::vector<double>{0.1, 0.1}, 2.0);
    CHECK(classify_sample(threshold.gamma, threshold) == Verdict::Normal);
    CHECK(classify_sample(threshold.gamma + 1e-12, threshold) == Verdict::Anomalous);
    CHECK(classify_sample(0.0, threshold) == Verdict::Normal);
}

TEST_CASE("run verdicts aggregate sample flags against rho") {
    SUBCASE("two of three anomalous trips the majority") {
        const auto rv = classify_run("r0", {0.5, 0.6, 0.1}, {true, true, false}, 0.5);
        CHECK(rv.anomalous_fraction == doctest::Approx(2.0 / 3.0));
        CHECK(rv.verdict == Verdict::Anomalous);
    }
    SUBCASE("all normal stays normal for any rho") {
        for (double rho : {0.01, 0.5, 1.0}) {
            CHECK(classify_run("r0", {0.1, 0.1, 0.1}, {false, false, false}, rho).verdict ==
                  Verdict::Normal);
        }
    }
    SUBCASE("a single anomalous sample satisfies rho = 1") {
        CHECK(classify_run("r0", {0.9}, {true}, 1.0).verdict == Verdict::Anomalous);
    }
    SUBCASE("empty runs and bad rho are errors") {
        CHECK_THROWS_AS(classify_run("r0", {}, {}, 0.5), DataError);
        CHECK_THROWS_AS(classify_run("r0", {0.1}, {true}, 0.0), DataError);
        CHECK_THROWS_AS(classify_run("r0", {0.1}, {true}, 1.1), DataError);
    }
    SUBCASE("rho orders strictness: any-sample, majority, all-samples") {
        const std::vector<double> errors = {0.9, 0.1, 0.1, 0.1};
        const std::vector<bool> flags = {true, false, false, false};
        CHECK(classify_run("r", errors, flags, 1e-9).verdict == Verdict::Anomalous);
        CHECK(classify_run("r", errors, flags, 0.5).verdict == Verdict::Normal);
        CHECK(classify_run("r", errors, flags, 1.0).verdict == Verdict::Normal);
    }
}

TEST_CASE("evaluation implements the per-class rate definitions") {
    SUBCASE("10 normal runs with 3 flagged give FPR 0.3") {
        std::vector<std::pair<std::string, Verdict>> verdicts;
        std::map<std::string, bool> truth;
        for (int i = 0; i < 10; ++i) {
            const std::string id = "n" + std::to_string(i);
            verdicts.emplace_back(id, i < 3 ? Verdict::Anomalous : Verdict::Normal);
            truth[id] = false;
        }
        for (int i = 0; i < 5; ++i) {
            const std::string id = "a" + std::to_string(i);
            verdicts.emplace_back(id, Verdict::Anomalous);
            truth[id] = true;
        }
        const auto metrics = evaluate(verdicts, truth);
        CHECK(metrics.false_positive_rate == doctest::Approx(0.3));
        CHECK(metrics.false_negative_rate == doctest::Approx(0.0));
    }
    SUBCASE("20 anomalous runs, none missed: FNR 0.0, TPR 1.0") {
        std::vector<std::pair<std::string, Verdict>> verdicts;
        std::map<std::string, bool> truth;
        for (int i = 0; i < 20; ++i) {
            const std::string id = "a" + std::to_string(i);
            verdicts.emplace_back(id, Verdict::Anomalous);
            truth[id] = true;
        }
        for (int i = 0; i < 4; ++i) {
            const std::string id = "n" + std::to_string(i);
            verdicts.emplace_back(id, Verdict::Normal);
            truth[id] = false;
        }
        const auto metrics = evaluate(verdicts, truth);
        CHECK(metrics.false_negative_rate == doctest::Approx(0.0));
        CHECK(metrics.true_positive_rate == doctest::Approx(1.0));
        CHECK(metrics.f1 == doctest::Approx(1.0));
    }
    SUBCASE("perfect verdicts") {
        const auto metrics = evaluate(
            std::vector<std::pair<std::string, Verdict>>{{"n", Verdict::Normal},
                                                         {"a", Verdict::Anomalous}},
            {{"n", false}, {"a", true}});
        CHECK(metrics.false_positive_rate == doctest::Approx(0.0));
        CHECK(metrics.false_negative_rate == doctest::Approx(0.0));
        CHECK(metrics.f1 == doctest::Approx(1.0));
    }
    SUBCASE("missing label is a run_id mismatch") {
        CHECK_THROWS_WITH_AS(
            evaluate(std::vector<std::pair<std::string, Verdict>>{{"x", Verdict::Normal}},
                     std::map<std::string, bool>{{"y", false}}),
            doctest::Contains("run_id mismatch"), DataError);
    }
    SUBCASE("zero denominators are reported as undefined, not zero") {
        const auto metrics =
            evaluate(std::vector<std::pair<std::string, Verdict>>{{"a", Verdict::Anomalous}},
                     std::map<std::string, bool>{{"a", true}});
        CHECK_FALSE(metrics.false_positive_rate.has_value());
        CHECK(metrics.false_negative_rate == doctest::Approx(0.0));
    }
    SUBCASE("nothing flagged with positives present: recall 0, f1 0") {
        const auto metrics = evaluate(
            std::vector<std::pair<std::string, Verdict>>{{"a", Verdict::Normal},
                                                         {"n", Verdict::Normal}},
            {{"a", true}, {"n", false}});
        CHECK(metrics.recall == doctest::Approx(0.0));
        CHECK(metrics.f1 == doctest::Approx(0.0));
        CHECK_FALSE(metrics.precision.has_value());
    }
}

TEST_CASE("evaluation is permutation-invariant over runs") {
    std::vector<std::pair<std::string, Verdict>> verdicts = {{"a", Verdict::Anomalous},
                                                             {"b", Verdict::Normal},
                                                             {"c", Verdict::Anomalous},
                                                             {"d", Verdict::Normal}};
    const std::map<std::string, bool> truth = {
        {"a", true}, {"b", true}, {"c", false}, {"d", false}};
    const auto before = evaluate(verdicts, truth);
    std::reverse(verdicts.begin(), verdicts.end());
    const auto after = evaluate(verdicts, truth);
    CHECK(before.false_positive_rate == after.false_positive_rate);
    CHECK(before.false_negative_rate == after.false_negative_rate);
    CHECK(before.f1 == after.f1);
}

TEST_CASE("roc sweep endpoints and monotonicity") {
    SUBCASE("gamma above every test error gives (0, 0)") {
        const std::vector<double> training = {0.1, 0.2, 0.3};
        const std::vector<std::pair<double, bool>> test = {{0.25, true}, {0.05, false}};
        const std::vector<double> ts = {50.0};
        const auto points = roc_sweep(training, test, ts);
        CHECK(points[0].fpr == 0.0);
        CHECK(points[0].tpr == 0.0);
    }
    SUBCASE("gamma below every test error gives (1, 1)") {
        const std::vector<double> training = {0.01, 0.01};
        const std::vector<std::pair<double, bool>> test = {{0.5, true}, {0.3, false}};
        const std::vector<double> ts = {0.0, 3.0};
        for (const auto& point : roc_sweep(training, test, ts)) {
            CHECK(point.fpr == 1.0);
            CHECK(point.tpr == 1.0);
        }
    }
    SUBCASE("rates are non-increasing in t") {
        std::mt19937_64 rng(13);
        std::lognormal_distribution<double> normal_err(0.0, 0.4);
        std::vector<double> training(200);
        for (double& e : training) {
            e = normal_err(rng);
        }
        std::vector<std::pair<double, bool>> test;
        for (int i = 0; i < 150; ++i) {
            test.emplace_back(normal_err(rng), false);
        }
        for (int i = 0; i < 150; ++i) {
            test.emplace_back(normal_err(rng) + 1.5, true);
        }
        std::vector<double> ts;
        for (double t = 0.0; t <= 3.0; t += 0.25) {
            ts.push_back(t);
        }
        const auto points = roc_sweep(training, test, ts);
        for (std::size_t i = 1; i < points.size(); ++i) {
            CHECK(points[i].fpr <= points[i - 1].fpr);
            CHECK(points[i].tpr <= points[i - 1].tpr);
        }
    }
    SUBCASE("unsorted t values and one-class test sets are errors") {
        const std::vector<double> training = {0.1, 0.2};
        const std::vector<std::pair<double, bool>> test = {{0.3, true}, {0.1, false}};
        CHECK_THROWS_AS(roc_sweep(training, test, std::vector<double>{2.0, 1.0}), DataError);
        const std::vector<std::pair<double, bool>> one_class = {{0.3, true}};
        CHECK_THROWS_AS(roc_sweep(training, one_class, std::vector<double>{1.0}), DataError);
    }
}

TEST_CASE("gamma grows strictly with t when sigma is positive") {
    const std::vector<double> errors = {0.1, 0.3, 0.2};
    double previous = -1.0;
    for (double t : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        const double gamma = compute_threshold(errors, t).gamma;
        CHECK(gamma > previous);
        previous = gamma;
    }
}

TEST_CASE("t=2 approximates a 95% interval on near-normal error distributions") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> err(1.0, 0.1);
    std::vector<double> training(2000);
    for (double& e : training) {
        e = std::max(0.0, err(rng));
    }
    const auto threshold = compute_threshold(training, 2.0);
    std::size_t flagged = 0;
    const std::size_t n = 2000;
    for (std::size_t i = 0; i < n; ++i) {
        if (classify_sample(std::max(0.0, err(rng)), threshold) == Verdict::Anomalous) {
            ++flagged;
        }
    }
    const double fpr = static_cast<double>(flagged) / static_cast<double>(n);
    CHECK(fpr >= 0.02);
    CHECK(fpr <= 0.08);
}
