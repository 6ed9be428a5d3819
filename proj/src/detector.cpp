#include "perfdiag/detector.hpp"

#include <algorithm>
#include <cmath>

#include "perfdiag/errors.hpp"

namespace perfdiag {

Threshold compute_threshold(std::span<const double> training_errors, double t) {
    if (training_errors.size() < 2) {
        throw DataError("compute_threshold needs at least 2 training errors, got " +
                        std::to_string(training_errors.size()));
    }
    if (!std::isfinite(t) || t < 0.0) {
        throw DataError("threshold multiplier t must be finite and >= 0");
    }
    bool all_equal = true;
    double mu = 0.0;
    for (double e : training_errors) {
        if (!std::isfinite(e) || e < 0.0) {
            throw DataError("training errors must be finite and non-negative");
        }
        all_equal = all_equal && e == training_errors[0];
        mu += e;
    }
    if (all_equal) {
        // keep the degenerate case exact: gamma == every training error
        Threshold threshold;
        threshold.mu = training_errors[0];
        threshold.sigma = 0.0;
        threshold.t = t;
        threshold.gamma = threshold.mu;
        return threshold;
    }
    mu /= static_cast<double>(training_errors.size());
    double var = 0.0;
    for (double e : training_errors) {
        const double d = e - mu;
        var += d * d;
    }
    var /= static_cast<double>(training_errors.size());

    Threshold threshold;
    threshold.mu = mu;
    threshold.sigma = std::sqrt(var);
    threshold.t = t;
    threshold.gamma = mu + t * threshold.sigma;
    return threshold;
}

std::string to_string(Verdict verdict) {
    return verdict == Verdict::Anomalous ? "anomalous" : "normal";
}

Verdict classify_sample(double epsilon, const Threshold& threshold) {
    if (!std::isfinite(epsilon) || epsilon < 0.0) {
        throw DataError("reconstruction error must be finite and non-negative");
    }
    return epsilon > threshold.gamma ? Verdict::Anomalous : Verdict::Normal;
}

RunVerdict classify_run(std::string run_id, std::vector<double> errors, std::vector<bool> flags,
                        double rho) {
    if (flags.empty()) {
        throw DataError("classify_run: run '" + run_id + "' has no sample verdicts");
    }
    if (errors.size() != flags.size()) {
        throw DataError("classify_run: errors and flags differ in length");
    }
    if (!(rho > 0.0) || rho > 1.0) {
        throw DataError("rho must be in (0, 1]");
    }
    RunVerdict verdict;
    verdict.run_id = std::move(run_id);
    verdict.errors = std::move(errors);
    verdict.flags = std::move(flags);
    const std::size_t anomalous =
        static_cast<std::size_t>(std::count(verdict.flags.begin(), verdict.flags.end(), true));
    verdict.anomalous_fraction =
        static_cast<double>(anomalous) / static_cast<double>(verdict.flags.size());
    verdict.verdict = verdict.anomalous_fraction >= rho ? Verdict::Anomalous : Verdict::Normal;
    return verdict;
}

EvalMetrics metrics_from_counts(const BinaryCounts& counts) {
    EvalMetrics metrics;
    const std::size_t n = counts.true_negatives + counts.false_positives;
    const std::size_t m = counts.true_positives + counts.false_negatives;
    const std::size_t flagged = counts.true_positives + counts.false_positives;

    if (n > 0) {
        metrics.false_positive_rate =
            static_cast<double>(counts.false_positives) / static_cast<double>(n);
    }
    if (m > 0) {
        metrics.false_negative_rate =
            static_cast<double>(counts.false_negatives) / static_cast<double>(m);
        metrics.true_positive_rate = 1.0 - *metrics.false_negative_rate;
        metrics.recall = metrics.true_positive_rate;
    }
    if (flagged > 0) {
        metrics.precision =
            static_cast<double>(counts.true_positives) / static_cast<double>(flagged);
    }
    if (metrics.precision && metrics.recall) {
        const double p = *metrics.precision;
        const double r = *metrics.recall;
        metrics.f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    } else if (m > 0 && flagged == 0) {
        // nothing flagged but positives exist: zero recall, zero f1
        metrics.f1 = 0.0;
    }
    return metrics;
}

EvalMetrics evaluate(const std::vector<std::pair<std::string, Verdict>>& run_verdicts,
                     const std::map<std::string, bool>& truth) {
    BinaryCounts counts;
    for (const auto& [run_id, verdict] : run_verdicts) {
        auto it = truth.find(run_id);
        if (it == truth.end()) {
            throw DataError("run_id mismatch: no ground-truth label for run '" + run_id + "'");
        }
        const bool flagged = verdict == Verdict::Anomalous;
        if (it->second) {
            flagged ? ++counts.true_positives : ++counts.false_negatives;
        } else {
            flagged ? ++counts.false_positives : ++counts.true_negatives;
        }
    }
    return metrics_from_counts(counts);
}

EvalMetrics evaluate(const std::vector<RunVerdict>& run_verdicts,
                     const std::map<std::string, bool>& truth) {
    std::vector<std::pair<std::string, Verdict>> pairs;
    pairs.reserve(run_verdicts.size());
    for (const auto& rv : run_verdicts) {
        pairs.emplace_back(rv.run_id, rv.verdict);
    }
    return evaluate(pairs, truth);
}

std::vector<RocPoint> roc_sweep(std::span<const double> training_errors,
                                const std::vector<std::pair<double, bool>>& test_errors_with_labels,
                                std::span<const double> t_values) {
    if (!std::is_sorted(t_values.begin(), t_values.end())) {
        throw DataError("roc_sweep: t_values must be sorted ascending");
    }
    std::size_t positives = 0;
    std::size_t negatives = 0;
    for (const auto& [epsilon, anomalous] : test_errors_with_labels) {
        if (!std::isfinite(epsilon) || epsilon < 0.0) {
            throw DataError("test errors must be finite and non-negative");
        }
        (anomalous ? positives : negatives) += 1;
    }
    if (positives == 0 || negatives == 0) {
        throw DataError("roc_sweep needs test errors from both classes");
    }

    std::vector<RocPoint> points;
    points.reserve(t_values.size());
    for (double t : t_values) {
        const Threshold threshold = compute_threshold(training_errors, t);
        std::size_t tp = 0;
        std::size_t fp = 0;
        for (const auto& [epsilon, anomalous] : test_errors_with_labels) {
            if (epsilon > threshold.gamma) {
                (anomalous ? tp : fp) += 1;
            }
        }
        RocPoint point;
        point.t = t;
        point.fpr = static_cast<double>(fp) / static_cast<double>(negatives);
        point.tpr = static_cast<double>(tp) / static_cast<double>(positives);
        points.push_back(point);
    }
    return points;
}

} // namespace perfdiag
