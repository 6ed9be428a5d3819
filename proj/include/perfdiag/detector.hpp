#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace perfdiag {

// Reconstruction-error cutoff gamma = mu + t * sigma over the training
// errors, approximating their distribution as Normal.
struct Threshold {
    double mu = 0.0;
    double sigma = 0.0;
    double t = 0.0;
    double gamma = 0.0;

    bool operator==(const Threshold& other) const = default;
};

// mu = arithmetic mean, sigma = population standard deviation.
Threshold compute_threshold(std::span<const double> training_errors, double t);

enum class Verdict { Normal, Anomalous };

std::string to_string(Verdict verdict);

// Anomalous iff epsilon > gamma, strictly: a sample sitting exactly on the
// threshold is still normal.
Verdict classify_sample(double epsilon, const Threshold& threshold);

// Normal/anomalous classification of one execution, aggregated over its
// samples.
struct RunVerdict {
    std::string run_id;
    std::vector<double> errors;
    std::vector<bool> flags;
    double anomalous_fraction = 0.0;
    Verdict verdict = Verdict::Normal;
};

// Anomalous iff the flagged fraction reaches rho; rho in (0, 1], default
// 0.5 = majority of samples.
RunVerdict classify_run(std::string run_id, std::vector<double> errors, std::vector<bool> flags,
                        double rho);

struct RocPoint {
    double t = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

// Rates with a zero denominator are reported as absent, never coerced to 0.
struct EvalMetrics {
    std::optional<double> false_positive_rate;
    std::optional<double> false_negative_rate;
    std::optional<double> true_positive_rate;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::vector<RocPoint> roc_points;
};

struct BinaryCounts {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;
};

EvalMetrics metrics_from_counts(const BinaryCounts& counts);

// Run-level evaluation against ground truth (run_id -> is-anomalous).
// Every verdict's run_id must appear in the truth map.
EvalMetrics evaluate(const std::vector<std::pair<std::string, Verdict>>& run_verdicts,
                     const std::map<std::string, bool>& truth);
EvalMetrics evaluate(const std::vector<RunVerdict>& run_verdicts,
                     const std::map<std::string, bool>& truth);

// Sample-level (fpr, tpr) per threshold multiplier, for ascending
// t_values. Both rates are non-increasing in t.
std::vector<RocPoint> roc_sweep(std::span<const double> training_errors,
                                const std::vector<std::pair<double, bool>>& test_errors_with_labels,
                                std::span<const double> t_values);

} // namespace perfdiag
