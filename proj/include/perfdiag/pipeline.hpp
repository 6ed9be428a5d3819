#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perfdiag/autoencoder.hpp"
#include "perfdiag/clustering.hpp"
#include "perfdiag/detector.hpp"
#include "perfdiag/profile.hpp"
#include "perfdiag/rootcause.hpp"

namespace perfdiag {

struct PipelineConfig {
    int k = 0;        // 0 -> min(4, number of functions)
    double t = 2.0;   // threshold multiplier
    double rho = 0.5; // run verdict: anomalous sample fraction
    int min_samples_per_function = 50;
    bool fallback_routing = true;
    // warn when mean normalized CYCLES grew by less than this fraction
    // between versions (no degradation observed)
    double perf_gate_warn_fraction = 0.05;
    TrainConfig train;
};

// Everything the inference phase needs: routing, one autoencoder and one
// threshold per cluster, and the config snapshot that produced them.
struct ModelBundle {
    static constexpr int kFormatVersion = 1;

    CounterSpec counter_spec;
    ClusterModel clusters;
    std::vector<AutoencoderModel> models;
    std::vector<Threshold> thresholds;
    PipelineConfig config;
    double training_mean_cycles = 0.0; // 0 when no CYCLES counter exists
};

// Normalizes (if raw), clusters the changed functions, trains one
// autoencoder per cluster on its functions' pooled samples, and derives a
// per-cluster threshold from the training reconstruction errors.
// `functions` empty means every function present in the profiles.
ModelBundle train_pipeline(const ProfileSet& old_profiles,
                           const std::vector<std::string>& functions,
                           const PipelineConfig& config);

struct FunctionDiagnosis {
    std::string function;
    int cluster = 0;
    bool routed_by_fallback = false;
    std::vector<RunVerdict> runs;
    bool regressed = false; // any run anomalous
    std::optional<CounterRanking> root_cause;
};

struct DiagnosisReport {
    std::string program;
    bool regression_detected = false;
    std::vector<FunctionDiagnosis> functions;
    // per run, across functions: anomalous iff any function's verdict for
    // that run is anomalous
    std::map<std::string, Verdict> run_verdicts;
    std::optional<EvalMetrics> metrics;
    std::vector<std::string> warnings;
    PipelineConfig config;
    std::size_t clusters_used = 0;
    double t_effective = 0.0;
    double rho_effective = 0.0;
};

struct DetectOptions {
    std::optional<double> t;   // recompute gammas from stored mu/sigma
    std::optional<double> rho; // override the bundle's run ratio
    const std::map<std::string, bool>* truth = nullptr;
    const DefectMapping* defect_mapping = nullptr; // defaults() when null
};

DiagnosisReport detect_pipeline(const ModelBundle& bundle, const ProfileSet& new_profiles,
                                const DetectOptions& options = {});

// Versioned, checksummed single-document serialization. load(save(b)) is
// lossless: reconstruction errors are bit-identical.
void save_bundle(const ModelBundle& bundle, std::ostream& sink);
ModelBundle load_bundle(std::istream& source);

} // namespace perfdiag
