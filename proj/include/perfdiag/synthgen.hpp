#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "perfdiag/profile.hpp"

namespace perfdiag {

// Marginal distribution of one counter's rate (counts per instruction per
// thread). LogNormal keeps counts non-negative and heavy-tailed, which is
// what real counters look like; spread is a coefficient of variation for
// LogNormal and an absolute standard deviation for Normal.
enum class MarginalFamily { LogNormal, Normal };

struct CounterDistribution {
    MarginalFamily family = MarginalFamily::LogNormal;
    double mean = 0.0;
    double spread = 0.0;
};

struct FunctionModel {
    std::string name;
    std::vector<CounterDistribution> counters; // one per spec counter
    double instructions_mean = 1e6;
    double instructions_jitter = 0.02; // uniform +/- fraction per sample
    // Optional D x m loadings (m < D): adds loadings * u, u ~ N(0, I_m), to
    // the latent rate (log space for LogNormal marginals), giving samples a
    // low-rank manifold structure.
    std::vector<std::vector<double>> factor_loadings;
};

struct WorkloadSpec {
    std::string program = "synthetic";
    VersionTag version;
    CounterSpec counter_spec;
    std::vector<FunctionModel> functions;
    int runs = 20;
    int samples_per_run = 10; // per function per run
    std::vector<int> thread_counts = {4};
    std::uint64_t seed = 1;

    void validate() const;
};

// Draws a raw ProfileSet: rates from each function's distribution, scaled
// by instructions * threads and rounded to integer counts. Deterministic
// for a fixed seed.
ProfileSet generate(const WorkloadSpec& spec);

// factor scales the counter; offset_stds additionally shifts it by that
// many per-function standard deviations of the counter's values in the
// input set.
struct DefectTarget {
    std::string counter;
    double factor = 1.0;
    double offset_stds = 0.0;
};

struct DefectSpec {
    DefectType defect = DefectType::Unknown;
    std::vector<DefectTarget> targets;
    std::vector<std::string> affected_functions; // empty = every function
    double affected_fraction = 1.0;              // of samples, in (0, 1]

    void validate() const;
};

// Ground truth emitted alongside an injected set: exactly which samples
// were perturbed, and per run whether it contains any perturbed sample.
struct InjectionManifest {
    DefectSpec spec;
    std::vector<std::size_t> sample_indices; // ascending
    std::map<std::string, bool> run_labels;  // run_id -> anomalous
};

// Perturbs a seeded selection of samples in the affected functions;
// unselected samples are copied bit for bit.
std::pair<ProfileSet, InjectionManifest> inject(const ProfileSet& set, const DefectSpec& defect,
                                                std::uint64_t seed);

// Ships three illustrative defect scenarios named after the common defect
// classes; not calibrated to real hardware.
//   workloads: "baseline" (one hot function), "seven-functions"
//   defects:   "true-sharing" (HITM x8), "false-sharing" (HITM x4),
//              "numa" (REMOTE_DRAM x6)
WorkloadSpec preset_workload(std::string_view name, const CounterSpec& spec, std::uint64_t seed);
DefectSpec preset_defect(std::string_view name);

} // namespace perfdiag
