#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "perfdiag/autoencoder.hpp"
#include "perfdiag/profile.hpp"

namespace perfdiag {

// Per-counter absolute reconstruction error in standardized space. The
// Euclidean norm of this vector is exactly reconstruction_error(model, z).
std::vector<double> per_counter_errors(const AutoencoderModel& model, std::span<const double> z);

// Ordered pattern -> defect rules; patterns match case-insensitively as
// substrings of the counter name, first match wins.
struct DefectRule {
    std::string pattern;
    DefectType type = DefectType::Unknown;
};

struct DefectMapping {
    std::vector<DefectRule> rules;

    // HITM -> cache contention (true/false sharing both elevate it, so the
    // default stays at the contention level); REMOTE_DRAM -> NUMA latency.
    static DefectMapping defaults();
};

DefectType map_defect(std::string_view counter, const DefectMapping& mapping);

// Majority vote over the rank-1 counters of each anomalous sample.
struct CounterRanking {
    // per anomalous sample: counter indices in descending per-counter error
    // order (ties by ascending index)
    std::vector<std::vector<std::size_t>> per_sample_rankings;
    // counter name -> number of samples where it ranked first; sums to the
    // number of anomalous samples
    std::map<std::string, std::size_t> vote_counts;
    std::string winner;
    DefectType defect = DefectType::Unknown;
};

CounterRanking rank_counters(const std::vector<std::vector<double>>& anomalous_samples,
                             const AutoencoderModel& model, const CounterSpec& spec,
                             const DefectMapping& mapping);

} // namespace perfdiag
