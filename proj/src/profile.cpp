#include "perfdiag/profile.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "perfdiag/errors.hpp"

namespace perfdiag {

CounterSpec::CounterSpec(std::vector<Counter> counters) : counters_(std::move(counters)) {
    if (counters_.empty()) {
        throw DataError("counter spec must define at least one counter");
    }
    for (std::size_t i = 0; i < counters_.size(); ++i) {
        if (counters_[i].name.empty()) {
            throw DataError("counter " + std::to_string(i) + " has an empty name");
        }
        auto [it, inserted] = index_.emplace(counters_[i].name, i);
        if (!inserted) {
            throw DataError("duplicate counter name: " + counters_[i].name);
        }
    }
}

std::optional<std::size_t> CounterSpec::index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

CounterSpec CounterSpec::reference() {
    return CounterSpec({
        {"CYCLES", "unhalted core cycles"},
        {"HITM", "loads that hit a modified line in another core's cache"},
        {"OFFCORE_RESPONSE:REMOTE_DRAM", "off-core requests served by remote DRAM"},
        {"OFFCORE_RESPONSE:LOCAL_DRAM", "off-core requests served by local DRAM"},
        {"L1_DCM", "L1 data cache misses"},
        {"L1_ICM", "L1 instruction cache misses"},
        {"L2_DCM", "L2 data cache misses"},
        {"L2_ICM", "L2 instruction cache misses"},
        {"L2_TCM", "L2 total cache misses"},
        {"L3_TCM", "L3 total cache misses"},
        {"CA_SNP", "snoop requests"},
        {"CA_SHR", "requests for shared cache lines"},
        {"CA_CLN", "requests for clean cache lines"},
        {"CA_INV", "cache line invalidations"},
        {"CA_ITV", "cache line interventions"},
        {"TLB_DM", "data TLB misses"},
        {"TLB_IM", "instruction TLB misses"},
        {"BR_TKN", "taken branches"},
        {"BR_NTK", "not-taken branches"},
        {"BR_MSP", "mispredicted branches"},
        {"BR_PRC", "correctly predicted branches"},
        {"RES_STL", "cycles stalled on any resource"},
        {"MEM_WCY", "cycles stalled on memory writes"},
        {"STL_ICY", "cycles with no instruction issue"},
        {"FUL_ICY", "cycles with maximum instruction issue"},
        {"STL_CCY", "cycles with no instruction completion"},
        {"FUL_CCY", "cycles with maximum instruction completion"},
        {"LD_INS", "load instructions"},
        {"SR_INS", "store instructions"},
        {"BR_INS", "branch instructions"},
        {"REF_CYC", "reference clock cycles"},
        {"PRF_DM", "data prefetch cache misses"},
        {"LST_INS", "load/store instructions completed"},
    });
}

std::string VersionTag::to_string() const {
    std::string text = role == VersionRole::Old ? "old" : "new";
    if (!label.empty()) {
        text += ":" + label;
    }
    return text;
}

VersionTag VersionTag::parse(std::string_view text) {
    VersionTag tag;
    std::string_view head = text;
    auto colon = text.find(':');
    if (colon != std::string_view::npos) {
        head = text.substr(0, colon);
        tag.label = std::string(text.substr(colon + 1));
    }
    if (head == "old") {
        tag.role = VersionRole::Old;
    } else if (head == "new") {
        tag.role = VersionRole::New;
    } else {
        throw DataError("version tag must start with 'old' or 'new', got '" + std::string(text) + "'");
    }
    return tag;
}

void ProfileSet::rebuild_run_index() {
    run_index.clear();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        run_index[samples[i].run_id].push_back(i);
    }
}

std::vector<std::string> ProfileSet::functions() const {
    std::set<std::string> names;
    for (const auto& sample : samples) {
        names.insert(sample.function);
    }
    return {names.begin(), names.end()};
}

std::vector<std::size_t> ProfileSet::sample_indices_of(std::string_view function) const {
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].function == function) {
            indices.push_back(i);
        }
    }
    return indices;
}

bool ProfileSet::all_normalized() const {
    return std::all_of(samples.begin(), samples.end(),
                       [](const HpcSample& s) { return s.normalized; });
}

bool ProfileSet::all_raw() const {
    return std::all_of(samples.begin(), samples.end(),
                       [](const HpcSample& s) { return !s.normalized; });
}

std::string to_string(DefectType type) {
    switch (type) {
    case DefectType::TrueSharing: return "true-sharing";
    case DefectType::FalseSharing: return "false-sharing";
    case DefectType::NumaLatency: return "numa-latency";
    case DefectType::CacheContention: return "cache-contention";
    case DefectType::Unknown: return "unknown";
    }
    return "unknown";
}

DefectType parse_defect_type(std::string_view text) {
    if (text == "true-sharing") return DefectType::TrueSharing;
    if (text == "false-sharing") return DefectType::FalseSharing;
    if (text == "numa-latency") return DefectType::NumaLatency;
    if (text == "cache-contention") return DefectType::CacheContention;
    if (text == "unknown") return DefectType::Unknown;
    throw ConfigError("unknown defect type: '" + std::string(text) + "'");
}

std::vector<Violation> validate_profile_set(const ProfileSet& set) {
    std::vector<Violation> report;
    const std::size_t dim = set.counter_spec.dimension();

    if (dim == 0) {
        report.push_back({std::nullopt, "counter spec is empty"});
    }

    for (std::size_t i = 0; i < set.samples.size(); ++i) {
        const HpcSample& sample = set.samples[i];
        if (sample.values.size() != dim) {
            report.push_back({i, "sample has " + std::to_string(sample.values.size()) +
                                     " values, counter spec defines " + std::to_string(dim)});
        }
        if (sample.instruction_count == 0) {
            report.push_back({i, "instruction count must be positive"});
        }
        if (sample.thread_count < 1) {
            report.push_back({i, "thread count must be at least 1"});
        }
        for (std::size_t j = 0; j < sample.values.size(); ++j) {
            const double v = sample.values[j];
            if (!std::isfinite(v)) {
                report.push_back({i, "value " + std::to_string(j) + " is not finite"});
            } else if (v < 0.0) {
                report.push_back({i, "value " + std::to_string(j) + " is negative"});
            }
        }
    }

    // run_index must partition the sample list: every index exactly once,
    // each under the run_id of its sample.
    std::vector<int> seen(set.samples.size(), 0);
    for (const auto& [run_id, indices] : set.run_index) {
        for (std::size_t idx : indices) {
            if (idx >= set.samples.size()) {
                report.push_back({std::nullopt, "run '" + run_id + "' references sample index " +
                                                    std::to_string(idx) + " out of range"});
                continue;
            }
            if (set.samples[idx].run_id != run_id) {
                report.push_back({idx, "indexed under run '" + run_id + "' but belongs to run '" +
                                           set.samples[idx].run_id + "'"});
            }
            if (++seen[idx] > 1) {
                report.push_back({idx, "sample appears in the run index more than once"});
            }
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i] == 0) {
            report.push_back({i, "sample missing from the run index"});
        }
    }

    return report;
}

} // namespace perfdiag
