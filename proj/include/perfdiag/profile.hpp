#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace perfdiag {

// One named hardware event. The feature index of a counter is its position
// in the owning CounterSpec.
struct Counter {
    std::string name;
    std::string description;

    bool operator==(const Counter& other) const = default;
};

// Ordered set of counters read per sample. Names are unique; indices are
// the contiguous range 0..dimension()-1.
class CounterSpec {
public:
    CounterSpec() = default;
    explicit CounterSpec(std::vector<Counter> counters);

    std::size_t dimension() const { return counters_.size(); }
    const Counter& at(std::size_t index) const { return counters_.at(index); }
    const std::vector<Counter>& counters() const { return counters_; }
    std::optional<std::size_t> index_of(std::string_view name) const;

    bool operator==(const CounterSpec& other) const { return counters_ == other.counters_; }

    // The configuration this project ships with: 33 individualized counters.
    static CounterSpec reference();

private:
    std::vector<Counter> counters_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Which side of the comparison a profile set belongs to.
enum class VersionRole { Old, New };

struct VersionTag {
    VersionRole role = VersionRole::Old;
    std::string label; // free-form, e.g. "v5.5"

    std::string to_string() const;
    static VersionTag parse(std::string_view text);
    bool operator==(const VersionTag& other) const = default;
};

// One profiled execution of one function: the entry/exit differential of
// every counter in the governing CounterSpec. `values` holds raw integer
// counts until normalize() divides them by instructions * threads; the
// `normalized` flag makes the state explicit so the two cannot be mixed
// silently.
struct HpcSample {
    std::string function;
    std::string run_id;
    int thread_count = 1;
    std::uint64_t instruction_count = 0;
    std::vector<double> values;
    bool normalized = false;

    bool operator==(const HpcSample& other) const = default;
};

// A labeled collection of samples for one program version.
struct ProfileSet {
    std::string program;
    VersionTag version;
    CounterSpec counter_spec;
    std::vector<HpcSample> samples;
    // run_id -> indices into `samples`; partitions the sample list.
    std::map<std::string, std::vector<std::size_t>> run_index;

    void rebuild_run_index();
    // Sorted unique function names present in the set.
    std::vector<std::string> functions() const;
    std::vector<std::size_t> sample_indices_of(std::string_view function) const;
    bool all_normalized() const;
    bool all_raw() const;
};

enum class DefectType {
    TrueSharing,
    FalseSharing,
    NumaLatency,
    CacheContention, // TS/FS signature without enough signal to tell apart
    Unknown,
};

std::string to_string(DefectType type);
DefectType parse_defect_type(std::string_view text);

struct Violation {
    std::optional<std::size_t> sample_index;
    std::string reason;
};

// Checks every type invariant of the set and reports one entry per
// violation. Never throws; an empty report means the set is well formed.
std::vector<Violation> validate_profile_set(const ProfileSet& set);

} // namespace perfdiag
