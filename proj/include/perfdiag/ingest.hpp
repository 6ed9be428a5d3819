#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "perfdiag/profile.hpp"

namespace perfdiag {

enum class ProfileFormat { Csv, Jsonl };

ProfileFormat parse_profile_format(std::string_view text);

// Parses a CSV or JSONL profile stream into a raw ProfileSet.
//
// CSV: mandatory header `program,version,function,run_id,threads,
// instructions,<counter...>` with counters in spec order; `#` lines are
// comments. JSONL: one object per line with the same keys and the counter
// values nested under "counters". Counter keys may be a superset of the
// spec; extras are ignored with a warning appended to `warnings` when the
// caller provides one. Input order is preserved.
ProfileSet parse_profiles(std::istream& source, ProfileFormat format, const CounterSpec& spec,
                          std::vector<std::string>* warnings = nullptr);

// Run metadata for perf-stat ingestion; `perf stat` covers one program
// invocation, so the sample identity cannot come from the stream itself.
struct PerfStatMeta {
    std::string program;
    VersionTag version;
    std::string function;
    std::string run_id;
    int thread_count = 1;
    // 0 means "take it from the stream's instructions event".
    std::uint64_t instruction_count = 0;
};

// Adapter for the machine-readable output of `perf stat -x,`. Lines look
// like `<value>,<unit>,<event>,<run time>,<pct>,...`; events absent from
// the spec are ignored, `<not counted>` / `<not supported>` values for
// spec events are errors. Yields a single-sample raw ProfileSet.
ProfileSet parse_perf_stat(std::istream& source, const CounterSpec& spec, const PerfStatMeta& meta);

// Divides every counter value by instructions * threads, making samples
// comparable across input sizes and parallelism. Fails on sets that are
// already normalized.
ProfileSet normalize(const ProfileSet& set);

void write_profiles(std::ostream& sink, const ProfileSet& set, ProfileFormat format);

} // namespace perfdiag
