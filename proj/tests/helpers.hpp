#pragma once

#include <string>
#include <vector>

#include "perfdiag/profile.hpp"

namespace helpers {

inline perfdiag::CounterSpec spec_of(const std::vector<std::string>& names) {
    std::vector<perfdiag::Counter> counters;
    for (const auto& name : names) {
        counters.push_back({name, ""});
    }
    return perfdiag::CounterSpec(counters);
}

inline perfdiag::HpcSample sample(std::string function, std::string run_id, int threads,
                                  std::uint64_t instructions, std::vector<double> values,
                                  bool normalized = false) {
    perfdiag::HpcSample s;
    s.function = std::move(function);
    s.run_id = std::move(run_id);
    s.thread_count = threads;
    s.instruction_count = instructions;
    s.values = std::move(values);
    s.normalized = normalized;
    return s;
}

inline perfdiag::ProfileSet set_of(perfdiag::CounterSpec spec,
                                   std::vector<perfdiag::HpcSample> samples,
                                   std::string program = "prog") {
    perfdiag::ProfileSet set;
    set.program = std::move(program);
    set.version = {perfdiag::VersionRole::Old, "v1"};
    set.counter_spec = std::move(spec);
    set.samples = std::move(samples);
    set.rebuild_run_index();
    return set;
}

} // namespace helpers
