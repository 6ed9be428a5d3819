#pragma once

#include <string>
#include <vector>

#include "perfdiag/ingest.hpp"
#include "perfdiag/pipeline.hpp"
#include "perfdiag/rootcause.hpp"

namespace perfdiag {

// Effective configuration of one CLI invocation: defaults, overridden by
// the config file, overridden by flags.
struct CliConfig {
    PipelineConfig pipeline;
    CounterSpec counter_spec = CounterSpec::reference();
    DefectMapping defect_mapping = DefectMapping::defaults();
    ProfileFormat format = ProfileFormat::Csv;
    std::string out_dir = ".";
};

// Flat `key = value` config file; '#' starts a comment. Unknown keys are
// errors. counter_spec/defect_mapping values are paths resolved relative
// to the config file.
CliConfig load_cli_config(const std::string& path);

// `NAME description...` per line.
CounterSpec load_counter_spec(const std::string& path);

// `PATTERN => defect-type` per line, ordered, first match wins.
DefectMapping load_defect_mapping(const std::string& path);

// Exit codes: 0 clean / no regression, 1 regression detected, 2 data
// error, 3 config error, 4 internal error.
int cli_run(const std::vector<std::string>& args);
int cli_run(int argc, const char* const* argv);

} // namespace perfdiag
