#include "perfdiag/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "perfdiag/errors.hpp"

namespace perfdiag {

namespace {

// Raw counts above 2^53 would lose precision in the double-valued sample
// vector, so the parser refuses them.
constexpr std::uint64_t kMaxExactCount = 1ull << 53;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string trim(const std::string& text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return {};
    }
    auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

std::uint64_t parse_count(const std::string& text, std::size_t line_no, const std::string& field) {
    const std::string value = trim(text);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw DataError("line " + std::to_string(line_no) + ": field '" + field +
                        "' is not a non-negative integer: '" + value + "'");
    }
    if (out > kMaxExactCount) {
        throw DataError("line " + std::to_string(line_no) + ": field '" + field +
                        "' exceeds the exactly representable range: '" + value + "'");
    }
    return out;
}

void check_fixed_fields(const HpcSample& sample, std::size_t line_no) {
    if (sample.thread_count < 1) {
        throw DataError("line " + std::to_string(line_no) + ": field 'threads' must be >= 1");
    }
    if (sample.instruction_count == 0) {
        throw DataError("line " + std::to_string(line_no) + ": field 'instructions' must be >= 1");
    }
}

// Full-precision decimal encoding; round-trips any finite double.
std::string format_real(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

void warn(std::vector<std::string>* warnings, std::string message) {
    if (warnings != nullptr) {
        warnings->push_back(std::move(message));
    }
}

ProfileSet parse_csv(std::istream& source, const CounterSpec& spec,
                     std::vector<std::string>* warnings) {
    ProfileSet set;
    set.counter_spec = spec;

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    // counter column -> counter index, or npos for ignored extras
    std::vector<std::size_t> counter_columns;

    while (std::getline(source, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') {
            continue;
        }
        auto fields = split_csv_line(trimmed);

        if (!header_seen) {
            static const std::vector<std::string> kFixed = {"program", "version", "function",
                                                            "run_id", "threads", "instructions"};
            if (fields.size() < kFixed.size()) {
                throw DataError("line " + std::to_string(line_no) + ": header has " +
                                std::to_string(fields.size()) + " columns, expected at least " +
                                std::to_string(kFixed.size()));
            }
            for (std::size_t i = 0; i < kFixed.size(); ++i) {
                if (trim(fields[i]) != kFixed[i]) {
                    throw DataError("line " + std::to_string(line_no) + ": header column " +
                                    std::to_string(i + 1) + " must be '" + kFixed[i] + "', got '" +
                                    trim(fields[i]) + "'");
                }
            }
            std::vector<bool> found(spec.dimension(), false);
            for (std::size_t i = kFixed.size(); i < fields.size(); ++i) {
                const std::string name = trim(fields[i]);
                if (auto idx = spec.index_of(name)) {
                    counter_columns.push_back(*idx);
                    found[*idx] = true;
                } else {
                    counter_columns.push_back(std::string::npos);
                    warn(warnings, "ignoring counter column '" + name + "' not in the spec");
                }
            }
            for (std::size_t j = 0; j < spec.dimension(); ++j) {
                if (!found[j]) {
                    throw DataError("missing required counter column: " + spec.at(j).name);
                }
            }
            header_seen = true;
            continue;
        }

        if (fields.size() != 6 + counter_columns.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(6 + counter_columns.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }

        HpcSample sample;
        sample.function = trim(fields[2]);
        sample.run_id = trim(fields[3]);
        sample.thread_count = static_cast<int>(parse_count(fields[4], line_no, "threads"));
        sample.instruction_count = parse_count(fields[5], line_no, "instructions");
        check_fixed_fields(sample, line_no);
        sample.normalized = false;
        sample.values.assign(spec.dimension(), 0.0);
        for (std::size_t i = 0; i < counter_columns.size(); ++i) {
            if (counter_columns[i] == std::string::npos) {
                continue;
            }
            const std::string& name = spec.at(counter_columns[i]).name;
            sample.values[counter_columns[i]] =
                static_cast<double>(parse_count(fields[6 + i], line_no, name));
        }

        if (set.samples.empty()) {
            set.program = trim(fields[0]);
            set.version = VersionTag::parse(trim(fields[1]));
        }
        set.samples.push_back(std::move(sample));
    }

    if (!header_seen) {
        throw DataError("no samples: input has no header row");
    }
    if (set.samples.empty()) {
        throw DataError("no samples");
    }
    set.rebuild_run_index();
    return set;
}

ProfileSet parse_jsonl(std::istream& source, const CounterSpec& spec,
                       std::vector<std::string>* warnings) {
    ProfileSet set;
    set.counter_spec = spec;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') {
            continue;
        }
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(trimmed);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }

        HpcSample sample;
        try {
            sample.function = record.at("function").get<std::string>();
            sample.run_id = record.at("run_id").get<std::string>();
            sample.thread_count = record.at("threads").get<int>();
            sample.instruction_count = record.at("instructions").get<std::uint64_t>();
            const auto& counters = record.at("counters");
            sample.values.assign(spec.dimension(), 0.0);
            for (std::size_t j = 0; j < spec.dimension(); ++j) {
                const std::string& name = spec.at(j).name;
                if (!counters.contains(name)) {
                    throw DataError("line " + std::to_string(line_no) +
                                    ": missing required counter: " + name);
                }
                const auto& value = counters.at(name);
                if (!value.is_number_unsigned()) {
                    throw DataError("line " + std::to_string(line_no) + ": counter '" + name +
                                    "' is not a non-negative integer count");
                }
                const std::uint64_t v = value.get<std::uint64_t>();
                if (v > kMaxExactCount) {
                    throw DataError("line " + std::to_string(line_no) + ": counter '" + name +
                                    "' exceeds the exactly representable range");
                }
                sample.values[j] = static_cast<double>(v);
            }
            for (const auto& [key, unused] : counters.items()) {
                if (!spec.index_of(key)) {
                    warn(warnings, "line " + std::to_string(line_no) + ": ignoring counter '" +
                                       key + "' not in the spec");
                }
            }
            if (set.samples.empty()) {
                set.program = record.at("program").get<std::string>();
                set.version = VersionTag::parse(record.at("version").get<std::string>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        check_fixed_fields(sample, line_no);
        sample.normalized = false;
        set.samples.push_back(std::move(sample));
    }

    if (set.samples.empty()) {
        throw DataError("no samples");
    }
    set.rebuild_run_index();
    return set;
}

} // namespace

ProfileFormat parse_profile_format(std::string_view text) {
    if (text == "csv") return ProfileFormat::Csv;
    if (text == "jsonl") return ProfileFormat::Jsonl;
    throw ConfigError("unknown profile format: '" + std::string(text) + "' (expected csv or jsonl)");
}

ProfileSet parse_profiles(std::istream& source, ProfileFormat format, const CounterSpec& spec,
                          std::vector<std::string>* warnings) {
    return format == ProfileFormat::Csv ? parse_csv(source, spec, warnings)
                                        : parse_jsonl(source, spec, warnings);
}

ProfileSet parse_perf_stat(std::istream& source, const CounterSpec& spec, const PerfStatMeta& meta) {
    ProfileSet set;
    set.counter_spec = spec;
    set.program = meta.program;
    set.version = meta.version;

    HpcSample sample;
    sample.function = meta.function;
    sample.run_id = meta.run_id;
    sample.thread_count = meta.thread_count;
    sample.instruction_count = meta.instruction_count;
    sample.normalized = false;
    sample.values.assign(spec.dimension(), 0.0);

    std::vector<bool> seen(spec.dimension(), false);
    std::uint64_t stream_instructions = 0;
    std::size_t event_lines = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') {
            continue;
        }
        auto fields = split_csv_line(trimmed);
        if (fields.size() < 3) {
            continue; // not an event line
        }
        const std::string value_text = trim(fields[0]);
        const std::string event = trim(fields[2]);
        if (event.empty()) {
            continue;
        }
        ++event_lines;

        if (event == "instructions" && value_text != "<not counted>" &&
            value_text != "<not supported>") {
            stream_instructions = parse_count(value_text, line_no, event);
        }

        auto idx = spec.index_of(event);
        if (!idx) {
            continue; // event outside the spec, ignored
        }
        if (value_text == "<not counted>" || value_text == "<not supported>") {
            throw DataError("line " + std::to_string(line_no) + ": event '" + event + "' was " +
                            value_text);
        }
        sample.values[*idx] = static_cast<double>(parse_count(value_text, line_no, event));
        seen[*idx] = true;
    }

    if (event_lines == 0) {
        throw DataError("no samples: input has no recognizable event lines");
    }
    for (std::size_t j = 0; j < spec.dimension(); ++j) {
        if (!seen[j]) {
            throw DataError("missing required event: " + spec.at(j).name);
        }
    }
    if (sample.instruction_count == 0) {
        if (stream_instructions == 0) {
            throw DataError("instruction count unavailable: not in metadata and no "
                            "'instructions' event in the stream");
        }
        sample.instruction_count = stream_instructions;
    }
    if (sample.thread_count < 1) {
        throw DataError("thread count must be >= 1");
    }

    set.samples.push_back(std::move(sample));
    set.rebuild_run_index();
    return set;
}

ProfileSet normalize(const ProfileSet& set) {
    if (!set.all_raw()) {
        throw DataError("double normalization: the set is already normalized");
    }
    ProfileSet out = set;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        HpcSample& sample = out.samples[i];
        if (sample.instruction_count == 0) {
            throw DataError("sample " + std::to_string(i) + " (function '" + sample.function +
                            "', run '" + sample.run_id + "') has instruction count 0");
        }
        if (sample.thread_count < 1) {
            throw DataError("sample " + std::to_string(i) + " (function '" + sample.function +
                            "', run '" + sample.run_id + "') has thread count < 1");
        }
        const double scale = static_cast<double>(sample.instruction_count) *
                             static_cast<double>(sample.thread_count);
        for (double& v : sample.values) {
            v /= scale;
        }
        sample.normalized = true;
    }
    return out;
}

void write_profiles(std::ostream& sink, const ProfileSet& set, ProfileFormat format) {
    const std::string version = set.version.to_string();
    if (format == ProfileFormat::Csv) {
        sink << "program,version,function,run_id,threads,instructions";
        for (const auto& counter : set.counter_spec.counters()) {
            sink << ',' << counter.name;
        }
        sink << '\n';
        for (const auto& sample : set.samples) {
            sink << set.program << ',' << version << ',' << sample.function << ','
                 << sample.run_id << ',' << sample.thread_count << ',' << sample.instruction_count;
            for (double v : sample.values) {
                if (sample.normalized) {
                    sink << ',' << format_real(v);
                } else {
                    sink << ',' << static_cast<std::uint64_t>(v);
                }
            }
            sink << '\n';
        }
    } else {
        for (const auto& sample : set.samples) {
            nlohmann::json record;
            record["program"] = set.program;
            record["version"] = version;
            record["function"] = sample.function;
            record["run_id"] = sample.run_id;
            record["threads"] = sample.thread_count;
            record["instructions"] = sample.instruction_count;
            nlohmann::json counters;
            for (std::size_t j = 0; j < sample.values.size(); ++j) {
                if (sample.normalized) {
                    counters[set.counter_spec.at(j).name] = sample.values[j];
                } else {
                    counters[set.counter_spec.at(j).name] =
                        static_cast<std::uint64_t>(sample.values[j]);
                }
            }
            record["counters"] = std::move(counters);
            sink << record.dump() << '\n';
        }
    }
}

} // namespace perfdiag
