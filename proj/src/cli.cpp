#include "perfdiag/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "perfdiag/errors.hpp"
#include "perfdiag/report.hpp"
#include "perfdiag/synthgen.hpp"

namespace perfdiag {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string trim(const std::string& text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return {};
    }
    auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

std::string read_text_file(const std::string& path, bool config_side) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        const std::string message = "cannot open file: " + path;
        if (config_side) {
            throw ConfigError(message);
        }
        throw DataError(message);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// temp file + rename so readers never observe a partial document
void atomic_write(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write file: " + temp.string());
        }
        out << content;
        if (!out.good()) {
            throw DataError("write failed: " + temp.string());
        }
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        throw DataError("cannot rename " + temp.string() + " to " + path + ": " + ec.message());
    }
}

ProfileFormat format_for_path(const std::string& path, ProfileFormat fallback) {
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
        return ProfileFormat::Jsonl;
    }
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        return ProfileFormat::Csv;
    }
    return fallback;
}

ProfileSet load_profiles(const std::string& path, ProfileFormat fallback, const CounterSpec& spec) {
    const std::string text = read_text_file(path, false);
    std::istringstream stream(text);
    std::vector<std::string> warnings;
    ProfileSet set = parse_profiles(stream, format_for_path(path, fallback), spec, &warnings);
    for (const auto& warning : warnings) {
        std::cerr << "warning: " << path << ": " << warning << '\n';
    }
    return set;
}

std::map<std::string, bool> load_labels(const std::string& path) {
    const std::string text = read_text_file(path, false);
    std::map<std::string, bool> labels;
    if (!text.empty() && text.front() == '{') {
        // injection manifest document
        json manifest;
        try {
            manifest = json::parse(text);
            for (const auto& [run_id, anomalous] : manifest.at("run_labels").items()) {
                labels[run_id] = anomalous.get<bool>();
            }
        } catch (const json::exception& e) {
            throw DataError(path + ": not a valid manifest: " + e.what());
        }
        return labels;
    }
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#' || trimmed == "run_id,label") {
            continue;
        }
        const auto comma = trimmed.find(',');
        if (comma == std::string::npos) {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": expected 'run_id,label'");
        }
        const std::string run_id = trim(trimmed.substr(0, comma));
        const std::string label = trim(trimmed.substr(comma + 1));
        if (label == "normal") {
            labels[run_id] = false;
        } else if (label == "anomalous") {
            labels[run_id] = true;
        } else {
            throw DataError(path + ": line " + std::to_string(line_no) + ": unknown label '" +
                            label + "' (expected normal or anomalous)");
        }
    }
    if (labels.empty()) {
        throw DataError(path + ": no labels found");
    }
    return labels;
}

CounterDistribution distribution_from_json(const json& j, const std::string& where) {
    CounterDistribution dist;
    try {
        const std::string family = j.value("family", std::string{"lognormal"});
        if (family == "lognormal") {
            dist.family = MarginalFamily::LogNormal;
        } else if (family == "normal") {
            dist.family = MarginalFamily::Normal;
        } else {
            throw ConfigError(where + ": field 'family' must be lognormal or normal");
        }
        dist.mean = j.at("mean").get<double>();
        dist.spread = j.at("spread").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return dist;
}

WorkloadSpec load_workload(const std::string& source, const CounterSpec& spec,
                           std::uint64_t default_seed) {
    if (source.rfind("preset:", 0) == 0) {
        return preset_workload(source.substr(7), spec, default_seed);
    }
    json j;
    try {
        j = json::parse(read_text_file(source, true));
    } catch (const json::exception& e) {
        throw ConfigError(source + ": invalid JSON: " + e.what());
    }

    WorkloadSpec workload;
    workload.counter_spec = spec;
    workload.seed = default_seed;
    try {
        workload.program = j.value("program", std::string{"synthetic"});
        workload.runs = j.value("runs", 20);
        workload.samples_per_run = j.value("samples_per_run", 10);
        if (j.contains("thread_counts")) {
            workload.thread_counts = j.at("thread_counts").get<std::vector<int>>();
        }
        if (j.contains("seed")) {
            workload.seed = j.at("seed").get<std::uint64_t>();
        }
        for (const auto& fj : j.at("functions")) {
            FunctionModel fn;
            fn.name = fj.at("name").get<std::string>();
            fn.instructions_mean = fj.value("instructions_mean", 1e6);
            fn.instructions_jitter = fj.value("instructions_jitter", 0.02);
            const auto& counters = fj.at("counters");
            const std::string where = source + ": function '" + fn.name + "'";
            fn.counters.resize(spec.dimension());
            if (!counters.contains("*")) {
                for (std::size_t i = 0; i < spec.dimension(); ++i) {
                    if (!counters.contains(spec.at(i).name)) {
                        throw ConfigError(where + ": field 'counters' must name '" +
                                          spec.at(i).name + "' or provide a '*' default");
                    }
                }
            }
            for (std::size_t i = 0; i < spec.dimension(); ++i) {
                const std::string& name = spec.at(i).name;
                const json& entry = counters.contains(name) ? counters.at(name) : counters.at("*");
                fn.counters[i] = distribution_from_json(entry, where + " counter '" + name + "'");
            }
            if (fj.contains("factor_loadings")) {
                fn.factor_loadings =
                    fj.at("factor_loadings").get<std::vector<std::vector<double>>>();
            }
            workload.functions.push_back(std::move(fn));
        }
    } catch (const json::exception& e) {
        throw ConfigError(source + ": " + e.what());
    }
    workload.validate();
    return workload;
}

DefectSpec load_defect(const std::string& source) {
    if (source.rfind("preset:", 0) == 0) {
        return preset_defect(source.substr(7));
    }
    json j;
    try {
        j = json::parse(read_text_file(source, true));
    } catch (const json::exception& e) {
        throw ConfigError(source + ": invalid JSON: " + e.what());
    }
    DefectSpec defect;
    try {
        defect.defect = parse_defect_type(j.value("defect", std::string{"unknown"}));
        for (const auto& tj : j.at("targets")) {
            DefectTarget target;
            target.counter = tj.at("counter").get<std::string>();
            target.factor = tj.value("factor", 1.0);
            target.offset_stds = tj.value("offset_stds", 0.0);
            defect.targets.push_back(std::move(target));
        }
        if (j.contains("affected_functions")) {
            defect.affected_functions =
                j.at("affected_functions").get<std::vector<std::string>>();
        }
        defect.affected_fraction = j.value("affected_fraction", 1.0);
    } catch (const json::exception& e) {
        throw ConfigError(source + ": " + e.what());
    }
    defect.validate();
    return defect;
}

// flag values that override config-file values when present
struct SharedFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> t;
    std::optional<double> rho;
    std::optional<int> k;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

void add_shared_flags(CLI::App* cmd, SharedFlags& flags) {
    cmd->add_option("--config", flags.config_path, "config file (flat key = value)");
    cmd->add_option("--seed", flags.seed, "seed for training, clustering and generation");
    cmd->add_option("--t", flags.t, "threshold multiplier gamma = mu + t*sigma");
    cmd->add_option("--rho", flags.rho, "anomalous sample fraction for a run verdict, in (0,1]");
    cmd->add_option("--k", flags.k, "cluster count (0 = min(4, #functions))");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--format", flags.format, "profile file format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
}

CliConfig effective_config(const SharedFlags& flags) {
    CliConfig config;
    if (!flags.config_path.empty()) {
        config = load_cli_config(flags.config_path);
    }
    if (flags.seed) config.pipeline.train.seed = *flags.seed;
    if (flags.t) config.pipeline.t = *flags.t;
    if (flags.rho) config.pipeline.rho = *flags.rho;
    if (flags.k) config.pipeline.k = *flags.k;
    if (flags.out) config.out_dir = *flags.out;
    if (flags.format) config.format = parse_profile_format(*flags.format);

    if (!(config.pipeline.t >= 0.0)) {
        throw ConfigError("t must be >= 0");
    }
    if (!(config.pipeline.rho > 0.0) || config.pipeline.rho > 1.0) {
        throw ConfigError("rho must be in (0, 1]");
    }
    if (config.pipeline.k < 0) {
        throw ConfigError("k must be >= 0");
    }
    config.pipeline.train.validate();
    return config;
}

std::string profiles_text(const ProfileSet& set, ProfileFormat format) {
    std::ostringstream out;
    write_profiles(out, set, format);
    return out.str();
}

int cmd_simulate(const SharedFlags& flags, const std::string& workload_path,
                 const std::string& defect_path) {
    const CliConfig config = effective_config(flags);
    WorkloadSpec workload =
        load_workload(workload_path, config.counter_spec, config.pipeline.train.seed);
    if (flags.seed) {
        workload.seed = *flags.seed;
    }
    workload.version = {VersionRole::Old, "baseline"};

    const std::string extension = config.format == ProfileFormat::Csv ? ".csv" : ".jsonl";
    const fs::path out_dir(config.out_dir);

    const ProfileSet old_set = generate(workload);
    const std::string old_path = (out_dir / ("old" + extension)).string();
    atomic_write(old_path, profiles_text(old_set, config.format));
    std::cout << "wrote " << old_path << " (" << old_set.samples.size() << " samples, "
              << old_set.run_index.size() << " runs)\n";

    if (!defect_path.empty()) {
        const DefectSpec defect = load_defect(defect_path);
        WorkloadSpec new_workload = workload;
        new_workload.seed = workload.seed + 1;
        new_workload.version = {VersionRole::New, "candidate"};
        const ProfileSet new_base = generate(new_workload);
        auto [injected, manifest] = inject(new_base, defect, workload.seed + 2);

        const std::string new_path = (out_dir / ("new" + extension)).string();
        atomic_write(new_path, profiles_text(injected, config.format));

        json manifest_json;
        manifest_json["format"] = "perfdiag-manifest";
        json defect_json;
        defect_json["defect"] = to_string(manifest.spec.defect);
        json targets = json::array();
        for (const auto& target : manifest.spec.targets) {
            targets.push_back({{"counter", target.counter},
                               {"factor", target.factor},
                               {"offset_stds", target.offset_stds}});
        }
        defect_json["targets"] = std::move(targets);
        defect_json["affected_functions"] = manifest.spec.affected_functions;
        defect_json["affected_fraction"] = manifest.spec.affected_fraction;
        manifest_json["defect"] = std::move(defect_json);
        manifest_json["sample_indices"] = manifest.sample_indices;
        manifest_json["run_labels"] = manifest.run_labels;

        const std::string manifest_path = (out_dir / "manifest.json").string();
        atomic_write(manifest_path, manifest_json.dump(2) + "\n");
        std::cout << "wrote " << new_path << " (" << manifest.sample_indices.size()
                  << " perturbed samples)\nwrote " << manifest_path << '\n';
    }
    return 0;
}

int cmd_train(const SharedFlags& flags, const std::string& profiles_path,
              const std::string& bundle_path, const std::string& functions_csv) {
    const CliConfig config = effective_config(flags);
    const ProfileSet profiles = load_profiles(profiles_path, config.format, config.counter_spec);

    std::vector<std::string> functions;
    if (!functions_csv.empty()) {
        std::stringstream ss(functions_csv);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (!trim(name).empty()) {
                functions.push_back(trim(name));
            }
        }
    }

    const ModelBundle bundle = train_pipeline(profiles, functions, config.pipeline);
    std::ostringstream sink;
    save_bundle(bundle, sink);
    atomic_write(bundle_path, sink.str());

    std::cout << "trained " << bundle.models.size() << " model(s) over "
              << bundle.clusters.function_assignment.size() << " function(s); bundle written to "
              << bundle_path << '\n';
    for (std::size_t c = 0; c < bundle.thresholds.size(); ++c) {
        const auto& threshold = bundle.thresholds[c];
        std::cout << "  cluster " << c << ": mu=" << threshold.mu << " sigma=" << threshold.sigma
                  << " gamma(t=" << threshold.t << ")=" << threshold.gamma << '\n';
    }
    return 0;
}

int run_detection(const CliConfig& config, const SharedFlags& flags, const ModelBundle& bundle,
                  const ProfileSet& new_profiles, const std::string& labels_path,
                  const std::string& report_path) {
    DetectOptions options;
    if (flags.t) options.t = *flags.t;
    if (flags.rho) options.rho = *flags.rho;
    options.defect_mapping = &config.defect_mapping;
    std::map<std::string, bool> truth;
    if (!labels_path.empty()) {
        truth = load_labels(labels_path);
        options.truth = &truth;
    }

    const DiagnosisReport report = detect_pipeline(bundle, new_profiles, options);
    const json document = report_to_json(report);
    if (!report_path.empty()) {
        atomic_write(report_path, document.dump(2) + "\n");
    }
    render_report_table(document, std::cout);
    return report.regression_detected ? 1 : 0;
}

int cmd_detect(const SharedFlags& flags, const std::string& bundle_path,
               const std::string& profiles_path, const std::string& labels_path,
               const std::string& report_path) {
    const CliConfig config = effective_config(flags);
    std::istringstream bundle_stream(read_text_file(bundle_path, false));
    const ModelBundle bundle = load_bundle(bundle_stream);
    const ProfileSet new_profiles =
        load_profiles(profiles_path, config.format, bundle.counter_spec);
    return run_detection(config, flags, bundle, new_profiles, labels_path, report_path);
}

int cmd_diagnose(const SharedFlags& flags, const std::string& old_path,
                 const std::string& new_path, const std::string& labels_path,
                 const std::string& report_path, const std::string& functions_csv) {
    const CliConfig config = effective_config(flags);
    const ProfileSet old_profiles = load_profiles(old_path, config.format, config.counter_spec);
    const ProfileSet new_profiles = load_profiles(new_path, config.format, config.counter_spec);

    std::vector<std::string> functions;
    if (!functions_csv.empty()) {
        std::stringstream ss(functions_csv);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (!trim(name).empty()) {
                functions.push_back(trim(name));
            }
        }
    } else {
        // changed-function set defaults to the functions present in both
        const auto old_functions = old_profiles.functions();
        for (const auto& fn : new_profiles.functions()) {
            if (std::binary_search(old_functions.begin(), old_functions.end(), fn)) {
                functions.push_back(fn);
            }
        }
        if (functions.empty()) {
            throw DataError("the two profile sets share no functions");
        }
    }

    const ModelBundle bundle = train_pipeline(old_profiles, functions, config.pipeline);
    return run_detection(config, flags, bundle, new_profiles, labels_path, report_path);
}

int cmd_report(const std::string& report_path) {
    json document;
    try {
        document = json::parse(read_text_file(report_path, false));
    } catch (const json::exception& e) {
        throw DataError(report_path + ": invalid report document: " + e.what());
    }
    if (document.value("format", std::string{}) != "perfdiag-report") {
        throw DataError(report_path + ": not a report document");
    }
    render_report_table(document, std::cout);
    return 0;
}

} // namespace

CliConfig load_cli_config(const std::string& path) {
    const std::string text = read_text_file(path, true);
    const fs::path base = fs::path(path).parent_path();

    CliConfig config;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') {
            continue;
        }
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ": line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        try {
            if (key == "t") {
                config.pipeline.t = std::stod(value);
            } else if (key == "rho") {
                config.pipeline.rho = std::stod(value);
            } else if (key == "k") {
                config.pipeline.k = std::stoi(value);
            } else if (key == "seed") {
                config.pipeline.train.seed = std::stoull(value);
            } else if (key == "epochs") {
                config.pipeline.train.epochs = std::stoi(value);
            } else if (key == "batch_size") {
                config.pipeline.train.batch_size = std::stoi(value);
            } else if (key == "learning_rate") {
                config.pipeline.train.learning_rate = std::stod(value);
            } else if (key == "optimizer") {
                config.pipeline.train.optimizer = parse_optimizer(value);
            } else if (key == "early_stop_patience") {
                config.pipeline.train.early_stop_patience = std::stoi(value);
            } else if (key == "validation_fraction") {
                config.pipeline.train.validation_fraction = std::stod(value);
            } else if (key == "min_samples_per_function") {
                config.pipeline.min_samples_per_function = std::stoi(value);
            } else if (key == "fallback_routing") {
                config.pipeline.fallback_routing = value == "true" || value == "1";
            } else if (key == "perf_gate_warn_fraction") {
                config.pipeline.perf_gate_warn_fraction = std::stod(value);
            } else if (key == "counter_spec") {
                config.counter_spec = load_counter_spec((base / value).string());
            } else if (key == "defect_mapping") {
                config.defect_mapping = load_defect_mapping((base / value).string());
            } else if (key == "format") {
                config.format = parse_profile_format(value);
            } else if (key == "out") {
                config.out_dir = (base / value).string();
            } else {
                throw ConfigError(path + ": line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError(path + ": line " + std::to_string(line_no) + ": bad value for '" +
                              key + "': '" + value + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError(path + ": line " + std::to_string(line_no) + ": value for '" + key +
                              "' out of range");
        }
    }
    return config;
}

CounterSpec load_counter_spec(const std::string& path) {
    const std::string text = read_text_file(path, true);
    std::istringstream stream(text);
    std::vector<Counter> counters;
    std::string line;
    while (std::getline(stream, line)) {
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') {
            continue;
        }
        const auto space = trimmed.find_first_of(" \t");
        Counter counter;
        if (space == std::string::npos) {
            counter.name = trimmed;
        } else {
            counter.name = trimmed.substr(0, space);
            counter.description = trim(trimmed.substr(space + 1));
        }
        counters.push_back(std::move(counter));
    }
    if (counters.empty()) {
        throw ConfigError(path + ": no counters defined");
    }
    try {
        return CounterSpec(std::move(counters));
    } catch (const DataError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

DefectMapping load_defect_mapping(const std::string& path) {
    const std::string text = read_text_file(path, true);
    std::istringstream stream(text);
    DefectMapping mapping;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') {
            continue;
        }
        const auto arrow = trimmed.find("=>");
        if (arrow == std::string::npos) {
            throw ConfigError(path + ": line " + std::to_string(line_no) +
                              ": expected 'PATTERN => defect-type'");
        }
        DefectRule rule;
        rule.pattern = trim(trimmed.substr(0, arrow));
        rule.type = parse_defect_type(trim(trimmed.substr(arrow + 2)));
        if (rule.pattern.empty()) {
            throw ConfigError(path + ": line " + std::to_string(line_no) + ": empty pattern");
        }
        mapping.rules.push_back(std::move(rule));
    }
    if (mapping.rules.empty()) {
        throw ConfigError(path + ": no rules defined");
    }
    return mapping;
}

int cli_run(const std::vector<std::string>& args) {
    CLI::App app{"diagnoses software performance regressions from hardware counter profiles"};
    app.require_subcommand(1);

    SharedFlags flags;

    auto* simulate = app.add_subcommand(
        "simulate", "generate synthetic profiles (and optionally inject a defect)");
    std::string workload_path;
    std::string defect_path;
    simulate->add_option("--workload", workload_path,
                         "workload spec JSON or preset:baseline / preset:seven-functions")
        ->required();
    simulate->add_option("--defect", defect_path,
                         "defect spec JSON or preset:true-sharing / preset:false-sharing / "
                         "preset:numa");
    add_shared_flags(simulate, flags);

    auto* train_cmd = app.add_subcommand("train", "train a model bundle from old-version profiles");
    std::string profiles_path;
    std::string bundle_path;
    std::string functions_csv;
    train_cmd->add_option("--profiles", profiles_path, "old-version profile file")->required();
    train_cmd->add_option("--bundle", bundle_path, "output bundle path")->required();
    train_cmd->add_option("--functions", functions_csv,
                          "comma-separated changed functions (default: all)");
    add_shared_flags(train_cmd, flags);

    auto* detect = app.add_subcommand("detect", "check new-version profiles against a bundle");
    std::string detect_bundle;
    std::string detect_profiles;
    std::string labels_path;
    std::string report_path;
    detect->add_option("--bundle", detect_bundle, "trained bundle path")->required();
    detect->add_option("--profiles", detect_profiles, "new-version profile file")->required();
    detect->add_option("--labels", labels_path,
                       "ground truth: manifest.json or CSV run_id,label");
    detect->add_option("--report", report_path, "write the machine-readable report here");
    add_shared_flags(detect, flags);

    auto* diagnose = app.add_subcommand("diagnose", "train on old profiles and detect in one shot");
    std::string old_path;
    std::string new_path;
    diagnose->add_option("--old", old_path, "old-version profile file")->required();
    diagnose->add_option("--new", new_path, "new-version profile file")->required();
    diagnose->add_option("--labels", labels_path, "ground truth labels");
    diagnose->add_option("--report", report_path, "write the machine-readable report here");
    diagnose->add_option("--functions", functions_csv,
                         "comma-separated changed functions (default: intersection)");
    add_shared_flags(diagnose, flags);

    auto* report_cmd = app.add_subcommand("report", "render a report document as a table");
    std::string report_in;
    report_cmd->add_option("--in", report_in, "report JSON path")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(flags, workload_path, defect_path);
        }
        if (train_cmd->parsed()) {
            return cmd_train(flags, profiles_path, bundle_path, functions_csv);
        }
        if (detect->parsed()) {
            return cmd_detect(flags, detect_bundle, detect_profiles, labels_path, report_path);
        }
        if (diagnose->parsed()) {
            return cmd_diagnose(flags, old_path, new_path, labels_path, report_path,
                                functions_csv);
        }
        if (report_cmd->parsed()) {
            return cmd_report(report_in);
        }
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}

int cli_run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return cli_run(args);
}

} // namespace perfdiag
