#include "perfdiag/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "perfdiag/errors.hpp"
#include "perfdiag/ingest.hpp"

namespace perfdiag {

namespace {

using nlohmann::json;

double mean_of_counter(const ProfileSet& normalized, std::size_t index) {
    double sum = 0.0;
    for (const auto& sample : normalized.samples) {
        sum += sample.values[index];
    }
    return normalized.samples.empty() ? 0.0 : sum / static_cast<double>(normalized.samples.size());
}

ProfileSet ensure_normalized(const ProfileSet& profiles) {
    if (profiles.all_normalized()) {
        return profiles;
    }
    if (profiles.all_raw()) {
        return normalize(profiles);
    }
    throw DataError("profile set mixes raw and normalized samples");
}

std::vector<double> mean_sample(const ProfileSet& set, const std::vector<std::size_t>& indices) {
    std::vector<double> mean(set.counter_spec.dimension(), 0.0);
    for (std::size_t i : indices) {
        for (std::size_t j = 0; j < mean.size(); ++j) {
            mean[j] += set.samples[i].values[j];
        }
    }
    for (double& v : mean) {
        v /= static_cast<double>(indices.size());
    }
    return mean;
}

// ---- bundle serialization ----

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

json scaler_to_json(const Scaler& scaler) {
    json j;
    j["mean"] = scaler.mean;
    j["stddev"] = scaler.stddev;
    j["constant"] = std::vector<int>(scaler.constant.begin(), scaler.constant.end());
    return j;
}

Scaler scaler_from_json(const json& j) {
    Scaler scaler;
    scaler.mean = j.at("mean").get<std::vector<double>>();
    scaler.stddev = j.at("stddev").get<std::vector<double>>();
    const auto flags = j.at("constant").get<std::vector<int>>();
    scaler.constant.assign(flags.begin(), flags.end());
    return scaler;
}

json config_to_json(const PipelineConfig& config) {
    json j;
    j["k"] = config.k;
    j["t"] = config.t;
    j["rho"] = config.rho;
    j["min_samples_per_function"] = config.min_samples_per_function;
    j["fallback_routing"] = config.fallback_routing;
    j["perf_gate_warn_fraction"] = config.perf_gate_warn_fraction;
    j["epochs"] = config.train.epochs;
    j["batch_size"] = config.train.batch_size;
    j["learning_rate"] = config.train.learning_rate;
    j["optimizer"] = to_string(config.train.optimizer);
    j["seed"] = config.train.seed;
    j["early_stop_patience"] = config.train.early_stop_patience;
    j["validation_fraction"] = config.train.validation_fraction;
    return j;
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig config;
    config.k = j.at("k").get<int>();
    config.t = j.at("t").get<double>();
    config.rho = j.at("rho").get<double>();
    config.min_samples_per_function = j.at("min_samples_per_function").get<int>();
    config.fallback_routing = j.at("fallback_routing").get<bool>();
    config.perf_gate_warn_fraction = j.at("perf_gate_warn_fraction").get<double>();
    config.train.epochs = j.at("epochs").get<int>();
    config.train.batch_size = j.at("batch_size").get<int>();
    config.train.learning_rate = j.at("learning_rate").get<double>();
    config.train.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    config.train.seed = j.at("seed").get<std::uint64_t>();
    config.train.early_stop_patience = j.at("early_stop_patience").get<int>();
    config.train.validation_fraction = j.at("validation_fraction").get<double>();
    return config;
}

json bundle_payload(const ModelBundle& bundle) {
    json payload;

    json counters = json::array();
    for (const auto& counter : bundle.counter_spec.counters()) {
        counters.push_back({{"name", counter.name}, {"description", counter.description}});
    }
    payload["counter_spec"] = std::move(counters);

    json cluster;
    cluster["k"] = bundle.clusters.k;
    cluster["seed"] = bundle.clusters.seed;
    cluster["inertia"] = bundle.clusters.inertia;
    cluster["scaler"] = scaler_to_json(bundle.clusters.scaler);
    cluster["centroids"] = bundle.clusters.centroids;
    cluster["assignment"] = bundle.clusters.function_assignment;
    payload["cluster"] = std::move(cluster);

    json models = json::array();
    for (const auto& model : bundle.models) {
        json m;
        m["layer_sizes"] = model.topology.layer_sizes;
        m["activation"] = to_string(model.topology.activation);
        m["weights"] = model.weights;
        m["biases"] = model.biases;
        m["scaler"] = scaler_to_json(model.scaler);
        m["seed"] = model.meta.seed;
        m["epochs_run"] = model.meta.epochs_run;
        m["initial_loss"] = model.meta.initial_loss;
        m["final_loss"] = model.meta.final_loss;
        models.push_back(std::move(m));
    }
    payload["models"] = std::move(models);

    json thresholds = json::array();
    for (const auto& threshold : bundle.thresholds) {
        thresholds.push_back({{"mu", threshold.mu}, {"sigma", threshold.sigma},
                              {"t", threshold.t}});
    }
    payload["thresholds"] = std::move(thresholds);

    payload["config"] = config_to_json(bundle.config);
    payload["training_mean_cycles"] = bundle.training_mean_cycles;
    return payload;
}

ModelBundle bundle_from_payload(const json& payload) {
    ModelBundle bundle;

    std::vector<Counter> counters;
    for (const auto& c : payload.at("counter_spec")) {
        counters.push_back({c.at("name").get<std::string>(),
                            c.value("description", std::string{})});
    }
    bundle.counter_spec = CounterSpec(std::move(counters));

    const auto& cluster = payload.at("cluster");
    bundle.clusters.k = cluster.at("k").get<std::size_t>();
    bundle.clusters.seed = cluster.at("seed").get<std::uint64_t>();
    bundle.clusters.inertia = cluster.at("inertia").get<double>();
    bundle.clusters.scaler = scaler_from_json(cluster.at("scaler"));
    bundle.clusters.centroids = cluster.at("centroids").get<std::vector<std::vector<double>>>();
    bundle.clusters.function_assignment =
        cluster.at("assignment").get<std::map<std::string, int>>();

    for (const auto& m : payload.at("models")) {
        AutoencoderModel model;
        model.topology.layer_sizes = m.at("layer_sizes").get<std::vector<std::size_t>>();
        model.topology.activation = parse_activation(m.at("activation").get<std::string>());
        model.weights = m.at("weights").get<std::vector<std::vector<double>>>();
        model.biases = m.at("biases").get<std::vector<std::vector<double>>>();
        model.scaler = scaler_from_json(m.at("scaler"));
        model.meta.seed = m.at("seed").get<std::uint64_t>();
        model.meta.epochs_run = m.at("epochs_run").get<int>();
        model.meta.initial_loss = m.at("initial_loss").get<double>();
        model.meta.final_loss = m.at("final_loss").get<double>();
        bundle.models.push_back(std::move(model));
    }

    for (const auto& th : payload.at("thresholds")) {
        Threshold threshold;
        threshold.mu = th.at("mu").get<double>();
        threshold.sigma = th.at("sigma").get<double>();
        threshold.t = th.at("t").get<double>();
        threshold.gamma = threshold.mu + threshold.t * threshold.sigma;
        bundle.thresholds.push_back(threshold);
    }

    bundle.config = config_from_json(payload.at("config"));
    bundle.training_mean_cycles = payload.at("training_mean_cycles").get<double>();
    return bundle;
}

} // namespace

ModelBundle train_pipeline(const ProfileSet& old_profiles,
                           const std::vector<std::string>& functions,
                           const PipelineConfig& config) {
    config.train.validate();
    if (old_profiles.samples.empty()) {
        throw DataError("no samples");
    }

    const ProfileSet normalized = ensure_normalized(old_profiles);

    std::vector<std::string> selected = functions;
    if (selected.empty()) {
        selected = normalized.functions();
    } else {
        std::sort(selected.begin(), selected.end());
        selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
    }

    // coverage check before any training starts
    std::map<std::string, std::vector<std::size_t>> per_function;
    for (const auto& fn : selected) {
        auto indices = normalized.sample_indices_of(fn);
        if (indices.size() < static_cast<std::size_t>(config.min_samples_per_function)) {
            throw DataError("function '" + fn + "' has " + std::to_string(indices.size()) +
                            " samples, fewer than the required " +
                            std::to_string(config.min_samples_per_function));
        }
        per_function[fn] = std::move(indices);
    }

    // samples of the selected functions, original order
    std::vector<std::size_t> pool;
    std::vector<std::string> pool_functions;
    const std::set<std::string> selected_set(selected.begin(), selected.end());
    for (std::size_t i = 0; i < normalized.samples.size(); ++i) {
        if (selected_set.count(normalized.samples[i].function) > 0) {
            pool.push_back(i);
            pool_functions.push_back(normalized.samples[i].function);
        }
    }

    const std::size_t k = config.k > 0
                              ? std::min<std::size_t>(static_cast<std::size_t>(config.k),
                                                      selected.size())
                              : std::min<std::size_t>(4, selected.size());

    ModelBundle bundle;
    bundle.counter_spec = normalized.counter_spec;
    bundle.config = config;

    std::vector<std::vector<double>> pool_values;
    pool_values.reserve(pool.size());
    for (std::size_t i : pool) {
        pool_values.push_back(normalized.samples[i].values);
    }

    bundle.clusters.k = k;
    bundle.clusters.seed = config.train.seed;
    bundle.clusters.scaler = fit_scaler(pool_values);
    if (k == 1) {
        // degenerate clustering: one centroid at the mean
        std::vector<std::vector<double>> standardized;
        standardized.reserve(pool_values.size());
        for (const auto& v : pool_values) {
            standardized.push_back(bundle.clusters.scaler.standardize(v));
        }
        const KmeansResult result = kmeans(standardized, 1, config.train.seed, 1, 1);
        bundle.clusters.centroids = result.centroids;
        bundle.clusters.inertia = result.inertia;
        for (const auto& fn : selected) {
            bundle.clusters.function_assignment[fn] = 0;
        }
    } else {
        std::vector<std::vector<double>> standardized;
        standardized.reserve(pool_values.size());
        for (const auto& v : pool_values) {
            standardized.push_back(bundle.clusters.scaler.standardize(v));
        }
        const KmeansResult result = kmeans(standardized, k, config.train.seed);
        bundle.clusters.centroids = result.centroids;
        bundle.clusters.inertia = result.inertia;
        bundle.clusters.function_assignment =
            assign_functions(pool_functions, result.assignment, selected);
    }

    // pooled per-cluster training sets, original sample order
    std::vector<std::vector<std::vector<double>>> cluster_samples(k);
    for (std::size_t p = 0; p < pool.size(); ++p) {
        const int cluster = bundle.clusters.function_assignment.at(pool_functions[p]);
        cluster_samples[static_cast<std::size_t>(cluster)].push_back(pool_values[p]);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (cluster_samples[c].empty()) {
            throw DataError("cluster " + std::to_string(c) +
                            " has no functions assigned; lower k or adjust the function set");
        }
    }

    const Topology topology = Topology::default_for(normalized.counter_spec.dimension());
    for (std::size_t c = 0; c < k; ++c) {
        TrainConfig cluster_cfg = config.train;
        cluster_cfg.seed = config.train.seed + c;
        AutoencoderModel model = train(cluster_samples[c], topology, cluster_cfg);

        std::vector<double> errors;
        errors.reserve(cluster_samples[c].size());
        for (const auto& sample : cluster_samples[c]) {
            errors.push_back(reconstruction_error(model, sample));
        }
        bundle.thresholds.push_back(compute_threshold(errors, config.t));
        bundle.models.push_back(std::move(model));
    }

    if (auto cycles = normalized.counter_spec.index_of("CYCLES")) {
        bundle.training_mean_cycles = mean_of_counter(normalized, *cycles);
    }
    return bundle;
}

DiagnosisReport detect_pipeline(const ModelBundle& bundle, const ProfileSet& new_profiles,
                                const DetectOptions& options) {
    if (!(bundle.counter_spec == new_profiles.counter_spec)) {
        throw DataError("counter spec mismatch between the bundle and the new profiles");
    }
    if (new_profiles.samples.empty()) {
        throw DataError("no samples");
    }
    if (bundle.models.size() != bundle.clusters.k || bundle.thresholds.size() != bundle.clusters.k) {
        throw DataError("bundle is inconsistent: cluster count does not match models/thresholds");
    }

    const ProfileSet normalized = ensure_normalized(new_profiles);

    DiagnosisReport report;
    report.program = normalized.program;
    report.config = bundle.config;
    report.clusters_used = bundle.clusters.k;
    report.t_effective = options.t.value_or(bundle.config.t);
    report.rho_effective = options.rho.value_or(bundle.config.rho);

    std::vector<Threshold> thresholds = bundle.thresholds;
    if (options.t) {
        for (auto& threshold : thresholds) {
            threshold.t = *options.t;
            threshold.gamma = threshold.mu + threshold.t * threshold.sigma;
        }
    }

    const DefectMapping default_mapping = DefectMapping::defaults();
    const DefectMapping& mapping =
        options.defect_mapping != nullptr ? *options.defect_mapping : default_mapping;

    if (bundle.training_mean_cycles > 0.0) {
        if (auto cycles = normalized.counter_spec.index_of("CYCLES")) {
            const double new_mean = mean_of_counter(normalized, *cycles);
            const double growth =
                (new_mean - bundle.training_mean_cycles) / bundle.training_mean_cycles;
            if (growth < bundle.config.perf_gate_warn_fraction) {
                std::ostringstream message;
                message << "no performance degradation observed: mean normalized CYCLES changed by "
                        << growth * 100.0 << "% (warn threshold "
                        << bundle.config.perf_gate_warn_fraction * 100.0 << "%)";
                report.warnings.push_back(message.str());
            }
        }
    }

    for (const auto& function : normalized.functions()) {
        const auto indices = normalized.sample_indices_of(function);

        FunctionDiagnosis diagnosis;
        diagnosis.function = function;
        const bool seen =
            bundle.clusters.function_assignment.count(function) > 0;
        if (!seen && !bundle.config.fallback_routing) {
            throw DataError("function '" + function +
                            "' was not seen at training time and fallback routing is disabled");
        }
        if (seen) {
            diagnosis.cluster = route(bundle.clusters, function);
        } else {
            const auto mean = mean_sample(normalized, indices);
            diagnosis.cluster = route(bundle.clusters, function, &mean);
            diagnosis.routed_by_fallback = true;
        }

        const auto& model = bundle.models[static_cast<std::size_t>(diagnosis.cluster)];
        const auto& threshold = thresholds[static_cast<std::size_t>(diagnosis.cluster)];

        // per-run verdicts over this function's samples
        std::map<std::string, std::vector<std::size_t>> runs;
        for (std::size_t i : indices) {
            runs[normalized.samples[i].run_id].push_back(i);
        }
        std::vector<std::vector<double>> anomalous_values;
        for (const auto& [run_id, run_samples] : runs) {
            std::vector<double> errors;
            std::vector<bool> flags;
            errors.reserve(run_samples.size());
            for (std::size_t i : run_samples) {
                const double epsilon = reconstruction_error(model, normalized.samples[i].values);
                const bool anomalous = classify_sample(epsilon, threshold) == Verdict::Anomalous;
                errors.push_back(epsilon);
                flags.push_back(anomalous);
                if (anomalous) {
                    anomalous_values.push_back(normalized.samples[i].values);
                }
            }
            diagnosis.runs.push_back(
                classify_run(run_id, std::move(errors), std::move(flags), report.rho_effective));
        }

        diagnosis.regressed = std::any_of(diagnosis.runs.begin(), diagnosis.runs.end(),
                                          [](const RunVerdict& rv) {
                                              return rv.verdict == Verdict::Anomalous;
                                          });
        if (diagnosis.regressed && !anomalous_values.empty()) {
            diagnosis.root_cause =
                rank_counters(anomalous_values, model, bundle.counter_spec, mapping);
        }
        report.functions.push_back(std::move(diagnosis));
    }

    // aggregate run verdicts across functions
    for (const auto& [run_id, unused] : normalized.run_index) {
        report.run_verdicts[run_id] = Verdict::Normal;
    }
    for (const auto& diagnosis : report.functions) {
        for (const auto& rv : diagnosis.runs) {
            if (rv.verdict == Verdict::Anomalous) {
                report.run_verdicts[rv.run_id] = Verdict::Anomalous;
            }
        }
    }
    report.regression_detected =
        std::any_of(report.functions.begin(), report.functions.end(),
                    [](const FunctionDiagnosis& d) { return d.regressed; });

    if (options.truth != nullptr) {
        std::vector<std::pair<std::string, Verdict>> pairs(report.run_verdicts.begin(),
                                                           report.run_verdicts.end());
        report.metrics = evaluate(pairs, *options.truth);
    }
    return report;
}

void save_bundle(const ModelBundle& bundle, std::ostream& sink) {
    const json payload = bundle_payload(bundle);
    const std::string body = payload.dump();

    json document;
    document["format"] = "perfdiag-bundle";
    document["format_version"] = ModelBundle::kFormatVersion;
    document["checksum"] = hex64(fnv1a64(body));
    document["payload"] = payload;
    sink << document.dump(2) << '\n';
}

ModelBundle load_bundle(std::istream& source) {
    json document;
    try {
        source >> document;
    } catch (const json::exception& e) {
        throw DataError(std::string("corrupted bundle: checksum/parse validation failed (") +
                        e.what() + ")");
    }
    try {
        if (document.at("format").get<std::string>() != "perfdiag-bundle") {
            throw DataError("not a model bundle document");
        }
        const int version = document.at("format_version").get<int>();
        if (version != ModelBundle::kFormatVersion) {
            throw DataError("unsupported bundle format version " + std::to_string(version) +
                            " (this build supports version " +
                            std::to_string(ModelBundle::kFormatVersion) + ")");
        }
        const std::string body = document.at("payload").dump();
        const std::string expected = document.at("checksum").get<std::string>();
        if (hex64(fnv1a64(body)) != expected) {
            throw DataError("corrupted bundle: checksum mismatch");
        }
        return bundle_from_payload(document.at("payload"));
    } catch (const json::exception& e) {
        throw DataError(std::string("corrupted bundle: ") + e.what());
    }
}

} // namespace perfdiag
