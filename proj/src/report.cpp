#include "perfdiag/report.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <ostream>

namespace perfdiag {

namespace {

using nlohmann::json;

json optional_rate(const std::optional<double>& rate) {
    if (rate) {
        return *rate;
    }
    return "undefined";
}

json metrics_to_json(const EvalMetrics& metrics) {
    json j;
    j["false_positive_rate"] = optional_rate(metrics.false_positive_rate);
    j["false_negative_rate"] = optional_rate(metrics.false_negative_rate);
    j["true_positive_rate"] = optional_rate(metrics.true_positive_rate);
    j["precision"] = optional_rate(metrics.precision);
    j["recall"] = optional_rate(metrics.recall);
    j["f1"] = optional_rate(metrics.f1);
    if (!metrics.roc_points.empty()) {
        json points = json::array();
        for (const auto& p : metrics.roc_points) {
            points.push_back({{"t", p.t}, {"fpr", p.fpr}, {"tpr", p.tpr}});
        }
        j["roc_points"] = std::move(points);
    }
    return j;
}

std::string rate_text(const json& value) {
    if (value.is_string()) {
        return value.get<std::string>();
    }
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.4f", value.get<double>());
    return buffer;
}

} // namespace

json report_to_json(const DiagnosisReport& report) {
    json document;
    document["format"] = "perfdiag-report";
    document["format_version"] = 1;
    document["program"] = report.program;
    document["regression_detected"] = report.regression_detected;
    document["t"] = report.t_effective;
    document["rho"] = report.rho_effective;
    document["clusters"] = report.clusters_used;

    json config;
    config["k"] = report.config.k;
    config["t"] = report.config.t;
    config["rho"] = report.config.rho;
    config["min_samples_per_function"] = report.config.min_samples_per_function;
    config["fallback_routing"] = report.config.fallback_routing;
    config["perf_gate_warn_fraction"] = report.config.perf_gate_warn_fraction;
    config["epochs"] = report.config.train.epochs;
    config["batch_size"] = report.config.train.batch_size;
    config["learning_rate"] = report.config.train.learning_rate;
    config["optimizer"] = to_string(report.config.train.optimizer);
    config["seed"] = report.config.train.seed;
    config["early_stop_patience"] = report.config.train.early_stop_patience;
    config["validation_fraction"] = report.config.train.validation_fraction;
    document["config"] = std::move(config);

    json functions = json::array();
    for (const auto& diagnosis : report.functions) {
        json f;
        f["function"] = diagnosis.function;
        f["cluster"] = diagnosis.cluster;
        f["routed_by_fallback"] = diagnosis.routed_by_fallback;
        f["regressed"] = diagnosis.regressed;
        json runs = json::array();
        for (const auto& rv : diagnosis.runs) {
            json r;
            r["run_id"] = rv.run_id;
            r["errors"] = rv.errors;
            r["anomalous_fraction"] = rv.anomalous_fraction;
            r["verdict"] = to_string(rv.verdict);
            runs.push_back(std::move(r));
        }
        f["runs"] = std::move(runs);
        if (diagnosis.root_cause) {
            json rc;
            rc["winner"] = diagnosis.root_cause->winner;
            rc["defect"] = to_string(diagnosis.root_cause->defect);
            rc["votes"] = diagnosis.root_cause->vote_counts;
            f["root_cause"] = std::move(rc);
        }
        functions.push_back(std::move(f));
    }
    document["functions"] = std::move(functions);

    json runs;
    for (const auto& [run_id, verdict] : report.run_verdicts) {
        runs[run_id] = to_string(verdict);
    }
    document["runs"] = std::move(runs);

    if (report.metrics) {
        document["metrics"] = metrics_to_json(*report.metrics);
    }
    if (!report.warnings.empty()) {
        document["warnings"] = report.warnings;
    }
    return document;
}

void render_report_table(const json& report, std::ostream& sink) {
    sink << "program: " << report.value("program", std::string{"?"})
         << "   verdict: "
         << (report.value("regression_detected", false) ? "REGRESSION DETECTED" : "no regression")
         << "   (t=" << report.value("t", 0.0) << ", rho=" << report.value("rho", 0.0) << ")\n";

    if (report.contains("warnings")) {
        for (const auto& warning : report.at("warnings")) {
            sink << "warning: " << warning.get<std::string>() << '\n';
        }
    }

    std::size_t name_width = 8;
    for (const auto& f : report.at("functions")) {
        name_width = std::max(name_width, f.at("function").get<std::string>().size());
    }

    sink << '\n'
         << std::left << std::setw(static_cast<int>(name_width) + 2) << "function"
         << std::right << std::setw(6) << "runs" << std::setw(10) << "anomal."
         << "  " << std::left << std::setw(12) << "verdict" << std::setw(30) << "top counter"
         << "defect" << '\n';

    for (const auto& f : report.at("functions")) {
        const auto& runs = f.at("runs");
        const auto anomalous = std::count_if(runs.begin(), runs.end(), [](const json& r) {
            return r.at("verdict").get<std::string>() == "anomalous";
        });
        std::string winner = "-";
        std::string defect = "-";
        if (f.contains("root_cause")) {
            winner = f.at("root_cause").at("winner").get<std::string>();
            defect = f.at("root_cause").at("defect").get<std::string>();
        }
        sink << std::left << std::setw(static_cast<int>(name_width) + 2)
             << f.at("function").get<std::string>() << std::right << std::setw(6) << runs.size()
             << std::setw(10) << anomalous << "  " << std::left << std::setw(12)
             << (f.at("regressed").get<bool>() ? "REGRESSED" : "normal") << std::setw(30) << winner
             << defect << '\n';
    }

    if (report.contains("metrics")) {
        const auto& m = report.at("metrics");
        sink << "\nmetrics (run level):\n"
             << "  FPR=" << rate_text(m.at("false_positive_rate"))
             << "  FNR=" << rate_text(m.at("false_negative_rate"))
             << "  TPR=" << rate_text(m.at("true_positive_rate"))
             << "  precision=" << rate_text(m.at("precision"))
             << "  recall=" << rate_text(m.at("recall")) << "  F1=" << rate_text(m.at("f1"))
             << '\n';
    }
}

} // namespace perfdiag
