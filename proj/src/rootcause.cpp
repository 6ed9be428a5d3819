#include "perfdiag/rootcause.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "perfdiag/errors.hpp"

namespace perfdiag {

namespace {

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

std::vector<double> per_counter_errors(const AutoencoderModel& model, std::span<const double> z) {
    const auto zs = model.scaler.standardize(z);
    const auto ys = forward_scaled(model, zs);
    std::vector<double> errors(zs.size());
    for (std::size_t j = 0; j < zs.size(); ++j) {
        errors[j] = std::abs(zs[j] - ys[j]);
    }
    return errors;
}

DefectMapping DefectMapping::defaults() {
    DefectMapping mapping;
    mapping.rules = {
        {"HITM", DefectType::CacheContention},
        {"REMOTE_DRAM", DefectType::NumaLatency},
    };
    return mapping;
}

DefectType map_defect(std::string_view counter, const DefectMapping& mapping) {
    const std::string name = lowercase(counter);
    for (const auto& rule : mapping.rules) {
        if (name.find(lowercase(rule.pattern)) != std::string::npos) {
            return rule.type;
        }
    }
    return DefectType::Unknown;
}

CounterRanking rank_counters(const std::vector<std::vector<double>>& anomalous_samples,
                             const AutoencoderModel& model, const CounterSpec& spec,
                             const DefectMapping& mapping) {
    if (anomalous_samples.empty()) {
        throw DataError("rank_counters: no anomalous samples");
    }
    if (spec.dimension() != model.dimension()) {
        throw DataError("rank_counters: counter spec dimension does not match the model");
    }

    CounterRanking ranking;
    std::vector<std::size_t> first_votes(spec.dimension(), 0);
    for (const auto& sample : anomalous_samples) {
        const auto errors = per_counter_errors(model, sample);
        std::vector<std::size_t> order(errors.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return errors[a] > errors[b]; // descending error, stable keeps index order on ties
        });
        ++first_votes[order.front()];
        ranking.per_sample_rankings.push_back(std::move(order));
    }

    std::size_t winner_index = 0;
    for (std::size_t j = 0; j < first_votes.size(); ++j) {
        if (first_votes[j] > 0) {
            ranking.vote_counts[spec.at(j).name] = first_votes[j];
        }
        if (first_votes[j] > first_votes[winner_index]) {
            winner_index = j; // strict > keeps the lowest index on ties
        }
    }
    ranking.winner = spec.at(winner_index).name;
    ranking.defect = map_defect(ranking.winner, mapping);
    return ranking;
}

} // namespace perfdiag
