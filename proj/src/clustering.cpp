#include "perfdiag/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "perfdiag/errors.hpp"

namespace perfdiag {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

int nearest_centroid(const std::vector<std::vector<double>>& centroids,
                     std::span<const double> point, double* distance = nullptr) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(point, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    if (distance != nullptr) {
        *distance = best_d;
    }
    return best;
}

std::vector<std::vector<double>> kmeanspp_seed(const std::vector<std::vector<double>>& samples,
                                               std::size_t k, std::mt19937_64& rng) {
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<std::size_t> first(0, samples.size() - 1);
    centroids.push_back(samples[first(rng)]);

    std::vector<double> dist2(samples.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double d = squared_distance(samples[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c) {
                d = std::min(d, squared_distance(samples[i], centroids[c]));
            }
            dist2[i] = d;
            total += d;
        }
        std::size_t chosen = samples.size();
        if (total > 0.0) {
            std::uniform_real_distribution<double> pick(0.0, total);
            double target = pick(rng);
            for (std::size_t i = 0; i < samples.size(); ++i) {
                target -= dist2[i];
                if (target <= 0.0) {
                    chosen = i;
                    break;
                }
            }
            if (chosen == samples.size()) {
                chosen = samples.size() - 1;
            }
        } else {
            // every sample coincides with a centroid already; take the first
            // point that is not one (guaranteed to exist while k <= distinct)
            for (std::size_t i = 0; i < samples.size(); ++i) {
                if (dist2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
            if (chosen == samples.size()) {
                chosen = 0;
            }
        }
        centroids.push_back(samples[chosen]);
    }
    return centroids;
}

} // namespace

KmeansResult kmeans_lloyd(const std::vector<std::vector<double>>& samples,
                          std::vector<std::vector<double>> initial_centroids, int max_iters) {
    if (samples.empty()) {
        throw DataError("kmeans: empty input");
    }
    const std::size_t k = initial_centroids.size();
    const std::size_t dim = samples.front().size();

    KmeansResult result;
    result.centroids = std::move(initial_centroids);
    result.assignment.assign(samples.size(), -1);

    for (int iter = 0; iter < max_iters; ++iter) {
        // assignment step
        std::vector<int> assignment(samples.size());
        double inertia = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double d = 0.0;
            assignment[i] = nearest_centroid(result.centroids, samples[i], &d);
            inertia += d;
        }

        // revive empty clusters at the point farthest from its centroid
        std::vector<std::size_t> counts(k, 0);
        for (int a : assignment) {
            ++counts[static_cast<std::size_t>(a)];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                continue;
            }
            std::size_t farthest = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                if (counts[static_cast<std::size_t>(assignment[i])] <= 1) {
                    continue; // do not strand another cluster
                }
                const double d = squared_distance(
                    samples[i], result.centroids[static_cast<std::size_t>(assignment[i])]);
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            if (far_d <= 0.0) {
                continue; // nothing to steal; leave centroid in place
            }
            inertia -= far_d;
            --counts[static_cast<std::size_t>(assignment[farthest])];
            assignment[farthest] = static_cast<int>(c);
            ++counts[c];
            result.centroids[c] = samples[farthest];
        }

        result.inertia_history.push_back(inertia);
        result.iterations = iter + 1;
        const bool converged = assignment == result.assignment;
        result.assignment = std::move(assignment);
        result.inertia = inertia;
        if (converged) {
            break;
        }

        // update step
        std::vector<std::vector<double>> means(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto c = static_cast<std::size_t>(result.assignment[i]);
            ++sizes[c];
            for (std::size_t j = 0; j < dim; ++j) {
                means[c][j] += samples[i][j];
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) {
                continue;
            }
            for (std::size_t j = 0; j < dim; ++j) {
                means[c][j] /= static_cast<double>(sizes[c]);
            }
            result.centroids[c] = std::move(means[c]);
        }
    }

    // make assignment and inertia consistent with the final centroids
    double inertia = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double d = 0.0;
        result.assignment[i] = nearest_centroid(result.centroids, samples[i], &d);
        inertia += d;
    }
    result.inertia = inertia;
    return result;
}

KmeansResult kmeans(const std::vector<std::vector<double>>& samples, std::size_t k,
                    std::uint64_t seed, int max_iters, int n_init) {
    if (samples.empty()) {
        throw DataError("kmeans: empty input");
    }
    if (k == 0) {
        throw DataError("kmeans: k must be >= 1");
    }
    const std::size_t dim = samples.front().size();
    for (const auto& s : samples) {
        if (s.size() != dim) {
            throw DataError("kmeans: samples have inconsistent dimensions");
        }
    }
    const std::set<std::vector<double>> distinct(samples.begin(), samples.end());
    if (k > distinct.size()) {
        throw DataError("kmeans: k = " + std::to_string(k) + " exceeds the " +
                        std::to_string(distinct.size()) + " distinct samples");
    }

    std::mt19937_64 rng(seed);
    KmeansResult best;
    bool have_best = false;
    for (int init = 0; init < std::max(1, n_init); ++init) {
        auto centroids = kmeanspp_seed(samples, k, rng);
        KmeansResult candidate = kmeans_lloyd(samples, std::move(centroids), max_iters);
        if (!have_best || candidate.inertia < best.inertia) {
            best = std::move(candidate);
            have_best = true;
        }
    }
    return best;
}

std::map<std::string, int> assign_functions(const std::vector<std::string>& sample_functions,
                                            const std::vector<int>& sample_clusters,
                                            const std::vector<std::string>& expected_functions) {
    if (sample_functions.size() != sample_clusters.size()) {
        throw DataError("assign_functions: functions and cluster assignments differ in length");
    }
    // votes[function][cluster] -> sample count
    std::map<std::string, std::map<int, std::size_t>> votes;
    for (std::size_t i = 0; i < sample_functions.size(); ++i) {
        ++votes[sample_functions[i]][sample_clusters[i]];
    }
    for (const auto& fn : expected_functions) {
        if (votes.find(fn) == votes.end()) {
            throw DataError("function '" + fn + "' has no samples");
        }
    }

    std::map<std::string, int> assignment;
    for (const auto& [function, counts] : votes) {
        int best_cluster = -1;
        std::size_t best_count = 0;
        for (const auto& [cluster, count] : counts) { // ascending cluster index
            if (count > best_count) {
                best_count = count;
                best_cluster = cluster;
            }
        }
        assignment[function] = best_cluster;
    }
    return assignment;
}

int route(const ClusterModel& model, const std::string& function,
          const std::vector<double>* mean_normalized_sample) {
    auto it = model.function_assignment.find(function);
    if (it != model.function_assignment.end()) {
        return it->second;
    }
    if (mean_normalized_sample == nullptr) {
        throw DataError("function '" + function +
                        "' was not seen at training time and fallback routing is disabled");
    }
    const auto standardized = model.scaler.standardize(*mean_normalized_sample);
    return nearest_centroid(model.centroids, standardized);
}

} // namespace perfdiag
