#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "perfdiag/autoencoder.hpp" // Scaler

namespace perfdiag {

struct KmeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignment; // per sample, aligned with the input
    double inertia = 0.0;
    // inertia after each assignment step of the winning initialization
    std::vector<double> inertia_history;
    int iterations = 0;
};

// Lloyd iterations from the given initial centroids: assign to nearest
// (ties to the lowest index), recompute means, re-seed empty clusters at
// the point farthest from its assigned centroid. Stops at an assignment
// fixpoint or max_iters.
KmeansResult kmeans_lloyd(const std::vector<std::vector<double>>& samples,
                          std::vector<std::vector<double>> initial_centroids, int max_iters);

// k-means++ seeded Lloyd's algorithm; runs n_init seedings from one seeded
// generator and keeps the lowest-inertia result. Deterministic per seed.
KmeansResult kmeans(const std::vector<std::vector<double>>& samples, std::size_t k,
                    std::uint64_t seed, int max_iters = 300, int n_init = 10);

// Maps each function to the cluster holding the plurality of its samples;
// ties break to the lowest cluster index. When `expected_functions` is
// given, a listed function with no samples is an error.
std::map<std::string, int> assign_functions(
    const std::vector<std::string>& sample_functions, const std::vector<int>& sample_clusters,
    const std::vector<std::string>& expected_functions = {});

// Routing table from changed functions to their cluster's autoencoder.
// Centroids live in the space defined by `scaler`.
struct ClusterModel {
    std::size_t k = 1;
    std::uint64_t seed = 0;
    double inertia = 0.0;
    Scaler scaler;
    std::vector<std::vector<double>> centroids;
    std::map<std::string, int> function_assignment;
};

// Returns the cluster of `function`. Unseen functions fall back to the
// centroid nearest their mean sample (given in the same normalized space
// the scaler was fitted on) when one is provided; otherwise they are an
// error.
int route(const ClusterModel& model, const std::string& function,
          const std::vector<double>* mean_normalized_sample = nullptr);

} // namespace perfdiag
