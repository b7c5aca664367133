#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trustrec/similarity.hpp"

namespace trustrec {

struct ClusterAssignment {
    std::vector<int> assignment;  // agent index -> cluster index in [0, k)
    int k = 0;                    // number of cluster slots (some may be empty)

    std::vector<int> cluster_sizes() const;
    std::vector<std::vector<AgentIdx>> members() const;
    int non_empty_clusters() const;

    void save_csv(const std::string& path, const Dataset& d) const;
    static ClusterAssignment load_csv(const std::string& path, const Dataset& d);
};

struct ClusterQuality {
    double mean_intra = 0.0;
    double silhouette = 0.0;
    int sample_size = 0;
};

enum class TieBreak { LowestIndex, SeededRandom };

struct ClusterOptions {
    TieBreak tie_break = TieBreak::LowestIndex;
    std::uint64_t seed = 0;  // used only by SeededRandom
};

// Greedy seeding: repeatedly pick the unassigned agent with the greatest mean
// similarity to all other agents, grow its cluster to size eta by mean
// similarity to current members, and put the < eta leftovers in a final
// cluster.
ClusterAssignment greedy_partition(const SimilarityMatrix& s, int eta,
                                   const ClusterOptions& opts = {});

// Greedy initialization with eta = floor(n/k), then up to max_iter sweeps
// reassigning every agent to the cluster with the highest mean similarity
// (self excluded). Stops early once a sweep changes nothing.
ClusterAssignment cluster_kmeans_modified(const SimilarityMatrix& s, int k, int max_iter,
                                          const ClusterOptions& opts = {});

ClusterAssignment random_partition(int n_agents, int k, std::uint64_t seed);

// Mean over clusters of the mean over members of the mean distance to the
// other members; singleton clusters contribute 0.
double mean_intra_distance(const ClusterAssignment& c, const SimilarityMatrix& s);

// Mean silhouette over a seeded sample of agents (sample <= 0 or >= n uses
// every agent). Members of singleton clusters score 0.
double silhouette(const ClusterAssignment& c, const SimilarityMatrix& s, int sample,
                  std::uint64_t seed);

std::string cluster_quality_to_json(const ClusterQuality& q);

}  // namespace trustrec
