#pragma once

#include <cstdint>
#include <vector>

#include "trustrec/clustering.hpp"
#include "trustrec/dataset.hpp"

namespace trustrec {

// Synthetic review network with planted cluster and trust structure: agents
// in a cluster share an item-preference center (so their rating deviations
// correlate) and friendships are drawn from a logistic model over trustee
// profile features weighted by the cluster's trust-formation vector.
struct SynthConfig {
    int n_agents = 150;
    int n_items = 60;
    int k_clusters = 3;
    int ratings_per_agent = 25;
    double p_friend_intra = 0.15;   // base rate for same-cluster pairs
    double p_friend_inter = 0.004;  // base rate across clusters
    double center_low = 1.5, center_high = 4.5;  // per-cluster item centers
    double rating_noise = 0.35;

    // One weight vector per cluster over the standardized trustee features
    // [elite_years, fans, profile_compliments, content_compliments]. Empty:
    // auto-generated, well separated, scaled by trust_weight_scale.
    std::vector<std::vector<double>> trust_weights;
    double trust_weight_scale = 3.0;

    static constexpr int n_trust_features = 4;
};

struct SynthResult {
    Dataset data;
    ClusterAssignment planted;
    std::vector<std::vector<double>> planted_weights;  // k x n_trust_features
};

// Deterministic for a fixed seed. Throws data_error on an infeasible config.
SynthResult generate_synthetic(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace trustrec
