#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustrec/clustering.hpp"
#include "trustrec/indicators.hpp"

namespace trustrec {

enum class LinkTarget { Friendship, PositiveCorrelation };

// PositiveCorrelation holds when pref_sim > 1 on train ratings (which already
// requires at least `cutoff` common items).
bool link_holds(LinkTarget target, AgentIdx i, AgentIdx j, const Dataset& d, int pref_cutoff = 4);

struct LinkExample {
    AgentIdx truster, trustee;
    std::vector<double> features;
    int label;
};

struct TrainingSet {
    std::vector<std::string> feature_names;
    std::vector<LinkExample> examples;
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
};

// The feature columns used for a target: the target-defining column is
// removed (Friendship drops are_friends, PositiveCorrelation drops
// benevolence); everything else, including the is-default flags, stays.
std::vector<std::string> feature_names_for_target(LinkTarget target);
std::vector<double> feature_row_for_target(const IndicatorVector& v, LinkTarget target);

// Positives are all ordered neighborhood pairs with the link, truster in
// cluster_agents; an equal number of negatives is sampled uniformly without
// replacement, preferring linkless neighborhood pairs and falling back to
// non-neighborhood pairs when those run out.
TrainingSet build_training_set(const std::vector<AgentIdx>& cluster_agents, LinkTarget target,
                               IndicatorBatch& indicators, const Dataset& d,
                               const NeighborhoodIndex& n, std::uint64_t seed);

struct LogisticConfig {
    double l2 = 1.0;        // penalty in standardized feature space
    double tolerance = 1e-6;
    int max_iterations = 1000;
};

struct LinkClassifier {
    std::vector<double> weights;  // over standardized features
    double bias = 0.0;
    std::vector<double> feature_means;
    std::vector<double> feature_scales;  // > 0
    std::vector<std::string> feature_names;
    int trained_on = kGlobal;  // cluster index, or kGlobal

    static constexpr int kGlobal = -1;

    double predict_probability(std::span<const double> raw_features) const;
    double training_accuracy(const TrainingSet& ts) const;
};

// Standardizes features, then fits L2-regularized logistic regression by
// Newton iterations to the configured tolerance. Deterministic for a fixed
// example order. Throws on single-class or non-finite input.
LinkClassifier train_link_classifier(const TrainingSet& ts, const LogisticConfig& cfg = {});

struct ClassifierThresholds {
    int min_agents = 100;
    long long min_positive_links = 1000;
};

struct ClusterClassifiers {
    std::vector<std::shared_ptr<const LinkClassifier>> per_cluster;  // one per cluster slot
    std::shared_ptr<const LinkClassifier> global;
    std::vector<bool> own;  // true when the cluster trained its own model

    const LinkClassifier& for_cluster(int c) const { return *per_cluster[c]; }
};

// Clusters meeting both thresholds train on all of their data; the rest share
// the classifier trained on global_sample. Per-cluster jobs run concurrently.
ClusterClassifiers assign_classifiers(const ClusterAssignment& c,
                                      const std::vector<TrainingSet>& per_cluster_data,
                                      const TrainingSet& global_sample,
                                      const ClassifierThresholds& thresholds = {},
                                      const LogisticConfig& cfg = {}, int workers = 1);

// Directed 0/1 predictions, defined only for neighborhood pairs.
class TrustPredictionMatrix {
  public:
    explicit TrustPredictionMatrix(int n_agents = 0);

    void set(AgentIdx i, AgentIdx j, int value);
    std::optional<int> lookup(AgentIdx i, AgentIdx j) const;  // nullopt: uncovered
    int lookup_or_zero(AgentIdx i, AgentIdx j) const;

    std::size_t covered_pairs() const { return covered_; }
    std::size_t positive_count() const { return positives_; }
    int size() const { return static_cast<int>(rows_.size()); }
    const std::vector<std::pair<AgentIdx, std::uint8_t>>& row(AgentIdx i) const { return rows_[i]; }

    std::uint64_t fingerprint() const;

    // Positive entries as (i, j, 1) triples plus a coverage manifest at
    // path + ".coverage.csv".
    void save_csv(const std::string& path, const Dataset& d) const;
    static TrustPredictionMatrix load_csv(const std::string& path, const Dataset& d);

    // The explicit friendship links restricted to neighborhood coverage.
    static TrustPredictionMatrix from_friendships(const Dataset& d, const NeighborhoodIndex& n);

  private:
    std::vector<std::vector<std::pair<AgentIdx, std::uint8_t>>> rows_;  // sorted by trustee
    std::size_t covered_ = 0;
    std::size_t positives_ = 0;
};

// For every i and j in N(i): 1 iff the truster's cluster classifier yields
// probability strictly greater than 0.5.
TrustPredictionMatrix predict_trust_matrix(const ClusterAssignment& c,
                                           const ClusterClassifiers& classifiers,
                                           IndicatorBatch& indicators,
                                           const NeighborhoodIndex& n, LinkTarget target,
                                           int workers = 1);

void save_classifiers_json(const ClusterClassifiers& cc, const std::string& path);
ClusterClassifiers load_classifiers_json(const std::string& path);

}  // namespace trustrec
