#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trustrec/recommend.hpp"

namespace trustrec {

enum class ExperimentName {
    RealFriends,
    FriendPrediction,
    PrefPredict,
    PrefClusterPrefPredict,
    PrefClusterFriendPredict,
    SocialClusterPrefPredict,
    SocialClusterFriendPredict,
    RandomClusterFriendPredict,
};

enum class RecommenderKind { MTR, TrustMF };

const char* to_string(ExperimentName name);
const char* to_string(RecommenderKind r);
std::optional<ExperimentName> experiment_from_string(const std::string& s);
std::optional<RecommenderKind> recommender_from_string(const std::string& s);

struct ExperimentSpec {
    ExperimentName name = ExperimentName::FriendPrediction;
    int k = 1;  // ignored by RealFriends and the unclustered experiments
    RecommenderKind recommender = RecommenderKind::MTR;
    std::vector<std::uint64_t> seeds = {1, 2, 3};

    MtrConfig mtr;
    TrustMfConfig trustmf;
    ClassifierThresholds thresholds;
    LogisticConfig logistic;

    double test_fraction = 0.2;
    int folds = 0;  // > 0 switches to per-user cross validation
    int kmeans_max_iter = 20;
    int silhouette_sample = 500;
    int global_sample_agents = 0;  // 0: train the fallback on all agents
    int workers = 1;
    std::string cache_dir;  // empty: no artifact caching
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    int fold_index = -1;
    EvalResult eval;
    std::uint64_t gamma_fingerprint = 0;
    std::size_t gamma_positive = 0;
    std::size_t gamma_covered = 0;
};

struct ExperimentResult {
    ExperimentSpec spec;
    EvalResult mean;  // over seeds and folds
    std::vector<SeedOutcome> runs;
    std::optional<ClusterQuality> quality;  // from the last clustered run
    double runtime_seconds = 0.0;
};

struct Report {
    std::vector<ExperimentResult> experiments;
};

// Runs the split -> cluster -> link-prediction -> recommend pipeline for each
// seed (and fold, under CV). Stage skipping follows the experiment name:
// RealFriends feeds the friendship adjacency as gamma, the unclustered
// experiments run with a single cluster. Throws on an invalid spec before
// doing any work.
ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& d);

enum class SweepParam { K, Beta, LambdaT, Kappa };
std::optional<SweepParam> sweep_param_from_string(const std::string& s);
const char* to_string(SweepParam p);

// One report entry per value, sharing the base spec's seeds. Experiments run
// concurrently up to `workers`.
Report sweep_parameter(const ExperimentSpec& base, SweepParam param,
                       const std::vector<double>& values, const Dataset& d, int workers = 1);

void emit_report_json(const Report& r, const std::string& path);
void emit_report_csv(const Report& r, const std::string& path);
// Plot-ready series for a sweep: one row per value with MAE/RMSE columns.
void emit_sweep_csv(const Report& r, SweepParam param, const std::vector<double>& values,
                    const std::string& path);
std::string report_to_json(const Report& r);
Report report_from_json(const std::string& json_text);

}  // namespace trustrec
