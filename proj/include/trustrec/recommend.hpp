#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trustrec/trustlink.hpp"

namespace trustrec {

struct MtrConfig {
    int kappa = 50;       // max neighbors per prediction
    double beta = 0.3;    // weight of rating similarity vs predicted trust
    int pref_cutoff = 4;
    // Which mean is subtracted from a neighbor's rating inside the sum.
    enum class NeighborMean { Rater, Item };
    NeighborMean neighbor_mean = NeighborMean::Rater;
};

// k-NN prediction blending rating similarity with predicted trust:
// influence = beta * max(0, pref_sim - 1) + (1 - beta) * gamma(i, k), with 0
// substituted for uncovered gamma entries. Falls back to the truster's mean
// when no rater carries influence, and to the global mean for an unknown
// item (fallback flags the caller when requested). Clamped to [1, 5].
double mtr_predict_rating(AgentIdx i, ItemIdx j, const Dataset& train,
                          const TrustPredictionMatrix& gamma, const MtrConfig& cfg,
                          bool* fallback = nullptr);

struct TrustMfConfig {
    int dimensions = 10;
    double lambda = 0.01;     // norm regularization
    double lambda_t = 0.11;   // weight of the trust term
    double learning_rate = 0.01;
    int epochs = 200;
};

// Joint factorization: ratings are fit by truster_factors * item_factors and
// the covered trust entries by truster_factors * trustee_factors, so the
// truster factors couple both matrices. The user factors of the rating side
// are the truster factors.
class TrustMfModel {
  public:
    TrustMfModel() = default;
    TrustMfModel(int n_agents, int n_items, TrustMfConfig cfg, double global_mean);

    int dimensions() const { return cfg_.dimensions; }
    const TrustMfConfig& config() const { return cfg_; }
    int n_agents() const { return n_agents_; }
    int n_items() const { return n_items_; }
    double global_mean() const { return global_mean_; }

    double* truster_factors(AgentIdx i) { return b_.data() + static_cast<std::size_t>(i) * cfg_.dimensions; }
    const double* truster_factors(AgentIdx i) const { return b_.data() + static_cast<std::size_t>(i) * cfg_.dimensions; }
    const double* user_factors(AgentIdx i) const { return truster_factors(i); }
    double* trustee_factors(AgentIdx k) { return w_.data() + static_cast<std::size_t>(k) * cfg_.dimensions; }
    const double* trustee_factors(AgentIdx k) const { return w_.data() + static_cast<std::size_t>(k) * cfg_.dimensions; }
    double* item_factors(ItemIdx t) { return v_.data() + static_cast<std::size_t>(t) * cfg_.dimensions; }
    const double* item_factors(ItemIdx t) const { return v_.data() + static_cast<std::size_t>(t) * cfg_.dimensions; }

    std::vector<double>& truster_matrix() { return b_; }
    std::vector<double>& trustee_matrix() { return w_; }
    std::vector<double>& item_matrix() { return v_; }
    const std::vector<double>& truster_matrix() const { return b_; }
    const std::vector<double>& trustee_matrix() const { return w_; }
    const std::vector<double>& item_matrix() const { return v_; }

    double raw_score(AgentIdx i, ItemIdx t) const;  // unclamped dot product

    void mark_seen(const Dataset& train);
    bool agent_seen(AgentIdx i) const { return i >= 0 && i < n_agents_ && agent_seen_[i]; }
    bool item_seen(ItemIdx t) const { return t >= 0 && t < n_items_ && item_seen_[t]; }

    void save_json(const std::string& path, const Dataset& d) const;
    static TrustMfModel load_json(const std::string& path, const Dataset& d);

  private:
    TrustMfConfig cfg_;
    int n_agents_ = 0, n_items_ = 0;
    double global_mean_ = 0.0;
    std::vector<double> b_, w_, v_;  // row-major factor matrices
    std::vector<char> agent_seen_, item_seen_;
};

// Squared-error loss over train ratings plus lambda_t times the squared error
// over covered trust entries plus lambda times the squared factor norms.
double trustmf_loss(const TrustMfModel& m, const Dataset& train, const TrustPredictionMatrix& gamma);

// Full-batch analytic gradient of trustmf_loss with respect to every factor.
struct TrustMfGradient {
    double loss = 0.0;
    std::vector<double> d_truster, d_trustee, d_item;
};
TrustMfGradient trustmf_loss_grad(const TrustMfModel& m, const Dataset& train,
                                  const TrustPredictionMatrix& gamma);

// Seeded SGD from small random initialization; rating and trust passes run
// separately each epoch so lambda_t = 0 reduces exactly to plain rating
// factorization. Throws numeric_error on divergence.
TrustMfModel trustmf_fit(const Dataset& train, const TrustPredictionMatrix& gamma,
                         const TrustMfConfig& cfg, std::uint64_t seed,
                         std::vector<double>* epoch_losses = nullptr);

// Clamped to [1, 5]; agents or items without train ratings get the global mean.
double trustmf_predict_rating(const TrustMfModel& m, AgentIdx i, ItemIdx t);

struct PredictionRow {
    AgentIdx agent;
    ItemIdx item;
    double predicted;
    double actual;
};

struct EvalResult {
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
};

EvalResult evaluate_predictions(const std::vector<PredictionRow>& preds);
// Joins predictions (i, j, predicted) against the test set; every test pair
// must be present. Throws data_error on an empty test set or a missing pair.
EvalResult evaluate_predictions(const std::vector<PredictionRow>& preds,
                                const std::vector<TestRating>& test);

void save_predictions_csv(const std::vector<PredictionRow>& preds, const std::string& path,
                          const Dataset& d);
std::vector<PredictionRow> load_predictions_csv(const std::string& path, const Dataset& d);

}  // namespace trustrec
