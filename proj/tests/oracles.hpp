#pragma once

// Independent brute-force reference implementations used to check the
// library. Everything here is written directly from the defining formulas,
// favoring clarity over speed, and must stay independent of the code paths
// it verifies.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "trustrec/clustering.hpp"
#include "trustrec/dataset.hpp"
#include "trustrec/trustlink.hpp"

namespace oracle {

using trustrec::AgentIdx;
using trustrec::Dataset;
using trustrec::ItemIdx;

// Textbook two-pass Pearson correlation of paired samples.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Eq-style prefSim with defaults: 1 on short overlap or zero variance.
double pref_sim(AgentIdx i, AgentIdx j, const Dataset& d, int cutoff = 4);

double jaccard(const std::set<AgentIdx>& a, const std::set<AgentIdx>& b);
double social_sim(AgentIdx i, AgentIdx j, const Dataset& d);

// Common items of two agents.
std::vector<ItemIdx> common_items(AgentIdx i, AgentIdx j, const Dataset& d);

// The three disjuncts evaluated literally over all pairs.
std::set<AgentIdx> neighborhood(AgentIdx i, const Dataset& d);

double competence(AgentIdx j, const Dataset& d, double epsilon = 0.5);
double predictability(AgentIdx i, AgentIdx j, const Dataset& d, double theta = 0.5);
double visibility(AgentIdx j, const Dataset& d);
double integrity(AgentIdx j, const Dataset& d);
double item_jaccard(AgentIdx i, AgentIdx j, const Dataset& d);
double category_jaccard(AgentIdx i, AgentIdx j, const Dataset& d);
bool are_fof(AgentIdx i, AgentIdx j, const Dataset& d);

// Cluster metrics evaluated by exhaustive double/triple loops over the full
// distance table.
double mean_intra_distance(const trustrec::ClusterAssignment& c,
                           const trustrec::SimilarityMatrix& s);
double silhouette_full(const trustrec::ClusterAssignment& c, const trustrec::SimilarityMatrix& s);

// Chance-corrected agreement between two labelings (contingency formula).
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Exhaustive MTR: computes every rater's influence, sorts, keeps kappa.
double mtr_predict(AgentIdx i, ItemIdx j, const Dataset& train,
                   const trustrec::TrustPredictionMatrix& gamma, double beta, int kappa,
                   bool rater_mean = true);

struct MaeRmse {
    double mae, rmse;
};
MaeRmse mae_rmse(const std::vector<double>& predicted, const std::vector<double>& actual);

}  // namespace oracle
