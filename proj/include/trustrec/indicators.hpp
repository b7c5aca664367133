#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trustrec/dataset.hpp"

namespace trustrec {

// One row of evidence about an ordered (truster, trustee) pair. Field order
// is the canonical feature-column order; classifiers and the CSV format
// depend on it.
struct IndicatorVector {
    double benevolence = 1.0;       // pref_sim(i, j), default 1
    double integrity = 1.0;         // 1 - mean |r_jk - item mean| / 4 over j's ratings
    double competence = 0.0;
    double predictability = 0.0;
    double social_jacc = 0.0;
    double elite_years = 0.0;
    double profile_up = 0.0;
    double fans = 0.0;
    double visibility = 0.0;
    double global_feedback = 0.0;
    double elite_norm = 0.0;        // raw / trustee account age
    double profile_norm = 0.0;
    double fans_norm = 0.0;
    double feedback_norm = 0.0;
    double item_jacc = 0.0;
    double category_jacc = 0.0;
    double are_friends = 0.0;       // {0, 1}
    double are_fof = 0.0;           // {0, 1}: share at least one common friend
    bool competence_default = false;      // trustee had no co-rated items
    bool predictability_default = false;  // no common items

    static constexpr int n_fields = 18;
    static const std::array<std::string, n_fields>& field_names();
    // The 18 indicators followed by the two is-default flag columns.
    static const std::vector<std::string>& feature_column_names();
    std::array<double, n_fields> values() const;
    std::vector<double> feature_row() const;  // 20 columns
};

// N(a): agents sharing a rated item, a friendship, or a common friend.
class NeighborhoodIndex {
  public:
    static NeighborhoodIndex build(const Dataset& d);

    const std::vector<AgentIdx>& of(AgentIdx i) const { return neighbors_[i]; }
    bool contains(AgentIdx i, AgentIdx j) const;
    std::size_t ordered_pair_count() const { return pair_count_; }
    int size() const { return static_cast<int>(neighbors_.size()); }

    // All ordered pairs (i, j) with j in N(i), ordered by (i, j).
    std::vector<std::pair<AgentIdx, AgentIdx>> ordered_pairs() const;
    // Unordered pairs (i < j); N is symmetric.
    std::vector<std::pair<AgentIdx, AgentIdx>> unordered_pairs() const;

  private:
    std::vector<std::vector<AgentIdx>> neighbors_;  // sorted, self excluded
    std::size_t pair_count_ = 0;
};

std::vector<AgentIdx> neighborhood_of(AgentIdx i, const Dataset& d);

// Fraction of (item rated by j, other rater of that item) pairs whose ratings
// are within epsilon of j's. is_default flags an agent with no co-raters.
double competence(AgentIdx j, const Dataset& d, double epsilon = 0.5, bool* is_default = nullptr);

// (max - min) of the same/lower/higher counts over common items, divided by
// the number of common items. is_default flags an empty intersection.
double predictability(AgentIdx i, AgentIdx j, const Dataset& d, double theta = 0.5,
                      bool* is_default = nullptr);

// appr(j) / (contr(j) * max_k appr(k)); 0 when the denominator vanishes.
double visibility(AgentIdx j, const Dataset& d);

double integrity(AgentIdx j, const Dataset& d);

IndicatorVector indicator_vector(AgentIdx i, AgentIdx j, const Dataset& d, int pref_cutoff = 4);

// Computes rows for a fixed pair list with trustee-side values cached once
// per agent. Row order matches the input pair order.
class IndicatorBatch {
  public:
    IndicatorBatch(const Dataset& d, int pref_cutoff = 4);

    void ensure_pairs(const std::vector<std::pair<AgentIdx, AgentIdx>>& pairs, int workers = 1);
    const IndicatorVector& get(AgentIdx i, AgentIdx j);  // computes on miss

    void save_csv(const std::string& path,
                  const std::vector<std::pair<AgentIdx, AgentIdx>>& pairs);

  private:
    struct TrusteeSide {
        double integrity, competence, visibility;
        bool competence_default;
        bool ready = false;
    };
    const Dataset& d_;
    int pref_cutoff_;
    std::vector<TrusteeSide> trustee_;
    std::vector<std::vector<std::pair<AgentIdx, IndicatorVector>>> cache_;  // per truster, sorted

    const TrusteeSide& trustee_side(AgentIdx j);
    IndicatorVector compute(AgentIdx i, AgentIdx j, const TrusteeSide& side) const;
};

}  // namespace trustrec
