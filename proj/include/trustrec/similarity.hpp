#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trustrec/dataset.hpp"

namespace trustrec {

enum class SimKind { Preference, Social };

inline double sim_default(SimKind kind) { return kind == SimKind::Preference ? 1.0 : 0.0; }
inline double sim_max(SimKind kind) { return kind == SimKind::Preference ? 2.0 : 1.0; }

// Sparse symmetric pairwise similarity. Only entries that differ from the
// kind's default are stored; lookup of an unstored pair yields the default.
class SimilarityMatrix {
  public:
    SimilarityMatrix(SimKind kind, int n_agents);

    SimKind kind() const { return kind_; }
    double default_value() const { return default_; }
    int size() const { return n_; }
    std::size_t stored_entries() const { return n_stored_; }

    void set(AgentIdx i, AgentIdx j, double value);
    double lookup(AgentIdx i, AgentIdx j) const;

    // Stored neighbors of i with their values, sorted by neighbor index.
    const std::vector<std::pair<AgentIdx, double>>& row(AgentIdx i) const;

    void save_csv(const std::string& path, const Dataset& d) const;
    static SimilarityMatrix load_csv(const std::string& path, const Dataset& d);

  private:
    SimKind kind_;
    double default_;
    int n_;
    std::size_t n_stored_ = 0;
    std::vector<std::vector<std::pair<AgentIdx, double>>> rows_;
};

// 1 + Pearson correlation of deviations from item means over the common
// items; defaults to 1 when fewer than `cutoff` common items or when either
// centered sum of squares vanishes. Range [0, 2].
double pref_sim(AgentIdx i, AgentIdx j, const Dataset& d, int cutoff = 4);

// Jaccard similarity of friend sets; 0 when the union is empty. Range [0, 1].
double social_sim(AgentIdx i, AgentIdx j, const Dataset& d);

// Batch driver; computation is chunked over the pair list and merged in
// chunk order, so the result is independent of the worker count.
SimilarityMatrix pairwise_similarity(const Dataset& d, SimKind kind,
                                     const std::vector<std::pair<AgentIdx, AgentIdx>>& pairs,
                                     int workers = 1, int pref_cutoff = 4);

// Preference: 2 - s; Social: 1 - s. Throws on out-of-range input.
double sim_to_distance(double s, SimKind kind);

}  // namespace trustrec
