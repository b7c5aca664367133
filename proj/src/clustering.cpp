#include "trustrec/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "trustrec/errors.hpp"

namespace trustrec {

std::vector<int> ClusterAssignment::cluster_sizes() const {
    std::vector<int> sizes(k, 0);
    for (int c : assignment) ++sizes[c];
    return sizes;
}

std::vector<std::vector<AgentIdx>> ClusterAssignment::members() const {
    std::vector<std::vector<AgentIdx>> m(k);
    for (std::size_t i = 0; i < assignment.size(); ++i)
        m[assignment[i]].push_back(static_cast<AgentIdx>(i));
    return m;
}

int ClusterAssignment::non_empty_clusters() const {
    int n = 0;
    for (int s : cluster_sizes())
        if (s > 0) ++n;
    return n;
}

void ClusterAssignment::save_csv(const std::string& path, const Dataset& d) const {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "agent_id,cluster\n";
    for (std::size_t i = 0; i < assignment.size(); ++i)
        out << d.agent(static_cast<AgentIdx>(i)).id << ',' << assignment[i] << '\n';
}

ClusterAssignment ClusterAssignment::load_csv(const std::string& path, const Dataset& d) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    ClusterAssignment c;
    c.assignment.assign(d.agent_count(), -1);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, cl;
        if (!std::getline(ss, id, ',') || !std::getline(ss, cl))
            throw data_error("bad assignment row: " + line);
        int cluster = std::stoi(cl);
        c.assignment[d.require_agent(id)] = cluster;
        c.k = std::max(c.k, cluster + 1);
    }
    for (int a : c.assignment)
        if (a < 0) throw data_error("assignment not total in " + path);
    return c;
}

namespace {

// Sum over stored neighbors of (value - default), restricted by a predicate.
// Mean similarity to a member set of size m is then default + delta / m.
template <typename Pred>
double stored_delta(const SimilarityMatrix& s, AgentIdx i, Pred pred) {
    double delta = 0.0;
    for (const auto& [j, v] : s.row(i))
        if (pred(j)) delta += v - s.default_value();
    return delta;
}

int pick_among_ties(const std::vector<AgentIdx>& ties, const ClusterOptions& opts,
                    std::mt19937_64& rng) {
    if (ties.size() == 1 || opts.tie_break == TieBreak::LowestIndex) return ties.front();
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    return ties[pick(rng)];
}

}  // namespace

ClusterAssignment greedy_partition(const SimilarityMatrix& s, int eta, const ClusterOptions& opts) {
    const int n = s.size();
    if (n < 1) throw data_error("greedy_partition: no agents");
    if (eta < 1) throw data_error("greedy_partition: eta must be >= 1");

    std::mt19937_64 rng(opts.seed);

    // Mean similarity of each agent to all other agents, fixed for the run.
    std::vector<double> mean_to_all(n, s.default_value());
    if (n > 1) {
        for (AgentIdx i = 0; i < n; ++i)
            mean_to_all[i] =
                s.default_value() +
                stored_delta(s, i, [](AgentIdx) { return true; }) / static_cast<double>(n - 1);
    }

    ClusterAssignment out;
    out.assignment.assign(n, -1);
    std::vector<bool> assigned(n, false);
    int unassigned = n;
    int cluster = 0;

    while (unassigned > eta) {
        // pickCentroid: unassigned agent with greatest mean similarity to all.
        std::vector<AgentIdx> ties;
        double best = -std::numeric_limits<double>::infinity();
        for (AgentIdx i = 0; i < n; ++i) {
            if (assigned[i]) continue;
            if (mean_to_all[i] > best) {
                best = mean_to_all[i];
                ties.assign(1, i);
            } else if (mean_to_all[i] == best) {
                ties.push_back(i);
            }
        }
        AgentIdx seed_agent = pick_among_ties(ties, opts, rng);
        out.assignment[seed_agent] = cluster;
        assigned[seed_agent] = true;
        --unassigned;

        // delta[i]: sum over current members of (S_i,member - default). The
        // member mean is default + delta/|c|, so argmax delta == argmax mean.
        std::vector<double> delta(n, 0.0);
        for (const auto& [j, v] : s.row(seed_agent))
            if (!assigned[j]) delta[j] += v - s.default_value();

        int size = 1;
        while (size < eta) {
            ties.clear();
            best = -std::numeric_limits<double>::infinity();
            for (AgentIdx i = 0; i < n; ++i) {
                if (assigned[i]) continue;
                if (delta[i] > best) {
                    best = delta[i];
                    ties.assign(1, i);
                } else if (delta[i] == best) {
                    ties.push_back(i);
                }
            }
            AgentIdx next = pick_among_ties(ties, opts, rng);
            out.assignment[next] = cluster;
            assigned[next] = true;
            --unassigned;
            ++size;
            for (const auto& [j, v] : s.row(next))
                if (!assigned[j]) delta[j] += v - s.default_value();
        }
        ++cluster;
    }

    // Remaining agents form the final cluster.
    if (unassigned > 0) {
        for (AgentIdx i = 0; i < n; ++i)
            if (!assigned[i]) out.assignment[i] = cluster;
        ++cluster;
    }
    out.k = cluster;
    return out;
}

ClusterAssignment cluster_kmeans_modified(const SimilarityMatrix& s, int k, int max_iter,
                                          const ClusterOptions& opts) {
    const int n = s.size();
    if (k < 1 || k > n) throw data_error("cluster_kmeans_modified: k out of range");
    if (max_iter < 0) throw data_error("cluster_kmeans_modified: negative max_iter");

    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    ClusterAssignment c = greedy_partition(s, n / k, opts);
    if (c.k == 1) return c;

    std::vector<int> sizes = c.cluster_sizes();
    for (int iter = 0; iter < max_iter; ++iter) {
        // S'_{i,j}: mean similarity of agent i to cluster j, self excluded.
        // Computed against the assignment snapshot taken at iteration start.
        std::vector<int> next(n);
        bool changed = false;
        for (AgentIdx i = 0; i < n; ++i) {
            std::vector<double> delta(c.k, 0.0);
            for (const auto& [j, v] : s.row(i)) delta[c.assignment[j]] += v - s.default_value();
            std::vector<AgentIdx> ties;
            double best = -std::numeric_limits<double>::infinity();
            for (int cl = 0; cl < c.k; ++cl) {
                int others = sizes[cl] - (c.assignment[i] == cl ? 1 : 0);
                if (others <= 0) continue;  // empty, or only the agent itself
                double mean = s.default_value() + delta[cl] / static_cast<double>(others);
                if (mean > best) {
                    best = mean;
                    ties.assign(1, cl);
                } else if (mean == best) {
                    ties.push_back(cl);
                }
            }
            next[i] = ties.empty() ? c.assignment[i]
                                   : pick_among_ties(ties, opts, rng);
            if (next[i] != c.assignment[i]) changed = true;
        }
        if (!changed) break;
        c.assignment = std::move(next);
        sizes = c.cluster_sizes();
    }
    return c;
}

ClusterAssignment random_partition(int n_agents, int k, std::uint64_t seed) {
    if (k < 1 || k > n_agents) throw data_error("random_partition: k out of range");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, k - 1);
    ClusterAssignment c;
    c.k = k;
    c.assignment.resize(n_agents);
    for (int i = 0; i < n_agents; ++i) c.assignment[i] = pick(rng);
    return c;
}

double mean_intra_distance(const ClusterAssignment& c, const SimilarityMatrix& s) {
    auto members = c.members();
    int counted = 0;
    double total = 0.0;
    for (const auto& cluster : members) {
        if (cluster.empty()) continue;
        ++counted;
        if (cluster.size() == 1) continue;  // singleton contributes 0
        double cluster_mean = 0.0;
        for (AgentIdx j : cluster) {
            double sum = 0.0;
            for (AgentIdx m : cluster)
                if (m != j) sum += sim_to_distance(s.lookup(j, m), s.kind());
            cluster_mean += sum / static_cast<double>(cluster.size() - 1);
        }
        total += cluster_mean / static_cast<double>(cluster.size());
    }
    return counted ? total / static_cast<double>(counted) : 0.0;
}

double silhouette(const ClusterAssignment& c, const SimilarityMatrix& s, int sample,
                  std::uint64_t seed) {
    const int n = s.size();
    auto members = c.members();
    int non_empty = 0;
    for (const auto& m : members)
        if (!m.empty()) ++non_empty;
    if (non_empty < 2) {
        std::cerr << "silhouette: fewer than 2 clusters, score is 0\n";
        return 0.0;
    }

    std::vector<AgentIdx> chosen;
    if (sample <= 0 || sample >= n) {
        chosen.resize(n);
        for (int i = 0; i < n; ++i) chosen[i] = i;
    } else {
        std::vector<AgentIdx> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        std::mt19937_64 rng(seed);
        std::shuffle(all.begin(), all.end(), rng);
        chosen.assign(all.begin(), all.begin() + sample);
    }

    double total = 0.0;
    for (AgentIdx j : chosen) {
        int own = c.assignment[j];
        if (members[own].size() <= 1) continue;  // s(j) = 0

        double a = 0.0;
        for (AgentIdx m : members[own])
            if (m != j) a += sim_to_distance(s.lookup(j, m), s.kind());
        a /= static_cast<double>(members[own].size() - 1);

        double b = std::numeric_limits<double>::infinity();
        for (int cl = 0; cl < c.k; ++cl) {
            if (cl == own || members[cl].empty()) continue;
            double mean = 0.0;
            for (AgentIdx m : members[cl]) mean += sim_to_distance(s.lookup(j, m), s.kind());
            mean /= static_cast<double>(members[cl].size());
            b = std::min(b, mean);
        }
        double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(chosen.size());
}

std::string cluster_quality_to_json(const ClusterQuality& q) {
    nlohmann::json j;
    j["mean_intra"] = q.mean_intra;
    j["silhouette"] = q.silhouette;
    j["sample_size"] = q.sample_size;
    return j.dump(2);
}

}  // namespace trustrec
