#include "trustrec/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "trustrec/errors.hpp"
#include "trustrec/util.hpp"

namespace trustrec {

SimilarityMatrix::SimilarityMatrix(SimKind kind, int n_agents)
    : kind_(kind), default_(sim_default(kind)), n_(n_agents), rows_(n_agents) {}

void SimilarityMatrix::set(AgentIdx i, AgentIdx j, double value) {
    if (i == j) throw data_error("similarity matrix stores no diagonal");
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw data_error("similarity index out of range");
    if (value == default_) return;
    auto insert = [&](AgentIdx a, AgentIdx b) {
        auto& row = rows_[a];
        auto it = std::lower_bound(row.begin(), row.end(), b,
                                   [](const auto& e, AgentIdx x) { return e.first < x; });
        if (it != row.end() && it->first == b) {
            it->second = value;
            return false;
        }
        row.insert(it, {b, value});
        return true;
    };
    bool fresh = insert(i, j);
    insert(j, i);
    if (fresh) ++n_stored_;
}

double SimilarityMatrix::lookup(AgentIdx i, AgentIdx j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw data_error("similarity index out of range");
    const auto& row = rows_[i];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const auto& e, AgentIdx x) { return e.first < x; });
    if (it != row.end() && it->first == j) return it->second;
    return default_;
}

const std::vector<std::pair<AgentIdx, double>>& SimilarityMatrix::row(AgentIdx i) const {
    return rows_[i];
}

void SimilarityMatrix::save_csv(const std::string& path, const Dataset& d) const {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "# kind=" << (kind_ == SimKind::Preference ? "preference" : "social")
        << " default=" << default_ << "\n";
    out.precision(17);
    for (AgentIdx i = 0; i < n_; ++i)
        for (const auto& [j, v] : rows_[i])
            if (j > i) out << d.agent(i).id << ',' << d.agent(j).id << ',' << v << '\n';
}

SimilarityMatrix SimilarityMatrix::load_csv(const std::string& path, const Dataset& d) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("# kind=", 0) != 0)
        throw data_error("bad similarity header in " + path);
    SimKind kind = header.find("kind=social") != std::string::npos ? SimKind::Social
                                                                   : SimKind::Preference;
    SimilarityMatrix m(kind, d.agent_count());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, v;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, v))
            throw data_error("bad similarity row: " + line);
        m.set(d.require_agent(a), d.require_agent(b), std::stod(v));
    }
    return m;
}

double pref_sim(AgentIdx i, AgentIdx j, const Dataset& d, int cutoff) {
    if (i == j) throw data_error("pref_sim: identical agents");
    const auto& ri = d.ratings_of(i);
    const auto& rj = d.ratings_of(j);

    // Deviations from the item mean over the common items.
    double sxx = 0, syy = 0, sxy = 0;
    int common = 0;
    std::size_t a = 0, b = 0;
    while (a < ri.size() && b < rj.size()) {
        if (ri[a].item < rj[b].item) {
            ++a;
        } else if (rj[b].item < ri[a].item) {
            ++b;
        } else {
            double mean = d.item_mean(ri[a].item);
            double x = ri[a].stars - mean;
            double y = rj[b].stars - mean;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            ++common;
            ++a;
            ++b;
        }
    }
    if (common < cutoff || sxx == 0.0 || syy == 0.0) return 1.0;
    double r = sxy / (std::sqrt(sxx) * std::sqrt(syy));
    // Guard rounding just past the closed interval.
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return 1.0 + r;
}

double social_sim(AgentIdx i, AgentIdx j, const Dataset& d) {
    if (i == j) throw data_error("social_sim: identical agents");
    const auto& fi = d.agent(i).friends;
    const auto& fj = d.agent(j).friends;
    std::size_t inter = 0;
    std::size_t a = 0, b = 0;
    while (a < fi.size() && b < fj.size()) {
        if (fi[a] < fj[b])
            ++a;
        else if (fj[b] < fi[a])
            ++b;
        else {
            ++inter;
            ++a;
            ++b;
        }
    }
    std::size_t uni = fi.size() + fj.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

SimilarityMatrix pairwise_similarity(const Dataset& d, SimKind kind,
                                     const std::vector<std::pair<AgentIdx, AgentIdx>>& pairs,
                                     int workers, int pref_cutoff) {
    SimilarityMatrix m(kind, d.agent_count());
    std::vector<std::vector<std::tuple<AgentIdx, AgentIdx, double>>> chunks(
        std::max(1, workers));
    parallel_for(pairs.size(), workers, [&](std::size_t begin, std::size_t end, int chunk) {
        auto& out = chunks[chunk];
        for (std::size_t p = begin; p < end; ++p) {
            auto [i, j] = pairs[p];
            double v = kind == SimKind::Preference ? pref_sim(i, j, d, pref_cutoff)
                                                   : social_sim(i, j, d);
            if (v != m.default_value()) out.emplace_back(i, j, v);
        }
    });
    for (const auto& chunk : chunks)
        for (const auto& [i, j, v] : chunk) m.set(i, j, v);
    return m;
}

double sim_to_distance(double s, SimKind kind) {
    double max = sim_max(kind);
    if (s < 0.0 || s > max) throw data_error("similarity out of range for kind");
    return max - s;
}

}  // namespace trustrec
