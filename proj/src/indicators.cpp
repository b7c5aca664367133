#include "trustrec/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "trustrec/errors.hpp"
#include "trustrec/similarity.hpp"
#include "trustrec/util.hpp"

namespace trustrec {

const std::array<std::string, IndicatorVector::n_fields>& IndicatorVector::field_names() {
    static const std::array<std::string, n_fields> names = {
        "benevolence",  "integrity",   "competence",    "predictability", "social_jacc",
        "elite_years",  "profile_up",  "fans",          "visibility",     "global_feedback",
        "elite_norm",   "profile_norm", "fans_norm",    "feedback_norm",  "item_jacc",
        "category_jacc", "are_friends", "are_fof"};
    return names;
}

const std::vector<std::string>& IndicatorVector::feature_column_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v(field_names().begin(), field_names().end());
        v.push_back("competence_default");
        v.push_back("predictability_default");
        return v;
    }();
    return names;
}

std::array<double, IndicatorVector::n_fields> IndicatorVector::values() const {
    return {benevolence,  integrity,   competence,   predictability, social_jacc,
            elite_years,  profile_up,  fans,         visibility,     global_feedback,
            elite_norm,   profile_norm, fans_norm,   feedback_norm,  item_jacc,
            category_jacc, are_friends, are_fof};
}

std::vector<double> IndicatorVector::feature_row() const {
    auto v = values();
    std::vector<double> row(v.begin(), v.end());
    row.push_back(competence_default ? 1.0 : 0.0);
    row.push_back(predictability_default ? 1.0 : 0.0);
    return row;
}

// ------------------------------------------------------- NeighborhoodIndex

NeighborhoodIndex NeighborhoodIndex::build(const Dataset& d) {
    const int n = d.agent_count();
    NeighborhoodIndex idx;
    std::vector<std::set<AgentIdx>> nb(n);

    // Shared rated item.
    for (ItemIdx t = 0; t < d.item_count(); ++t) {
        const auto& raters = d.raters_of(t);
        for (std::size_t a = 0; a < raters.size(); ++a)
            for (std::size_t b = a + 1; b < raters.size(); ++b) {
                nb[raters[a].agent].insert(raters[b].agent);
                nb[raters[b].agent].insert(raters[a].agent);
            }
    }
    // Friendship and common friends.
    for (AgentIdx i = 0; i < n; ++i) {
        for (AgentIdx f : d.agent(i).friends) {
            nb[i].insert(f);
            for (AgentIdx ff : d.agent(f).friends) {
                if (ff == i) continue;
                nb[i].insert(ff);
                nb[ff].insert(i);
            }
        }
    }

    idx.neighbors_.resize(n);
    for (int i = 0; i < n; ++i) {
        idx.neighbors_[i].assign(nb[i].begin(), nb[i].end());
        idx.pair_count_ += idx.neighbors_[i].size();
    }
    return idx;
}

bool NeighborhoodIndex::contains(AgentIdx i, AgentIdx j) const {
    const auto& row = neighbors_[i];
    return std::binary_search(row.begin(), row.end(), j);
}

std::vector<std::pair<AgentIdx, AgentIdx>> NeighborhoodIndex::ordered_pairs() const {
    std::vector<std::pair<AgentIdx, AgentIdx>> out;
    out.reserve(pair_count_);
    for (std::size_t i = 0; i < neighbors_.size(); ++i)
        for (AgentIdx j : neighbors_[i]) out.emplace_back(static_cast<AgentIdx>(i), j);
    return out;
}

std::vector<std::pair<AgentIdx, AgentIdx>> NeighborhoodIndex::unordered_pairs() const {
    std::vector<std::pair<AgentIdx, AgentIdx>> out;
    out.reserve(pair_count_ / 2);
    for (std::size_t i = 0; i < neighbors_.size(); ++i)
        for (AgentIdx j : neighbors_[i])
            if (j > static_cast<AgentIdx>(i)) out.emplace_back(static_cast<AgentIdx>(i), j);
    return out;
}

std::vector<AgentIdx> neighborhood_of(AgentIdx i, const Dataset& d) {
    std::set<AgentIdx> nb;
    for (const Rating& r : d.ratings_of(i))
        for (const ItemRating& other : d.raters_of(r.item))
            if (other.agent != i) nb.insert(other.agent);
    for (AgentIdx f : d.agent(i).friends) {
        nb.insert(f);
        for (AgentIdx ff : d.agent(f).friends)
            if (ff != i) nb.insert(ff);
    }
    return {nb.begin(), nb.end()};
}

// ----------------------------------------------------------- scalar ops

double competence(AgentIdx j, const Dataset& d, double epsilon, bool* is_default) {
    long long hits = 0, total = 0;
    for (const Rating& r : d.ratings_of(j)) {
        for (const ItemRating& other : d.raters_of(r.item)) {
            if (other.agent == j) continue;  // the agent is not its own co-rater
            ++total;
            if (std::abs(r.stars - other.stars) < epsilon) ++hits;
        }
    }
    if (is_default) *is_default = (total == 0);
    if (total == 0) return 0.0;
    return static_cast<double>(hits) / static_cast<double>(total);
}

double predictability(AgentIdx i, AgentIdx j, const Dataset& d, double theta, bool* is_default) {
    const auto& ri = d.ratings_of(i);
    const auto& rj = d.ratings_of(j);
    long long n_same = 0, n_lower = 0, n_higher = 0, common = 0;
    std::size_t a = 0, b = 0;
    while (a < ri.size() && b < rj.size()) {
        if (ri[a].item < rj[b].item) {
            ++a;
        } else if (rj[b].item < ri[a].item) {
            ++b;
        } else {
            double diff = ri[a].stars - rj[b].stars;
            if (std::abs(diff) <= theta)
                ++n_same;  // trustee rates about the same
            else if (diff > theta)
                ++n_lower;  // trustee rates lower than the truster
            else
                ++n_higher;
            ++common;
            ++a;
            ++b;
        }
    }
    if (is_default) *is_default = (common == 0);
    if (common == 0) return 0.0;
    long long mx = std::max({n_same, n_lower, n_higher});
    long long mn = std::min({n_same, n_lower, n_higher});
    return static_cast<double>(mx - mn) / static_cast<double>(common);
}

double visibility(AgentIdx j, const Dataset& d) {
    double denom = static_cast<double>(d.agent(j).contributions) *
                   static_cast<double>(d.max_content_compliments());
    if (denom <= 0.0) return 0.0;
    return static_cast<double>(d.agent(j).content_compliments) / denom;
}

double integrity(AgentIdx j, const Dataset& d) {
    const auto& row = d.ratings_of(j);
    if (row.empty()) return 1.0;
    double dev = 0.0;
    for (const Rating& r : row) dev += std::abs(r.stars - d.item_mean(r.item));
    // Normalized by the maximal 4-point spread of the star scale.
    return 1.0 - dev / (4.0 * static_cast<double>(row.size()));
}

namespace {

double jaccard_sorted(const std::vector<ItemIdx>& a, const std::vector<ItemIdx>& b) {
    std::size_t inter = 0, x = 0, y = 0;
    while (x < a.size() && y < b.size()) {
        if (a[x] < b[y])
            ++x;
        else if (b[y] < a[x])
            ++y;
        else {
            ++inter;
            ++x;
            ++y;
        }
    }
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<ItemIdx> items_of(const Dataset& d, AgentIdx i) {
    std::vector<ItemIdx> out;
    out.reserve(d.ratings_of(i).size());
    for (const Rating& r : d.ratings_of(i)) out.push_back(r.item);
    return out;
}

std::set<std::string> categories_of(const Dataset& d, AgentIdx i) {
    std::set<std::string> out;
    for (const Rating& r : d.ratings_of(i))
        for (const auto& c : d.item(r.item).categories) out.insert(c);
    return out;
}

double jaccard_categories(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& c : small)
        if (large.count(c)) ++inter;
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

bool have_common_friend(const Dataset& d, AgentIdx i, AgentIdx j) {
    const auto& fi = d.agent(i).friends;
    const auto& fj = d.agent(j).friends;
    std::size_t a = 0, b = 0;
    while (a < fi.size() && b < fj.size()) {
        if (fi[a] < fj[b])
            ++a;
        else if (fj[b] < fi[a])
            ++b;
        else
            return true;
    }
    return false;
}

}  // namespace

IndicatorVector indicator_vector(AgentIdx i, AgentIdx j, const Dataset& d, int pref_cutoff) {
    if (i == j) throw data_error("indicator_vector: identical agents");
    const Agent& trustee = d.agent(j);

    IndicatorVector v;
    v.benevolence = pref_sim(i, j, d, pref_cutoff);
    v.integrity = integrity(j, d);
    v.competence = competence(j, d, 0.5, &v.competence_default);
    v.predictability = predictability(i, j, d, 0.5, &v.predictability_default);
    v.social_jacc = social_sim(i, j, d);
    v.elite_years = static_cast<double>(trustee.elite_years);
    v.profile_up = static_cast<double>(trustee.profile_compliments);
    v.fans = static_cast<double>(trustee.fans);
    v.visibility = visibility(j, d);
    v.global_feedback = static_cast<double>(trustee.content_compliments);
    v.elite_norm = v.elite_years / trustee.account_age_years;
    v.profile_norm = v.profile_up / trustee.account_age_years;
    v.fans_norm = v.fans / trustee.account_age_years;
    v.feedback_norm = v.global_feedback / trustee.account_age_years;
    v.item_jacc = jaccard_sorted(items_of(d, i), items_of(d, j));
    v.category_jacc = jaccard_categories(categories_of(d, i), categories_of(d, j));
    v.are_friends = d.friends_with(i, j) ? 1.0 : 0.0;
    v.are_fof = have_common_friend(d, i, j) ? 1.0 : 0.0;
    return v;
}

// ----------------------------------------------------------- batch

IndicatorBatch::IndicatorBatch(const Dataset& d, int pref_cutoff)
    : d_(d), pref_cutoff_(pref_cutoff), trustee_(d.agent_count()), cache_(d.agent_count()) {}

const IndicatorBatch::TrusteeSide& IndicatorBatch::trustee_side(AgentIdx j) {
    TrusteeSide& side = trustee_[j];
    if (!side.ready) {
        side.integrity = integrity(j, d_);
        side.competence = trustrec::competence(j, d_, 0.5, &side.competence_default);
        side.visibility = trustrec::visibility(j, d_);
        side.ready = true;
    }
    return side;
}

IndicatorVector IndicatorBatch::compute(AgentIdx i, AgentIdx j, const TrusteeSide& side) const {
    const Agent& trustee = d_.agent(j);
    IndicatorVector v;
    v.benevolence = pref_sim(i, j, d_, pref_cutoff_);
    v.integrity = side.integrity;
    v.competence = side.competence;
    v.competence_default = side.competence_default;
    v.predictability = predictability(i, j, d_, 0.5, &v.predictability_default);
    v.social_jacc = social_sim(i, j, d_);
    v.elite_years = static_cast<double>(trustee.elite_years);
    v.profile_up = static_cast<double>(trustee.profile_compliments);
    v.fans = static_cast<double>(trustee.fans);
    v.visibility = side.visibility;
    v.global_feedback = static_cast<double>(trustee.content_compliments);
    v.elite_norm = v.elite_years / trustee.account_age_years;
    v.profile_norm = v.profile_up / trustee.account_age_years;
    v.fans_norm = v.fans / trustee.account_age_years;
    v.feedback_norm = v.global_feedback / trustee.account_age_years;
    v.item_jacc = jaccard_sorted(items_of(d_, i), items_of(d_, j));
    v.category_jacc = jaccard_categories(categories_of(d_, i), categories_of(d_, j));
    v.are_friends = d_.friends_with(i, j) ? 1.0 : 0.0;
    v.are_fof = have_common_friend(d_, i, j) ? 1.0 : 0.0;
    return v;
}

void IndicatorBatch::ensure_pairs(const std::vector<std::pair<AgentIdx, AgentIdx>>& pairs,
                                  int workers) {
    // Trustee sides first (serial: cheap, shared across pairs).
    for (const auto& [i, j] : pairs) trustee_side(j);

    std::vector<std::vector<std::pair<std::size_t, IndicatorVector>>> chunks(
        std::max(1, workers));
    parallel_for(pairs.size(), workers, [&](std::size_t begin, std::size_t end, int chunk) {
        auto& out = chunks[chunk];
        for (std::size_t p = begin; p < end; ++p) {
            auto [i, j] = pairs[p];
            out.emplace_back(p, compute(i, j, trustee_[j]));
        }
    });
    for (const auto& chunk : chunks) {
        for (const auto& [p, vec] : chunk) {
            auto [i, j] = pairs[p];
            auto& row = cache_[i];
            auto it = std::lower_bound(row.begin(), row.end(), j,
                                       [](const auto& e, AgentIdx x) { return e.first < x; });
            if (it == row.end() || it->first != j) row.insert(it, {j, vec});
        }
    }
}

const IndicatorVector& IndicatorBatch::get(AgentIdx i, AgentIdx j) {
    auto& row = cache_[i];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const auto& e, AgentIdx x) { return e.first < x; });
    if (it != row.end() && it->first == j) return it->second;
    IndicatorVector v = compute(i, j, trustee_side(j));
    it = row.insert(it, {j, v});
    return it->second;
}

void IndicatorBatch::save_csv(const std::string& path,
                              const std::vector<std::pair<AgentIdx, AgentIdx>>& pairs) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "truster,trustee";
    for (const auto& name : IndicatorVector::feature_column_names()) out << ',' << name;
    out << '\n';
    out.precision(17);
    for (const auto& [i, j] : pairs) {
        const IndicatorVector& v = get(i, j);
        out << d_.agent(i).id << ',' << d_.agent(j).id;
        for (double x : v.feature_row()) out << ',' << x;
        out << '\n';
    }
}

}  // namespace trustrec
