#include "trustrec/trustlink.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trustrec/errors.hpp"
#include "trustrec/similarity.hpp"
#include "trustrec/util.hpp"

namespace trustrec {

using nlohmann::json;

bool link_holds(LinkTarget target, AgentIdx i, AgentIdx j, const Dataset& d, int pref_cutoff) {
    if (target == LinkTarget::Friendship) return d.friends_with(i, j);
    return pref_sim(i, j, d, pref_cutoff) > 1.0;
}

std::vector<std::string> feature_names_for_target(LinkTarget target) {
    const char* excluded = target == LinkTarget::Friendship ? "are_friends" : "benevolence";
    std::vector<std::string> names;
    for (const auto& n : IndicatorVector::feature_column_names())
        if (n != excluded) names.push_back(n);
    return names;
}

std::vector<double> feature_row_for_target(const IndicatorVector& v, LinkTarget target) {
    auto all = v.feature_row();
    const auto& cols = IndicatorVector::feature_column_names();
    const char* excluded = target == LinkTarget::Friendship ? "are_friends" : "benevolence";
    std::vector<double> out;
    out.reserve(all.size() - 1);
    for (std::size_t c = 0; c < cols.size(); ++c)
        if (cols[c] != excluded) out.push_back(all[c]);
    return out;
}

TrainingSet build_training_set(const std::vector<AgentIdx>& cluster_agents, LinkTarget target,
                               IndicatorBatch& indicators, const Dataset& d,
                               const NeighborhoodIndex& n, std::uint64_t seed) {
    TrainingSet ts;
    ts.feature_names = feature_names_for_target(target);

    std::vector<std::pair<AgentIdx, AgentIdx>> positives, neighborhood_negatives;
    for (AgentIdx i : cluster_agents) {
        for (AgentIdx j : n.of(i)) {
            if (link_holds(target, i, j, d)) {
                positives.emplace_back(i, j);
            } else {
                neighborhood_negatives.emplace_back(i, j);
            }
        }
    }
    if (positives.empty()) return ts;  // caller treats an empty set as a flag

    std::mt19937_64 rng(seed);
    std::vector<std::pair<AgentIdx, AgentIdx>> negatives;
    std::shuffle(neighborhood_negatives.begin(), neighborhood_negatives.end(), rng);
    std::size_t want = positives.size();
    for (std::size_t p = 0; p < neighborhood_negatives.size() && negatives.size() < want; ++p)
        negatives.push_back(neighborhood_negatives[p]);

    // Fall back to non-neighborhood pairs when neighborhood negatives run out.
    if (negatives.size() < want) {
        std::uniform_int_distribution<std::size_t> pick_truster(0, cluster_agents.size() - 1);
        std::uniform_int_distribution<int> pick_trustee(0, d.agent_count() - 1);
        std::set<std::pair<AgentIdx, AgentIdx>> used(negatives.begin(), negatives.end());
        std::size_t attempts = 0, cap = want * 1000 + 1000;
        while (negatives.size() < want && attempts++ < cap) {
            AgentIdx i = cluster_agents[pick_truster(rng)];
            AgentIdx j = pick_trustee(rng);
            if (i == j || n.contains(i, j)) continue;
            if (link_holds(target, i, j, d)) continue;
            if (!used.insert({i, j}).second) continue;
            negatives.emplace_back(i, j);
        }
    }

    std::vector<std::pair<AgentIdx, AgentIdx>> all_pairs = positives;
    all_pairs.insert(all_pairs.end(), negatives.begin(), negatives.end());
    indicators.ensure_pairs(all_pairs, 1);

    ts.examples.reserve(positives.size() + negatives.size());
    for (const auto& [i, j] : positives)
        ts.examples.push_back(LinkExample{i, j, feature_row_for_target(indicators.get(i, j), target), 1});
    for (const auto& [i, j] : negatives)
        ts.examples.push_back(LinkExample{i, j, feature_row_for_target(indicators.get(i, j), target), 0});
    ts.n_positive = positives.size();
    ts.n_negative = negatives.size();
    return ts;
}

// ---------------------------------------------------- logistic regression

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Cholesky solve of the (symmetric positive definite) Newton system.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t n) {
    for (std::size_t c = 0; c < n; ++c) {
        double diag = a[c * n + c];
        for (std::size_t k = 0; k < c; ++k) diag -= a[c * n + k] * a[c * n + k];
        if (diag <= 0.0) throw numeric_error("logistic: Newton system not positive definite");
        diag = std::sqrt(diag);
        a[c * n + c] = diag;
        for (std::size_t r = c + 1; r < n; ++r) {
            double v = a[r * n + c];
            for (std::size_t k = 0; k < c; ++k) v -= a[r * n + k] * a[c * n + k];
            a[r * n + c] = v / diag;
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < r; ++k) b[r] -= a[r * n + k] * b[k];
        b[r] /= a[r * n + r];
    }
    for (std::size_t r = n; r-- > 0;) {
        for (std::size_t k = r + 1; k < n; ++k) b[r] -= a[k * n + r] * b[k];
        b[r] /= a[r * n + r];
    }
    return b;
}

}  // namespace

double LinkClassifier::predict_probability(std::span<const double> raw) const {
    double z = bias;
    for (std::size_t f = 0; f < weights.size(); ++f)
        z += weights[f] * (raw[f] - feature_means[f]) / feature_scales[f];
    return sigmoid(z);
}

double LinkClassifier::training_accuracy(const TrainingSet& ts) const {
    if (ts.examples.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& ex : ts.examples) {
        int pred = predict_probability(ex.features) > 0.5 ? 1 : 0;
        if (pred == ex.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ts.examples.size());
}

LinkClassifier train_link_classifier(const TrainingSet& ts, const LogisticConfig& cfg) {
    const std::size_t m = ts.examples.size();
    if (m < 2) throw data_error("train_link_classifier: need at least 2 examples");
    const std::size_t f = ts.examples[0].features.size();

    bool any_pos = false, any_neg = false;
    for (const auto& ex : ts.examples) {
        if (ex.features.size() != f) throw data_error("inconsistent feature width");
        for (double x : ex.features)
            if (!std::isfinite(x)) throw data_error("non-finite feature value");
        (ex.label ? any_pos : any_neg) = true;
    }
    if (!any_pos || !any_neg) throw data_error("train_link_classifier: single-class input");

    LinkClassifier c;
    c.feature_names = ts.feature_names;
    c.feature_means.assign(f, 0.0);
    c.feature_scales.assign(f, 1.0);
    for (const auto& ex : ts.examples)
        for (std::size_t k = 0; k < f; ++k) c.feature_means[k] += ex.features[k];
    for (std::size_t k = 0; k < f; ++k) c.feature_means[k] /= static_cast<double>(m);
    std::vector<double> var(f, 0.0);
    for (const auto& ex : ts.examples)
        for (std::size_t k = 0; k < f; ++k) {
            double dev = ex.features[k] - c.feature_means[k];
            var[k] += dev * dev;
        }
    for (std::size_t k = 0; k < f; ++k) {
        double sd = std::sqrt(var[k] / static_cast<double>(m));
        c.feature_scales[k] = sd > 0.0 ? sd : 1.0;  // constant column stays centered
    }

    // Standardized design matrix with an intercept column at the end.
    const std::size_t p = f + 1;
    std::vector<double> x(m * p);
    for (std::size_t e = 0; e < m; ++e) {
        for (std::size_t k = 0; k < f; ++k)
            x[e * p + k] = (ts.examples[e].features[k] - c.feature_means[k]) / c.feature_scales[k];
        x[e * p + f] = 1.0;
    }

    // Newton iterations on the L2-penalized negative log-likelihood; the
    // intercept is not penalized.
    std::vector<double> theta(p, 0.0);
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        std::vector<double> grad(p, 0.0), hess(p * p, 0.0);
        for (std::size_t e = 0; e < m; ++e) {
            const double* row = &x[e * p];
            double z = 0.0;
            for (std::size_t k = 0; k < p; ++k) z += theta[k] * row[k];
            double mu = sigmoid(z);
            double err = mu - static_cast<double>(ts.examples[e].label);
            double wgt = std::max(mu * (1.0 - mu), 1e-10);
            for (std::size_t k = 0; k < p; ++k) {
                grad[k] += err * row[k];
                for (std::size_t l = k; l < p; ++l) hess[k * p + l] += wgt * row[k] * row[l];
            }
        }
        for (std::size_t k = 0; k < f; ++k) {
            grad[k] += cfg.l2 * theta[k];
            hess[k * p + k] += cfg.l2;
        }
        hess[f * p + f] += 1e-12;  // keep the system SPD when mu is saturated
        for (std::size_t k = 0; k < p; ++k)
            for (std::size_t l = 0; l < k; ++l) hess[k * p + l] = hess[l * p + k];

        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm < cfg.tolerance * static_cast<double>(m)) break;

        std::vector<double> step = solve_spd(std::move(hess), grad, p);
        for (std::size_t k = 0; k < p; ++k) {
            theta[k] -= step[k];
            if (!std::isfinite(theta[k])) throw numeric_error("logistic: diverged");
        }
    }

    c.weights.assign(theta.begin(), theta.begin() + f);
    c.bias = theta[f];
    return c;
}

ClusterClassifiers assign_classifiers(const ClusterAssignment& ca,
                                      const std::vector<TrainingSet>& per_cluster_data,
                                      const TrainingSet& global_sample,
                                      const ClassifierThresholds& thresholds,
                                      const LogisticConfig& cfg, int workers) {
    if (static_cast<int>(per_cluster_data.size()) != ca.k)
        throw data_error("assign_classifiers: cluster data count mismatch");

    ClusterClassifiers out;
    out.global = std::make_shared<LinkClassifier>(train_link_classifier(global_sample, cfg));
    out.per_cluster.assign(ca.k, out.global);
    out.own.assign(ca.k, false);

    auto sizes = ca.cluster_sizes();
    std::vector<int> eligible;
    for (int c = 0; c < ca.k; ++c) {
        const TrainingSet& ts = per_cluster_data[c];
        if (sizes[c] >= thresholds.min_agents &&
            static_cast<long long>(ts.n_positive) >= thresholds.min_positive_links &&
            ts.n_negative > 0)
            eligible.push_back(c);
    }

    std::vector<std::shared_ptr<const LinkClassifier>> trained(eligible.size());
    parallel_for(eligible.size(), workers, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t e = begin; e < end; ++e) {
            auto model = train_link_classifier(per_cluster_data[eligible[e]], cfg);
            model.trained_on = eligible[e];
            trained[e] = std::make_shared<const LinkClassifier>(std::move(model));
        }
    });
    for (std::size_t e = 0; e < eligible.size(); ++e) {
        out.per_cluster[eligible[e]] = trained[e];
        out.own[eligible[e]] = true;
    }
    return out;
}

// -------------------------------------------------- TrustPredictionMatrix

TrustPredictionMatrix::TrustPredictionMatrix(int n_agents) : rows_(n_agents) {}

void TrustPredictionMatrix::set(AgentIdx i, AgentIdx j, int value) {
    auto& row = rows_[i];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const auto& e, AgentIdx x) { return e.first < x; });
    if (it != row.end() && it->first == j) {
        positives_ += (value ? 1 : 0) - (it->second ? 1 : 0);
        it->second = static_cast<std::uint8_t>(value);
        return;
    }
    row.insert(it, {j, static_cast<std::uint8_t>(value)});
    ++covered_;
    if (value) ++positives_;
}

std::optional<int> TrustPredictionMatrix::lookup(AgentIdx i, AgentIdx j) const {
    if (i < 0 || i >= size()) return std::nullopt;
    const auto& row = rows_[i];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const auto& e, AgentIdx x) { return e.first < x; });
    if (it != row.end() && it->first == j) return static_cast<int>(it->second);
    return std::nullopt;
}

int TrustPredictionMatrix::lookup_or_zero(AgentIdx i, AgentIdx j) const {
    auto v = lookup(i, j);
    return v ? *v : 0;
}

std::uint64_t TrustPredictionMatrix::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        h = fnv1a_u64(i, h);
        for (const auto& [j, v] : rows_[i]) {
            h = fnv1a_u64(static_cast<std::uint64_t>(j), h);
            h = fnv1a_u64(v, h);
        }
    }
    return h;
}

void TrustPredictionMatrix::save_csv(const std::string& path, const Dataset& d) const {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "truster,trustee,link\n";
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (const auto& [j, v] : rows_[i])
            if (v) out << d.agent(static_cast<AgentIdx>(i)).id << ',' << d.agent(j).id << ",1\n";
    std::ofstream cov(path + ".coverage.csv");
    if (!cov) throw data_error("cannot write " + path + ".coverage.csv");
    cov << "truster,trustee\n";
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (const auto& [j, v] : rows_[i])
            cov << d.agent(static_cast<AgentIdx>(i)).id << ',' << d.agent(j).id << '\n';
}

TrustPredictionMatrix TrustPredictionMatrix::load_csv(const std::string& path, const Dataset& d) {
    std::ifstream cov(path + ".coverage.csv");
    if (!cov) throw data_error("cannot open " + path + ".coverage.csv");
    TrustPredictionMatrix m(d.agent_count());
    std::string line;
    std::getline(cov, line);
    while (std::getline(cov, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw data_error("bad coverage row: " + line);
        m.set(d.require_agent(line.substr(0, comma)), d.require_agent(line.substr(comma + 1)), 0);
    }
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, v;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, v))
            throw data_error("bad link row: " + line);
        m.set(d.require_agent(a), d.require_agent(b), 1);
    }
    return m;
}

TrustPredictionMatrix TrustPredictionMatrix::from_friendships(const Dataset& d,
                                                              const NeighborhoodIndex& n) {
    TrustPredictionMatrix m(d.agent_count());
    for (AgentIdx i = 0; i < d.agent_count(); ++i)
        for (AgentIdx j : n.of(i)) m.set(i, j, d.friends_with(i, j) ? 1 : 0);
    return m;
}

TrustPredictionMatrix predict_trust_matrix(const ClusterAssignment& ca,
                                           const ClusterClassifiers& classifiers,
                                           IndicatorBatch& indicators, const NeighborhoodIndex& n,
                                           LinkTarget target, int workers) {
    auto pairs = n.ordered_pairs();
    indicators.ensure_pairs(pairs, workers);

    std::vector<std::uint8_t> verdict(pairs.size(), 0);
    parallel_for(pairs.size(), workers, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t p = begin; p < end; ++p) {
            auto [i, j] = pairs[p];
            const LinkClassifier& c = classifiers.for_cluster(ca.assignment[i]);
            auto features = feature_row_for_target(indicators.get(i, j), target);
            verdict[p] = c.predict_probability(features) > 0.5 ? 1 : 0;
        }
    });

    TrustPredictionMatrix m(static_cast<int>(ca.assignment.size()));
    for (std::size_t p = 0; p < pairs.size(); ++p) m.set(pairs[p].first, pairs[p].second, verdict[p]);
    return m;
}

// ------------------------------------------------------------- JSON model

namespace {

json classifier_to_json(const LinkClassifier& c) {
    json j;
    j["weights"] = c.weights;
    j["bias"] = c.bias;
    j["feature_means"] = c.feature_means;
    j["feature_scales"] = c.feature_scales;
    j["feature_names"] = c.feature_names;
    j["trained_on"] = c.trained_on;
    return j;
}

LinkClassifier classifier_from_json(const json& j) {
    LinkClassifier c;
    c.weights = j.at("weights").get<std::vector<double>>();
    c.bias = j.at("bias").get<double>();
    c.feature_means = j.at("feature_means").get<std::vector<double>>();
    c.feature_scales = j.at("feature_scales").get<std::vector<double>>();
    c.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    c.trained_on = j.at("trained_on").get<int>();
    return c;
}

}  // namespace

void save_classifiers_json(const ClusterClassifiers& cc, const std::string& path) {
    json j;
    j["global"] = classifier_to_json(*cc.global);
    json per = json::array();
    for (std::size_t c = 0; c < cc.per_cluster.size(); ++c) {
        json entry;
        entry["cluster"] = c;
        entry["own"] = static_cast<bool>(cc.own[c]);
        if (cc.own[c]) entry["classifier"] = classifier_to_json(*cc.per_cluster[c]);
        per.push_back(entry);
    }
    j["per_cluster"] = per;
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

ClusterClassifiers load_classifiers_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    json j = json::parse(in);
    ClusterClassifiers cc;
    cc.global = std::make_shared<const LinkClassifier>(classifier_from_json(j.at("global")));
    const auto& per = j.at("per_cluster");
    cc.per_cluster.assign(per.size(), cc.global);
    cc.own.assign(per.size(), false);
    for (const auto& entry : per) {
        std::size_t c = entry.at("cluster").get<std::size_t>();
        if (entry.at("own").get<bool>()) {
            cc.per_cluster[c] =
                std::make_shared<const LinkClassifier>(classifier_from_json(entry.at("classifier")));
            cc.own[c] = true;
        }
    }
    return cc;
}

}  // namespace trustrec
