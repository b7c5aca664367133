#include "trustrec/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "trustrec/errors.hpp"

namespace trustrec {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string padded_id(const char* prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%05d", prefix, i);
    return buf;
}

// Default weight patterns: each cluster leans on a different trustee feature,
// alternating sign so a population-wide fit cannot satisfy every cluster.
std::vector<std::vector<double>> default_weights(int k, double scale) {
    std::vector<std::vector<double>> w(k, std::vector<double>(SynthConfig::n_trust_features, 0.0));
    for (int c = 0; c < k; ++c) {
        int feature = c % SynthConfig::n_trust_features;
        double sign = (c / SynthConfig::n_trust_features) % 2 == 0 ? 1.0 : -1.0;
        w[c][feature] = sign * scale;
        if (k > 1) w[c][(feature + 1) % SynthConfig::n_trust_features] = -0.5 * sign * scale;
    }
    return w;
}

}  // namespace

SynthResult generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
    if (cfg.n_agents < 1 || cfg.n_items < 1 || cfg.k_clusters < 1)
        throw data_error("generate_synthetic: counts must be positive");
    if (cfg.k_clusters > cfg.n_agents)
        throw data_error("generate_synthetic: more clusters than agents");
    if (cfg.ratings_per_agent > cfg.n_items)
        throw data_error("generate_synthetic: ratings_per_agent exceeds n_items");
    if (!(cfg.p_friend_intra > 0.0 && cfg.p_friend_intra < 1.0) ||
        !(cfg.p_friend_inter > 0.0 && cfg.p_friend_inter < 1.0))
        throw data_error("generate_synthetic: friendship probabilities must be in (0, 1)");

    std::vector<std::vector<double>> weights = cfg.trust_weights;
    if (weights.empty()) weights = default_weights(cfg.k_clusters, cfg.trust_weight_scale);
    if (static_cast<int>(weights.size()) != cfg.k_clusters)
        throw data_error("generate_synthetic: need one weight vector per cluster");
    for (const auto& w : weights)
        if (static_cast<int>(w.size()) != SynthConfig::n_trust_features)
            throw data_error("generate_synthetic: weight vector has wrong length");

    std::mt19937_64 rng(seed);

    ClusterAssignment planted;
    planted.k = cfg.k_clusters;
    planted.assignment.resize(cfg.n_agents);
    for (int i = 0; i < cfg.n_agents; ++i) planted.assignment[i] = i % cfg.k_clusters;

    // Trustee profile features feeding the link model. Ranges are fixed so the
    // standardization below is exact.
    struct Profile {
        int elite;       // 0..8
        int fans;        // 0..100
        int profile_c;   // 0..200
        int content_c;   // 0..300
        double age;      // 1..10 years
    };
    std::uniform_int_distribution<int> d_elite(0, 8), d_fans(0, 100), d_prof(0, 200),
        d_content(0, 300);
    std::uniform_real_distribution<double> d_age(1.0, 10.0);
    std::vector<Profile> profiles(cfg.n_agents);
    for (auto& p : profiles)
        p = {d_elite(rng), d_fans(rng), d_prof(rng), d_content(rng), d_age(rng)};

    auto standardized = [](const Profile& p) {
        // (x - mean) / sd for the uniform ranges above.
        auto z = [](double x, double lo, double hi) {
            double mean = 0.5 * (lo + hi);
            double sd = (hi - lo) / std::sqrt(12.0);
            return (x - mean) / sd;
        };
        return std::array<double, SynthConfig::n_trust_features>{
            z(p.elite, 0, 8), z(p.fans, 0, 100), z(p.profile_c, 0, 200), z(p.content_c, 0, 300)};
    };

    // Per-cluster preference centers per item.
    std::uniform_real_distribution<double> d_center(cfg.center_low, cfg.center_high);
    std::vector<std::vector<double>> centers(cfg.k_clusters, std::vector<double>(cfg.n_items));
    for (auto& row : centers)
        for (double& c : row) c = d_center(rng);

    DatasetBuilder b;
    for (int i = 0; i < cfg.n_agents; ++i) {
        DatasetBuilder::AgentRecord rec;
        rec.id = padded_id("a", i);
        rec.elite_years = profiles[i].elite;
        rec.fans = profiles[i].fans;
        rec.profile_compliments = profiles[i].profile_c;
        rec.content_compliments = profiles[i].content_c;
        rec.account_age_years = profiles[i].age;
        b.add_agent(std::move(rec));
    }
    for (int t = 0; t < cfg.n_items; ++t) {
        // A couple of category tags so category_jacc has signal.
        std::vector<std::string> cats = {"Synthetic", t % 2 ? "Odd" : "Even"};
        b.add_item(padded_id("i", t), std::move(cats));
    }

    // Ratings: cluster center plus noise, clamped to the star range.
    std::normal_distribution<double> d_noise(0.0, cfg.rating_noise);
    std::vector<int> item_pool(cfg.n_items);
    for (int t = 0; t < cfg.n_items; ++t) item_pool[t] = t;
    for (int i = 0; i < cfg.n_agents; ++i) {
        int c = planted.assignment[i];
        std::shuffle(item_pool.begin(), item_pool.end(), rng);
        for (int r = 0; r < cfg.ratings_per_agent; ++r) {
            int t = item_pool[r];
            double stars = centers[c][t] + d_noise(rng);
            stars = std::min(5.0, std::max(1.0, stars));
            b.add_rating(padded_id("a", i), padded_id("i", t), stars);
        }
    }

    // Friendships from the logistic model: base rate by same/cross cluster,
    // modulated by the cluster weights applied to both endpoints' features.
    double bias_intra = logit(cfg.p_friend_intra);
    double bias_inter = logit(cfg.p_friend_inter);
    std::uniform_real_distribution<double> d_unit(0.0, 1.0);
    for (int i = 0; i < cfg.n_agents; ++i) {
        auto zi = standardized(profiles[i]);
        for (int j = i + 1; j < cfg.n_agents; ++j) {
            auto zj = standardized(profiles[j]);
            int ci = planted.assignment[i], cj = planted.assignment[j];
            double z;
            if (ci == cj) {
                double drive = 0.0;
                for (int f = 0; f < SynthConfig::n_trust_features; ++f)
                    drive += weights[ci][f] * 0.5 * (zi[f] + zj[f]);
                z = bias_intra + drive;
            } else {
                double drive = 0.0;
                for (int f = 0; f < SynthConfig::n_trust_features; ++f)
                    drive += 0.5 * (weights[ci][f] * zj[f] + weights[cj][f] * zi[f]);
                z = bias_inter + drive;
            }
            if (d_unit(rng) < sigmoid(z))
                b.add_mutual_friendship(padded_id("a", i), padded_id("a", j));
        }
    }

    SynthResult out{b.finalize(), std::move(planted), std::move(weights)};
    return out;
}

}  // namespace trustrec
