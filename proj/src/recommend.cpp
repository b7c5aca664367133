#include "trustrec/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "trustrec/errors.hpp"
#include "trustrec/similarity.hpp"

namespace trustrec {

using nlohmann::json;

namespace {
double clamp_stars(double v) { return std::min(5.0, std::max(1.0, v)); }
}  // namespace

// ----------------------------------------------------------------- MTR

double mtr_predict_rating(AgentIdx i, ItemIdx j, const Dataset& train,
                          const TrustPredictionMatrix& gamma, const MtrConfig& cfg,
                          bool* fallback) {
    if (fallback) *fallback = false;
    if (j < 0 || j >= train.item_count()) {
        if (fallback) *fallback = true;
        return train.global_mean();
    }
    double own_mean = train.agent_has_ratings(i) ? train.agent_mean(i) : train.global_mean();

    const auto& raters = train.raters_of(j);
    struct Influence {
        AgentIdx rater;
        double inf;
        double stars;
    };
    std::vector<Influence> inf;
    inf.reserve(raters.size());
    for (const auto& r : raters) {
        if (r.agent == i) continue;
        double sim = cfg.beta > 0.0
                         ? std::max(0.0, pref_sim(i, r.agent, train, cfg.pref_cutoff) - 1.0)
                         : 0.0;
        double trust = static_cast<double>(gamma.lookup_or_zero(i, r.agent));
        double v = cfg.beta * sim + (1.0 - cfg.beta) * trust;
        if (v != 0.0) inf.push_back({r.agent, v, r.stars});
    }
    if (inf.empty()) return clamp_stars(own_mean);

    // Top-kappa raters by |influence|; rater index breaks ties.
    auto by_influence = [](const Influence& a, const Influence& b) {
        double ia = std::abs(a.inf), ib = std::abs(b.inf);
        if (ia != ib) return ia > ib;
        return a.rater < b.rater;
    };
    if (inf.size() > static_cast<std::size_t>(cfg.kappa)) {
        std::nth_element(inf.begin(), inf.begin() + cfg.kappa, inf.end(), by_influence);
        inf.resize(cfg.kappa);
    }

    double num = 0.0, den = 0.0;
    for (const auto& e : inf) {
        double neighbor_mean = cfg.neighbor_mean == MtrConfig::NeighborMean::Rater
                                   ? train.agent_mean(e.rater)
                                   : train.item_mean(j);
        num += e.inf * (e.stars - neighbor_mean);
        den += std::abs(e.inf);
    }
    if (den == 0.0) return clamp_stars(own_mean);
    return clamp_stars(own_mean + num / den);
}

// ------------------------------------------------------------- TrustMF

TrustMfModel::TrustMfModel(int n_agents, int n_items, TrustMfConfig cfg, double global_mean)
    : cfg_(cfg),
      n_agents_(n_agents),
      n_items_(n_items),
      global_mean_(global_mean),
      b_(static_cast<std::size_t>(n_agents) * cfg.dimensions, 0.0),
      w_(static_cast<std::size_t>(n_agents) * cfg.dimensions, 0.0),
      v_(static_cast<std::size_t>(n_items) * cfg.dimensions, 0.0),
      agent_seen_(n_agents, 0),
      item_seen_(n_items, 0) {}

double TrustMfModel::raw_score(AgentIdx i, ItemIdx t) const {
    const double* b = truster_factors(i);
    const double* v = item_factors(t);
    double s = 0.0;
    for (int k = 0; k < cfg_.dimensions; ++k) s += b[k] * v[k];
    return s;
}

void TrustMfModel::mark_seen(const Dataset& train) {
    for (AgentIdx i = 0; i < train.agent_count() && i < n_agents_; ++i)
        agent_seen_[i] = train.agent_has_ratings(i) ? 1 : 0;
    for (ItemIdx t = 0; t < train.item_count() && t < n_items_; ++t)
        item_seen_[t] = train.item_has_ratings(t) ? 1 : 0;
}

double trustmf_loss(const TrustMfModel& m, const Dataset& train,
                    const TrustPredictionMatrix& gamma) {
    double loss = 0.0;
    for (AgentIdx i = 0; i < train.agent_count(); ++i) {
        for (const Rating& r : train.ratings_of(i)) {
            double e = r.stars - m.raw_score(i, r.item);
            loss += e * e;
        }
    }
    const int d = m.dimensions();
    for (AgentIdx i = 0; i < gamma.size(); ++i) {
        const double* b = m.truster_factors(i);
        for (const auto& [k, value] : gamma.row(i)) {
            const double* w = m.trustee_factors(k);
            double dot = 0.0;
            for (int f = 0; f < d; ++f) dot += b[f] * w[f];
            double e = static_cast<double>(value) - dot;
            loss += m.config().lambda_t * e * e;
        }
    }
    double norms = 0.0;
    for (double x : m.truster_matrix()) norms += x * x;
    for (double x : m.trustee_matrix()) norms += x * x;
    for (double x : m.item_matrix()) norms += x * x;
    return loss + m.config().lambda * norms;
}

TrustMfGradient trustmf_loss_grad(const TrustMfModel& m, const Dataset& train,
                                  const TrustPredictionMatrix& gamma) {
    const int d = m.dimensions();
    TrustMfGradient g;
    g.d_truster.assign(m.truster_matrix().size(), 0.0);
    g.d_trustee.assign(m.trustee_matrix().size(), 0.0);
    g.d_item.assign(m.item_matrix().size(), 0.0);

    for (AgentIdx i = 0; i < train.agent_count(); ++i) {
        const double* b = m.truster_factors(i);
        for (const Rating& r : train.ratings_of(i)) {
            const double* v = m.item_factors(r.item);
            double e = r.stars - m.raw_score(i, r.item);
            g.loss += e * e;
            double* gb = g.d_truster.data() + static_cast<std::size_t>(i) * d;
            double* gv = g.d_item.data() + static_cast<std::size_t>(r.item) * d;
            for (int f = 0; f < d; ++f) {
                gb[f] += -2.0 * e * v[f];
                gv[f] += -2.0 * e * b[f];
            }
        }
    }
    const double lt = m.config().lambda_t;
    for (AgentIdx i = 0; i < gamma.size(); ++i) {
        const double* b = m.truster_factors(i);
        double* gb = g.d_truster.data() + static_cast<std::size_t>(i) * d;
        for (const auto& [k, value] : gamma.row(i)) {
            const double* w = m.trustee_factors(k);
            double dot = 0.0;
            for (int f = 0; f < d; ++f) dot += b[f] * w[f];
            double e = static_cast<double>(value) - dot;
            g.loss += lt * e * e;
            double* gw = g.d_trustee.data() + static_cast<std::size_t>(k) * d;
            for (int f = 0; f < d; ++f) {
                gb[f] += -2.0 * lt * e * w[f];
                gw[f] += -2.0 * lt * e * b[f];
            }
        }
    }
    const double lambda = m.config().lambda;
    double norms = 0.0;
    auto add_reg = [&](const std::vector<double>& mat, std::vector<double>& grad) {
        for (std::size_t x = 0; x < mat.size(); ++x) {
            norms += mat[x] * mat[x];
            grad[x] += 2.0 * lambda * mat[x];
        }
    };
    add_reg(m.truster_matrix(), g.d_truster);
    add_reg(m.trustee_matrix(), g.d_trustee);
    add_reg(m.item_matrix(), g.d_item);
    g.loss += lambda * norms;
    return g;
}

TrustMfModel trustmf_fit(const Dataset& train, const TrustPredictionMatrix& gamma,
                         const TrustMfConfig& cfg, std::uint64_t seed,
                         std::vector<double>* epoch_losses) {
    if (train.rating_count() == 0) throw data_error("trustmf_fit: empty train set");
    if (cfg.dimensions < 1) throw data_error("trustmf_fit: dimensions must be >= 1");

    TrustMfModel m(train.agent_count(), train.item_count(), cfg, train.global_mean());
    m.mark_seen(train);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> init(-0.01, 0.01);
    for (double& x : m.truster_matrix()) x = init(rng);
    for (double& x : m.trustee_matrix()) x = init(rng);
    for (double& x : m.item_matrix()) x = init(rng);

    std::vector<std::pair<AgentIdx, Rating>> rating_samples;
    rating_samples.reserve(train.rating_count());
    for (AgentIdx i = 0; i < train.agent_count(); ++i)
        for (const Rating& r : train.ratings_of(i)) rating_samples.emplace_back(i, r);

    std::vector<std::pair<AgentIdx, std::pair<AgentIdx, std::uint8_t>>> trust_samples;
    for (AgentIdx i = 0; i < gamma.size(); ++i)
        for (const auto& e : gamma.row(i)) trust_samples.emplace_back(i, e);

    const int d = cfg.dimensions;
    const double lr = cfg.learning_rate;
    // Separate RNG streams keep the rating pass identical whatever the trust
    // coverage looks like; with lambda_t = 0 the fit reduces exactly to plain
    // rating factorization.
    std::mt19937_64 rng_ratings(seed ^ 0x5bf03635f0a5b0d5ULL);
    std::mt19937_64 rng_trust(seed ^ 0xc2b2ae3d27d4eb4fULL);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(rating_samples.begin(), rating_samples.end(), rng_ratings);
        for (const auto& [i, r] : rating_samples) {
            double* b = m.truster_factors(i);
            double* v = m.item_factors(r.item);
            double e = r.stars - m.raw_score(i, r.item);
            for (int f = 0; f < d; ++f) {
                double bf = b[f];
                b[f] += lr * (2.0 * e * v[f] - 2.0 * cfg.lambda * bf);
                v[f] += lr * (2.0 * e * bf - 2.0 * cfg.lambda * v[f]);
            }
        }
        if (cfg.lambda_t != 0.0 && !trust_samples.empty()) {
            std::shuffle(trust_samples.begin(), trust_samples.end(), rng_trust);
            for (const auto& [i, entry] : trust_samples) {
                double* b = m.truster_factors(i);
                double* w = m.trustee_factors(entry.first);
                double dot = 0.0;
                for (int f = 0; f < d; ++f) dot += b[f] * w[f];
                double e = static_cast<double>(entry.second) - dot;
                for (int f = 0; f < d; ++f) {
                    double bf = b[f];
                    b[f] += lr * (2.0 * cfg.lambda_t * e * w[f]);
                    w[f] += lr * (2.0 * cfg.lambda_t * e * bf - 2.0 * cfg.lambda * w[f]);
                }
            }
        }
        if (epoch_losses || (epoch % 10) == 9 || epoch + 1 == cfg.epochs) {
            double loss = trustmf_loss(m, train, gamma);
            if (!std::isfinite(loss)) throw numeric_error("trustmf_fit: loss diverged");
            if (epoch_losses) epoch_losses->push_back(loss);
        }
    }
    return m;
}

double trustmf_predict_rating(const TrustMfModel& m, AgentIdx i, ItemIdx t) {
    if (!m.agent_seen(i) || !m.item_seen(t)) return m.global_mean();
    return clamp_stars(m.raw_score(i, t));
}

void TrustMfModel::save_json(const std::string& path, const Dataset& d) const {
    json j;
    j["dimensions"] = cfg_.dimensions;
    j["lambda"] = cfg_.lambda;
    j["lambda_t"] = cfg_.lambda_t;
    j["global_mean"] = global_mean_;
    json agents = json::array();
    for (AgentIdx i = 0; i < n_agents_; ++i) agents.push_back(d.agent(i).id);
    j["agents"] = agents;
    json items = json::array();
    for (ItemIdx t = 0; t < n_items_; ++t) items.push_back(d.item(t).id);
    j["items"] = items;
    j["truster_factors"] = b_;
    j["trustee_factors"] = w_;
    j["item_factors"] = v_;
    j["agent_seen"] = std::vector<int>(agent_seen_.begin(), agent_seen_.end());
    j["item_seen"] = std::vector<int>(item_seen_.begin(), item_seen_.end());
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << j.dump() << '\n';
}

TrustMfModel TrustMfModel::load_json(const std::string& path, const Dataset& d) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    json j = json::parse(in);
    TrustMfConfig cfg;
    cfg.dimensions = j.at("dimensions").get<int>();
    cfg.lambda = j.at("lambda").get<double>();
    cfg.lambda_t = j.at("lambda_t").get<double>();
    auto agents = j.at("agents").get<std::vector<std::string>>();
    auto items = j.at("items").get<std::vector<std::string>>();
    TrustMfModel m(static_cast<int>(agents.size()), static_cast<int>(items.size()), cfg,
                   j.at("global_mean").get<double>());
    for (std::size_t i = 0; i < agents.size(); ++i)
        if (d.agent(static_cast<AgentIdx>(i)).id != agents[i])
            throw data_error("model/dataset agent universe mismatch");
    m.b_ = j.at("truster_factors").get<std::vector<double>>();
    m.w_ = j.at("trustee_factors").get<std::vector<double>>();
    m.v_ = j.at("item_factors").get<std::vector<double>>();
    auto as = j.at("agent_seen").get<std::vector<int>>();
    auto is = j.at("item_seen").get<std::vector<int>>();
    m.agent_seen_.assign(as.begin(), as.end());
    m.item_seen_.assign(is.begin(), is.end());
    return m;
}

// --------------------------------------------------------------- metrics

EvalResult evaluate_predictions(const std::vector<PredictionRow>& preds) {
    if (preds.empty()) throw data_error("evaluate_predictions: empty prediction set");
    double abs_sum = 0.0, sq_sum = 0.0;
    for (const auto& p : preds) {
        double e = p.predicted - p.actual;
        abs_sum += std::abs(e);
        sq_sum += e * e;
    }
    EvalResult r;
    r.n = preds.size();
    r.mae = abs_sum / static_cast<double>(preds.size());
    r.rmse = std::sqrt(sq_sum / static_cast<double>(preds.size()));
    return r;
}

EvalResult evaluate_predictions(const std::vector<PredictionRow>& preds,
                                const std::vector<TestRating>& test) {
    if (test.empty()) throw data_error("evaluate_predictions: empty test set");
    std::map<std::pair<AgentIdx, ItemIdx>, double> lookup;
    for (const auto& p : preds) lookup[{p.agent, p.item}] = p.predicted;
    std::vector<PredictionRow> joined;
    joined.reserve(test.size());
    for (const auto& t : test) {
        auto it = lookup.find({t.agent, t.item});
        if (it == lookup.end()) throw data_error("evaluate_predictions: missing prediction");
        joined.push_back(PredictionRow{t.agent, t.item, it->second, t.stars});
    }
    return evaluate_predictions(joined);
}

void save_predictions_csv(const std::vector<PredictionRow>& preds, const std::string& path,
                          const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "agent_id,item_id,predicted,actual\n";
    out.precision(17);
    for (const auto& p : preds)
        out << d.agent(p.agent).id << ',' << d.item(p.item).id << ',' << p.predicted << ','
            << p.actual << '\n';
}

std::vector<PredictionRow> load_predictions_csv(const std::string& path, const Dataset& d) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::vector<PredictionRow> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, t, p, act;
        if (!std::getline(ss, a, ',') || !std::getline(ss, t, ',') || !std::getline(ss, p, ',') ||
            !std::getline(ss, act))
            throw data_error("bad prediction row: " + line);
        out.push_back(PredictionRow{d.require_agent(a), d.require_item(t), std::stod(p),
                                    std::stod(act)});
    }
    return out;
}

}  // namespace trustrec
