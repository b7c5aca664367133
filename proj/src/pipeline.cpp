#include "trustrec/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "trustrec/errors.hpp"
#include "trustrec/util.hpp"

namespace trustrec {

using nlohmann::json;

const char* to_string(ExperimentName name) {
    switch (name) {
        case ExperimentName::RealFriends: return "RealFriends";
        case ExperimentName::FriendPrediction: return "FriendPrediction";
        case ExperimentName::PrefPredict: return "PrefPredict";
        case ExperimentName::PrefClusterPrefPredict: return "PrefCluster-PrefPredict";
        case ExperimentName::PrefClusterFriendPredict: return "PrefCluster-FriendPredict";
        case ExperimentName::SocialClusterPrefPredict: return "SocialCluster-PrefPredict";
        case ExperimentName::SocialClusterFriendPredict: return "SocialCluster-FriendPredict";
        case ExperimentName::RandomClusterFriendPredict: return "RandomCluster-FriendPredict";
    }
    return "?";
}

const char* to_string(RecommenderKind r) { return r == RecommenderKind::MTR ? "MTR" : "TrustMF"; }

std::optional<ExperimentName> experiment_from_string(const std::string& s) {
    for (ExperimentName n :
         {ExperimentName::RealFriends, ExperimentName::FriendPrediction, ExperimentName::PrefPredict,
          ExperimentName::PrefClusterPrefPredict, ExperimentName::PrefClusterFriendPredict,
          ExperimentName::SocialClusterPrefPredict, ExperimentName::SocialClusterFriendPredict,
          ExperimentName::RandomClusterFriendPredict})
        if (s == to_string(n)) return n;
    return std::nullopt;
}

std::optional<RecommenderKind> recommender_from_string(const std::string& s) {
    if (s == "MTR" || s == "mtr") return RecommenderKind::MTR;
    if (s == "TrustMF" || s == "trustmf") return RecommenderKind::TrustMF;
    return std::nullopt;
}

const char* to_string(SweepParam p) {
    switch (p) {
        case SweepParam::K: return "k";
        case SweepParam::Beta: return "beta";
        case SweepParam::LambdaT: return "lambda_t";
        case SweepParam::Kappa: return "kappa";
    }
    return "?";
}

std::optional<SweepParam> sweep_param_from_string(const std::string& s) {
    for (SweepParam p : {SweepParam::K, SweepParam::Beta, SweepParam::LambdaT, SweepParam::Kappa})
        if (s == to_string(p)) return p;
    return std::nullopt;
}

namespace {

struct StagePlan {
    bool cluster = false;          // run a similarity-based clustering step
    bool random_cluster = false;   // random-partition control
    SimKind cluster_kind = SimKind::Social;
    bool predict_links = false;    // false: RealFriends pass-through
    LinkTarget target = LinkTarget::Friendship;
};

StagePlan plan_for(const ExperimentSpec& spec) {
    StagePlan p;
    switch (spec.name) {
        case ExperimentName::RealFriends:
            break;
        case ExperimentName::FriendPrediction:
            p.predict_links = true;
            break;
        case ExperimentName::PrefPredict:
            p.predict_links = true;
            p.target = LinkTarget::PositiveCorrelation;
            break;
        case ExperimentName::PrefClusterPrefPredict:
            p.cluster = true;
            p.cluster_kind = SimKind::Preference;
            p.predict_links = true;
            p.target = LinkTarget::PositiveCorrelation;
            break;
        case ExperimentName::PrefClusterFriendPredict:
            p.cluster = true;
            p.cluster_kind = SimKind::Preference;
            p.predict_links = true;
            break;
        case ExperimentName::SocialClusterPrefPredict:
            p.cluster = true;
            p.cluster_kind = SimKind::Social;
            p.predict_links = true;
            p.target = LinkTarget::PositiveCorrelation;
            break;
        case ExperimentName::SocialClusterFriendPredict:
            p.cluster = true;
            p.cluster_kind = SimKind::Social;
            p.predict_links = true;
            break;
        case ExperimentName::RandomClusterFriendPredict:
            p.random_cluster = true;
            p.predict_links = true;
            break;
    }
    return p;
}

void validate(const ExperimentSpec& spec) {
    const StagePlan p = plan_for(spec);
    if ((p.cluster || p.random_cluster) && spec.k < 1)
        throw std::invalid_argument("clustered experiment requires k >= 1");
    if (!(spec.mtr.beta >= 0.0 && spec.mtr.beta <= 1.0))
        throw std::invalid_argument("beta must be in [0, 1]");
    if (spec.mtr.kappa < 1) throw std::invalid_argument("kappa must be >= 1");
    if (spec.folds == 0 && !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
        throw std::invalid_argument("test_fraction must be in (0, 1)");
    if (spec.folds < 0 || spec.folds == 1) throw std::invalid_argument("folds must be 0 or >= 2");
    if (spec.seeds.empty()) throw std::invalid_argument("at least one seed required");
    if (spec.trustmf.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
}

std::string cache_key(std::uint64_t train_fp, const std::string& stage, std::uint64_t params_fp) {
    std::ostringstream ss;
    ss << stage << '-' << std::hex << train_fp << '-' << params_fp;
    return ss.str();
}

// One train/test pass: cluster, predict links, recommend, evaluate.
SeedOutcome run_once(const ExperimentSpec& spec, const Dataset& train,
                     const std::vector<TestRating>& test, std::uint64_t seed,
                     std::optional<ClusterQuality>* quality_out) {
    const StagePlan p = plan_for(spec);
    SeedOutcome out;
    out.seed = seed;

    NeighborhoodIndex nbr = NeighborhoodIndex::build(train);
    std::uint64_t train_fp = train.fingerprint();

    // --- clustering ---
    ClusterAssignment clusters;
    if (p.random_cluster) {
        clusters = random_partition(train.agent_count(), spec.k, derive_seed(seed, "cluster"));
    } else if (p.cluster && spec.k > 1) {
        auto pairs = nbr.unordered_pairs();
        SimilarityMatrix sim(p.cluster_kind, train.agent_count());
        bool loaded = false;
        std::string sim_key;
        if (!spec.cache_dir.empty()) {
            std::uint64_t params = fnv1a_u64(static_cast<std::uint64_t>(p.cluster_kind),
                                             fnv1a_u64(spec.mtr.pref_cutoff));
            sim_key = spec.cache_dir + "/" +
                      cache_key(train_fp, "sim", params) + ".csv";
            if (std::filesystem::exists(sim_key)) {
                sim = SimilarityMatrix::load_csv(sim_key, train);
                loaded = true;
            }
        }
        if (!loaded) {
            sim = pairwise_similarity(train, p.cluster_kind, pairs, spec.workers,
                                      spec.mtr.pref_cutoff);
            if (!sim_key.empty()) sim.save_csv(sim_key, train);
        }
        clusters = cluster_kmeans_modified(sim, spec.k, spec.kmeans_max_iter);
        if (quality_out) {
            ClusterQuality q;
            q.mean_intra = mean_intra_distance(clusters, sim);
            q.sample_size = std::min(spec.silhouette_sample, train.agent_count());
            q.silhouette = silhouette(clusters, sim, q.sample_size, derive_seed(seed, "silhouette"));
            *quality_out = q;
        }
    } else {
        // Unclustered (or k == 1): everyone in one cluster, no similarity pass.
        clusters.k = 1;
        clusters.assignment.assign(train.agent_count(), 0);
    }

    // --- trust link prediction ---
    TrustPredictionMatrix gamma;
    IndicatorBatch indicators(train, spec.mtr.pref_cutoff);
    if (!p.predict_links) {
        gamma = TrustPredictionMatrix::from_friendships(train, nbr);
    } else {
        std::string gamma_key;
        bool loaded = false;
        if (!spec.cache_dir.empty()) {
            std::uint64_t params = fnv1a_u64(static_cast<std::uint64_t>(p.target));
            params = fnv1a_u64(static_cast<std::uint64_t>(spec.k), params);
            params = fnv1a_u64(derive_seed(seed, "links"), params);
            params = fnv1a_u64(static_cast<std::uint64_t>(spec.thresholds.min_agents), params);
            params = fnv1a_u64(static_cast<std::uint64_t>(spec.thresholds.min_positive_links), params);
            params = fnv1a_u64(p.random_cluster ? 2 : (p.cluster ? 1 : 0), params);
            params = fnv1a_u64(static_cast<std::uint64_t>(p.cluster_kind), params);
            gamma_key = spec.cache_dir + "/" + cache_key(train_fp, "gamma", params) + ".csv";
            if (std::filesystem::exists(gamma_key) &&
                std::filesystem::exists(gamma_key + ".coverage.csv")) {
                gamma = TrustPredictionMatrix::load_csv(gamma_key, train);
                loaded = true;
            }
        }
        if (!loaded) {
            auto members = clusters.members();
            std::vector<TrainingSet> per_cluster(clusters.k);
            for (int c = 0; c < clusters.k; ++c)
                per_cluster[c] = build_training_set(members[c], p.target, indicators, train, nbr,
                                                    derive_seed(seed, "negatives") + c);

            std::vector<AgentIdx> sample_agents;
            if (spec.global_sample_agents > 0 &&
                spec.global_sample_agents < train.agent_count()) {
                std::vector<AgentIdx> all(train.agent_count());
                for (int i = 0; i < train.agent_count(); ++i) all[i] = i;
                std::mt19937_64 rng(derive_seed(seed, "global-sample"));
                std::shuffle(all.begin(), all.end(), rng);
                sample_agents.assign(all.begin(), all.begin() + spec.global_sample_agents);
                std::sort(sample_agents.begin(), sample_agents.end());
            } else {
                sample_agents.resize(train.agent_count());
                for (int i = 0; i < train.agent_count(); ++i) sample_agents[i] = i;
            }
            TrainingSet global = build_training_set(sample_agents, p.target, indicators, train,
                                                    nbr, derive_seed(seed, "global-negatives"));
            if (global.examples.empty())
                throw data_error("no positive links in the dataset for this target");

            ClusterClassifiers cc = assign_classifiers(clusters, per_cluster, global,
                                                       spec.thresholds, spec.logistic,
                                                       spec.workers);
            gamma = predict_trust_matrix(clusters, cc, indicators, nbr, p.target, spec.workers);
            if (!gamma_key.empty()) gamma.save_csv(gamma_key, train);
        }
    }
    out.gamma_fingerprint = gamma.fingerprint();
    out.gamma_positive = gamma.positive_count();
    out.gamma_covered = gamma.covered_pairs();

    // --- recommendation ---
    std::vector<PredictionRow> preds(test.size());
    if (spec.recommender == RecommenderKind::MTR) {
        parallel_for(test.size(), spec.workers, [&](std::size_t begin, std::size_t end, int) {
            for (std::size_t t = begin; t < end; ++t) {
                double pred = mtr_predict_rating(test[t].agent, test[t].item, train, gamma,
                                                 spec.mtr);
                preds[t] = PredictionRow{test[t].agent, test[t].item, pred, test[t].stars};
            }
        });
    } else {
        TrustMfModel model = trustmf_fit(train, gamma, spec.trustmf, derive_seed(seed, "trustmf"));
        for (std::size_t t = 0; t < test.size(); ++t) {
            double pred = trustmf_predict_rating(model, test[t].agent, test[t].item);
            preds[t] = PredictionRow{test[t].agent, test[t].item, pred, test[t].stars};
        }
    }
    out.eval = evaluate_predictions(preds);
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& d) {
    validate(spec);
    auto started = std::chrono::steady_clock::now();

    ExperimentResult result;
    result.spec = spec;

    for (std::uint64_t seed : spec.seeds) {
        if (spec.folds > 0) {
            auto folds = make_cv_folds(d, spec.folds, derive_seed(seed, "folds"));
            for (auto& fold : folds) {
                SeedOutcome o = run_once(spec, fold.train, fold.test, seed, &result.quality);
                o.fold_index = fold.fold_index;
                result.runs.push_back(std::move(o));
            }
        } else {
            SplitResult split = split_per_user(d, spec.test_fraction, derive_seed(seed, "split"));
            result.runs.push_back(run_once(spec, split.train, split.test, seed, &result.quality));
        }
    }

    double mae = 0.0, rmse = 0.0;
    std::size_t n = 0;
    for (const auto& run : result.runs) {
        mae += run.eval.mae;
        rmse += run.eval.rmse;
        n += run.eval.n;
    }
    result.mean.mae = mae / static_cast<double>(result.runs.size());
    result.mean.rmse = rmse / static_cast<double>(result.runs.size());
    result.mean.n = n;
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

Report sweep_parameter(const ExperimentSpec& base, SweepParam param,
                       const std::vector<double>& values, const Dataset& d, int workers) {
    if (values.empty()) throw std::invalid_argument("sweep: empty value list");
    const StagePlan p = plan_for(base);
    if (param == SweepParam::K && !p.cluster && !p.random_cluster)
        throw std::invalid_argument("sweep over k requires a clustered experiment");
    if ((param == SweepParam::Beta || param == SweepParam::Kappa) &&
        base.recommender != RecommenderKind::MTR)
        throw std::invalid_argument("beta/kappa apply to the MTR recommender");
    if (param == SweepParam::LambdaT && base.recommender != RecommenderKind::TrustMF)
        throw std::invalid_argument("lambda_t applies to the TrustMF recommender");

    std::vector<ExperimentSpec> specs;
    specs.reserve(values.size());
    for (double v : values) {
        ExperimentSpec spec = base;
        switch (param) {
            case SweepParam::K: spec.k = static_cast<int>(v); break;
            case SweepParam::Beta: spec.mtr.beta = v; break;
            case SweepParam::LambdaT: spec.trustmf.lambda_t = v; break;
            case SweepParam::Kappa: spec.mtr.kappa = static_cast<int>(v); break;
        }
        validate(spec);
        specs.push_back(std::move(spec));
    }

    Report report;
    report.experiments.resize(specs.size());
    parallel_for(specs.size(), workers, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t s = begin; s < end; ++s)
            report.experiments[s] = run_experiment(specs[s], d);
    });
    return report;
}

// ------------------------------------------------------------- reporting

namespace {

json spec_to_json(const ExperimentSpec& s) {
    json j;
    j["name"] = to_string(s.name);
    j["k"] = s.k;
    j["recommender"] = to_string(s.recommender);
    j["seeds"] = s.seeds;
    j["test_fraction"] = s.test_fraction;
    j["folds"] = s.folds;
    j["kmeans_max_iter"] = s.kmeans_max_iter;
    j["mtr"] = {{"kappa", s.mtr.kappa},
                {"beta", s.mtr.beta},
                {"pref_cutoff", s.mtr.pref_cutoff},
                {"neighbor_mean",
                 s.mtr.neighbor_mean == MtrConfig::NeighborMean::Rater ? "rater" : "item"}};
    j["trustmf"] = {{"dimensions", s.trustmf.dimensions},
                    {"lambda", s.trustmf.lambda},
                    {"lambda_t", s.trustmf.lambda_t},
                    {"learning_rate", s.trustmf.learning_rate},
                    {"epochs", s.trustmf.epochs}};
    j["thresholds"] = {{"min_agents", s.thresholds.min_agents},
                       {"min_positive_links", s.thresholds.min_positive_links}};
    return j;
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec s;
    auto name = experiment_from_string(j.at("name").get<std::string>());
    if (!name) throw data_error("unknown experiment name in report");
    s.name = *name;
    s.k = j.at("k").get<int>();
    auto rec = recommender_from_string(j.at("recommender").get<std::string>());
    if (!rec) throw data_error("unknown recommender in report");
    s.recommender = *rec;
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.test_fraction = j.at("test_fraction").get<double>();
    s.folds = j.at("folds").get<int>();
    s.kmeans_max_iter = j.at("kmeans_max_iter").get<int>();
    const auto& mtr = j.at("mtr");
    s.mtr.kappa = mtr.at("kappa").get<int>();
    s.mtr.beta = mtr.at("beta").get<double>();
    s.mtr.pref_cutoff = mtr.at("pref_cutoff").get<int>();
    s.mtr.neighbor_mean = mtr.at("neighbor_mean").get<std::string>() == "item"
                              ? MtrConfig::NeighborMean::Item
                              : MtrConfig::NeighborMean::Rater;
    const auto& tm = j.at("trustmf");
    s.trustmf.dimensions = tm.at("dimensions").get<int>();
    s.trustmf.lambda = tm.at("lambda").get<double>();
    s.trustmf.lambda_t = tm.at("lambda_t").get<double>();
    s.trustmf.learning_rate = tm.at("learning_rate").get<double>();
    s.trustmf.epochs = tm.at("epochs").get<int>();
    const auto& th = j.at("thresholds");
    s.thresholds.min_agents = th.at("min_agents").get<int>();
    s.thresholds.min_positive_links = th.at("min_positive_links").get<long long>();
    return s;
}

json result_to_json(const ExperimentResult& r) {
    json j;
    j["spec"] = spec_to_json(r.spec);
    j["mean"] = {{"mae", r.mean.mae}, {"rmse", r.mean.rmse}, {"n", r.mean.n}};
    json runs = json::array();
    for (const auto& run : r.runs) {
        runs.push_back({{"seed", run.seed},
                        {"fold", run.fold_index},
                        {"mae", run.eval.mae},
                        {"rmse", run.eval.rmse},
                        {"n", run.eval.n},
                        {"gamma_fingerprint", run.gamma_fingerprint},
                        {"gamma_positive", run.gamma_positive},
                        {"gamma_covered", run.gamma_covered}});
    }
    j["runs"] = runs;
    if (r.quality) {
        j["cluster_quality"] = {{"mean_intra", r.quality->mean_intra},
                                {"silhouette", r.quality->silhouette},
                                {"sample_size", r.quality->sample_size}};
    }
    j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

ExperimentResult result_from_json(const json& j) {
    ExperimentResult r;
    r.spec = spec_from_json(j.at("spec"));
    r.mean.mae = j.at("mean").at("mae").get<double>();
    r.mean.rmse = j.at("mean").at("rmse").get<double>();
    r.mean.n = j.at("mean").at("n").get<std::size_t>();
    for (const auto& run : j.at("runs")) {
        SeedOutcome o;
        o.seed = run.at("seed").get<std::uint64_t>();
        o.fold_index = run.at("fold").get<int>();
        o.eval.mae = run.at("mae").get<double>();
        o.eval.rmse = run.at("rmse").get<double>();
        o.eval.n = run.at("n").get<std::size_t>();
        o.gamma_fingerprint = run.at("gamma_fingerprint").get<std::uint64_t>();
        o.gamma_positive = run.at("gamma_positive").get<std::size_t>();
        o.gamma_covered = run.at("gamma_covered").get<std::size_t>();
        r.runs.push_back(o);
    }
    if (j.contains("cluster_quality")) {
        ClusterQuality q;
        q.mean_intra = j["cluster_quality"].at("mean_intra").get<double>();
        q.silhouette = j["cluster_quality"].at("silhouette").get<double>();
        q.sample_size = j["cluster_quality"].at("sample_size").get<int>();
        r.quality = q;
    }
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
    return r;
}

}  // namespace

std::string report_to_json(const Report& r) {
    json j;
    json exps = json::array();
    for (const auto& e : r.experiments) exps.push_back(result_to_json(e));
    j["experiments"] = exps;
    return j.dump(2);
}

Report report_from_json(const std::string& text) {
    json j = json::parse(text);
    Report r;
    for (const auto& e : j.at("experiments")) r.experiments.push_back(result_from_json(e));
    return r;
}

void emit_report_json(const Report& r, const std::string& path) {
    if (r.experiments.empty()) throw data_error("emit_report: empty report");
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << report_to_json(r) << '\n';
}

void emit_report_csv(const Report& r, const std::string& path) {
    if (r.experiments.empty()) throw data_error("emit_report: empty report");
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);

    // Wide layout: one row per experiment name, MAE/RMSE per recommender.
    bool has_mtr = false, has_tmf = false;
    for (const auto& e : r.experiments) {
        if (e.spec.recommender == RecommenderKind::MTR) has_mtr = true;
        if (e.spec.recommender == RecommenderKind::TrustMF) has_tmf = true;
    }
    out << "experiment,k";
    if (has_mtr) out << ",mtr_mae,mtr_rmse";
    if (has_tmf) out << ",trustmf_mae,trustmf_rmse";
    out << "\n";

    std::vector<std::pair<std::string, int>> order;
    for (const auto& e : r.experiments) {
        std::pair<std::string, int> key{to_string(e.spec.name), e.spec.k};
        if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);
    }
    out.precision(6);
    for (const auto& [name, k] : order) {
        out << name << ',' << k;
        auto write_for = [&](RecommenderKind kind) {
            for (const auto& e : r.experiments)
                if (to_string(e.spec.name) == name && e.spec.k == k && e.spec.recommender == kind) {
                    out << ',' << std::fixed << e.mean.mae << ',' << e.mean.rmse;
                    return;
                }
            out << ",,";
        };
        if (has_mtr) write_for(RecommenderKind::MTR);
        if (has_tmf) write_for(RecommenderKind::TrustMF);
        out << '\n';
    }
}

void emit_sweep_csv(const Report& r, SweepParam param, const std::vector<double>& values,
                    const std::string& path) {
    if (r.experiments.size() != values.size())
        throw data_error("emit_sweep_csv: report/value count mismatch");
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "param,value,experiment,recommender,mae,rmse,n\n";
    out.precision(10);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& e = r.experiments[i];
        out << to_string(param) << ',' << values[i] << ',' << to_string(e.spec.name) << ','
            << to_string(e.spec.recommender) << ',' << e.mean.mae << ',' << e.mean.rmse << ','
            << e.mean.n << '\n';
    }
}

}  // namespace trustrec
