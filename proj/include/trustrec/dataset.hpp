#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trustrec {

using AgentIdx = std::int32_t;
using ItemIdx = std::int32_t;

struct Agent {
    std::string id;
    std::vector<AgentIdx> friends;  // sorted dense indices; mutual by construction
    int elite_years = 0;
    long long profile_compliments = 0;  // sum of compliment_* profile fields
    long long fans = 0;
    long long content_compliments = 0;  // appreciations received on posted content
    long long contributions = 0;        // number of reviews in this dataset
    double account_age_years = 1.0;     // always > 0
};

struct Item {
    std::string id;
    std::vector<std::string> categories;  // sorted, unique
};

struct Rating {
    ItemIdx item;
    double stars;
};

struct ItemRating {
    AgentIdx agent;
    double stars;
};

struct TestRating {
    AgentIdx agent;
    ItemIdx item;
    double stars;
};

// Immutable once built. Agents and items carry dense indices assigned in
// lexicographic id order, so identical inputs always index identically.
class Dataset {
  public:
    int agent_count() const { return static_cast<int>(agents_.size()); }
    int item_count() const { return static_cast<int>(items_.size()); }
    std::size_t rating_count() const { return n_ratings_; }

    const Agent& agent(AgentIdx i) const;
    const Item& item(ItemIdx t) const;
    std::optional<AgentIdx> find_agent(const std::string& id) const;
    std::optional<ItemIdx> find_item(const std::string& id) const;
    AgentIdx require_agent(const std::string& id) const;  // throws data_error
    ItemIdx require_item(const std::string& id) const;

    // Sorted by item index.
    const std::vector<Rating>& ratings_of(AgentIdx i) const;
    // Sorted by agent index.
    const std::vector<ItemRating>& raters_of(ItemIdx t) const;
    std::optional<double> rating(AgentIdx i, ItemIdx t) const;
    bool friends_with(AgentIdx i, AgentIdx j) const;

    double item_mean(ItemIdx t) const;       // global mean when the item has no ratings
    double agent_mean(AgentIdx i) const;     // global mean when the agent has none
    bool agent_has_ratings(AgentIdx i) const;
    bool item_has_ratings(ItemIdx t) const;
    double global_mean() const { return global_mean_; }
    long long max_content_compliments() const { return max_content_compliments_; }

    // Content hash over ids, profiles, friendships and ratings; keys disk caches.
    std::uint64_t fingerprint() const;

  private:
    friend class DatasetBuilder;
    std::vector<Agent> agents_;
    std::vector<Item> items_;
    std::map<std::string, AgentIdx> agent_index_;
    std::map<std::string, ItemIdx> item_index_;
    std::vector<std::vector<Rating>> ratings_by_agent_;
    std::vector<std::vector<ItemRating>> ratings_by_item_;
    std::vector<double> item_means_;
    std::vector<double> agent_means_;
    double global_mean_ = 0.0;
    std::size_t n_ratings_ = 0;
    long long max_content_compliments_ = 0;
};

// Accumulates records, then finalize() resolves ids, enforces mutual
// friendship (one-sided edges are dropped), deduplicates ratings keeping the
// latest timestamp (parse order breaks ties) and computes the means.
class DatasetBuilder {
  public:
    struct AgentRecord {
        std::string id;
        std::vector<std::string> declared_friends;
        int elite_years = 0;
        long long profile_compliments = 0;
        long long fans = 0;
        long long content_compliments = 0;
        double account_age_years = -1.0;       // <0: derive from registered_day
        std::int64_t registered_day = -1;      // days since epoch, -1 unknown
    };

    void add_agent(AgentRecord rec);
    void add_item(const std::string& id, std::vector<std::string> categories);
    // timestamp_day < 0 means unknown; later parse order wins among equals.
    void add_rating(const std::string& agent_id, const std::string& item_id, double stars,
                    std::int64_t timestamp_day = -1);
    // Convenience for fixtures: declares the friendship on both sides.
    void add_mutual_friendship(const std::string& a, const std::string& b);

    bool has_agent(const std::string& id) const { return agent_slot_.count(id) > 0; }
    bool has_item(const std::string& id) const { return item_slot_.count(id) > 0; }

    Dataset finalize();

  private:
    std::vector<AgentRecord> agents_;
    std::map<std::string, std::size_t> agent_slot_;
    std::vector<Item> items_;
    std::map<std::string, std::size_t> item_slot_;
    struct RawRating {
        std::string agent_id, item_id;
        double stars;
        std::int64_t day;
        std::size_t order;
    };
    std::vector<RawRating> ratings_;
    std::int64_t max_day_ = -1;
};

struct LoadReport {
    std::size_t users_parsed = 0;
    std::size_t reviews_parsed = 0;
    std::size_t businesses_parsed = 0;
    std::size_t records_skipped = 0;  // malformed or missing a required field
};

// Yelp-style newline-delimited JSON, one file per record type.
Dataset load_dataset(const std::string& user_file, const std::string& review_file,
                     const std::string& business_file, LoadReport* report = nullptr);

// Single-file bundle (tagged NDJSON) used between CLI stages.
Dataset load_bundle(const std::string& path, LoadReport* report = nullptr);
void save_bundle(const Dataset& d, const std::string& path);

// Keeps agents with >= min_reviews reviews of items tagged with `category`,
// all reviews of those agents and every item they reviewed. Friendships are
// restricted to the retained agents and the means recomputed.
Dataset filter_by_activity(const Dataset& d, int min_reviews = 20,
                           const std::string& category = "Restaurants");

// Per-user split: floor(test_fraction * n) ratings per user move to test.
// The train dataset keeps the full agent/item universe, so indices carry over.
struct SplitResult {
    Dataset train;
    std::vector<TestRating> test;
};
SplitResult split_per_user(const Dataset& d, double test_fraction, std::uint64_t seed);

struct FoldSplit {
    int fold_index = 0;
    Dataset train;
    std::vector<TestRating> test;
};
// Users with >= folds ratings are partitioned into `folds` disjoint chunks;
// users with fewer contribute to train only.
std::vector<FoldSplit> make_cv_folds(const Dataset& d, int folds, std::uint64_t seed);

struct StatSummary {
    double mean = 0, median = 0, mode = 0, min = 0, max = 0;
};

struct DatasetStats {
    StatSummary friends_per_user;
    StatSummary reviews_per_user;
    StatSummary avg_user_rating;
    StatSummary reviews_per_item;
    StatSummary review_scores;
    std::size_t n_agents = 0, n_items = 0, n_ratings = 0;
};

DatasetStats dataset_stats(const Dataset& d);
std::string stats_to_json(const DatasetStats& s);

}  // namespace trustrec
