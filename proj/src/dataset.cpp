#include "trustrec/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trustrec/errors.hpp"
#include "trustrec/util.hpp"

namespace trustrec {

using nlohmann::json;

// ---------------------------------------------------------------- Dataset

const Agent& Dataset::agent(AgentIdx i) const {
    if (i < 0 || i >= agent_count()) throw data_error("agent index out of range");
    return agents_[i];
}

const Item& Dataset::item(ItemIdx t) const {
    if (t < 0 || t >= item_count()) throw data_error("item index out of range");
    return items_[t];
}

std::optional<AgentIdx> Dataset::find_agent(const std::string& id) const {
    auto it = agent_index_.find(id);
    if (it == agent_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<ItemIdx> Dataset::find_item(const std::string& id) const {
    auto it = item_index_.find(id);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
}

AgentIdx Dataset::require_agent(const std::string& id) const {
    auto idx = find_agent(id);
    if (!idx) throw data_error("unknown agent: " + id);
    return *idx;
}

ItemIdx Dataset::require_item(const std::string& id) const {
    auto idx = find_item(id);
    if (!idx) throw data_error("unknown item: " + id);
    return *idx;
}

const std::vector<Rating>& Dataset::ratings_of(AgentIdx i) const {
    if (i < 0 || i >= agent_count()) throw data_error("agent index out of range");
    return ratings_by_agent_[i];
}

const std::vector<ItemRating>& Dataset::raters_of(ItemIdx t) const {
    if (t < 0 || t >= item_count()) throw data_error("item index out of range");
    return ratings_by_item_[t];
}

std::optional<double> Dataset::rating(AgentIdx i, ItemIdx t) const {
    const auto& row = ratings_of(i);
    auto it = std::lower_bound(row.begin(), row.end(), t,
                               [](const Rating& r, ItemIdx x) { return r.item < x; });
    if (it == row.end() || it->item != t) return std::nullopt;
    return it->stars;
}

bool Dataset::friends_with(AgentIdx i, AgentIdx j) const {
    const auto& f = agent(i).friends;
    return std::binary_search(f.begin(), f.end(), j);
}

double Dataset::item_mean(ItemIdx t) const {
    if (t < 0 || t >= item_count()) throw data_error("item index out of range");
    return item_means_[t];
}

double Dataset::agent_mean(AgentIdx i) const {
    if (i < 0 || i >= agent_count()) throw data_error("agent index out of range");
    return agent_means_[i];
}

bool Dataset::agent_has_ratings(AgentIdx i) const { return !ratings_of(i).empty(); }
bool Dataset::item_has_ratings(ItemIdx t) const { return !raters_of(t).empty(); }

std::uint64_t Dataset::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& a : agents_) {
        h = fnv1a(a.id, h);
        h = fnv1a(a.friends.data(), a.friends.size() * sizeof(AgentIdx), h);
        std::int64_t profile[5] = {a.elite_years, a.profile_compliments, a.fans,
                                   a.content_compliments, a.contributions};
        h = fnv1a(profile, sizeof(profile), h);
        h = fnv1a(&a.account_age_years, sizeof(double), h);
    }
    for (const auto& it : items_) {
        h = fnv1a(it.id, h);
        for (const auto& c : it.categories) h = fnv1a(c, h);
    }
    for (const auto& row : ratings_by_agent_)
        h = fnv1a(row.data(), row.size() * sizeof(Rating), h);
    return h;
}

// --------------------------------------------------------- DatasetBuilder

void DatasetBuilder::add_agent(AgentRecord rec) {
    auto it = agent_slot_.find(rec.id);
    if (it != agent_slot_.end()) {
        agents_[it->second] = std::move(rec);  // last record wins
        return;
    }
    if (rec.registered_day >= 0 && rec.registered_day > max_day_) max_day_ = rec.registered_day;
    agent_slot_[rec.id] = agents_.size();
    agents_.push_back(std::move(rec));
}

void DatasetBuilder::add_item(const std::string& id, std::vector<std::string> categories) {
    std::sort(categories.begin(), categories.end());
    categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
    auto it = item_slot_.find(id);
    if (it != item_slot_.end()) {
        items_[it->second].categories = std::move(categories);
        return;
    }
    item_slot_[id] = items_.size();
    items_.push_back(Item{id, std::move(categories)});
}

void DatasetBuilder::add_rating(const std::string& agent_id, const std::string& item_id,
                                double stars, std::int64_t timestamp_day) {
    if (timestamp_day >= 0 && timestamp_day > max_day_) max_day_ = timestamp_day;
    ratings_.push_back(RawRating{agent_id, item_id, stars, timestamp_day, ratings_.size()});
}

void DatasetBuilder::add_mutual_friendship(const std::string& a, const std::string& b) {
    auto ia = agent_slot_.find(a), ib = agent_slot_.find(b);
    if (ia == agent_slot_.end() || ib == agent_slot_.end())
        throw data_error("add_mutual_friendship: unknown agent");
    agents_[ia->second].declared_friends.push_back(b);
    agents_[ib->second].declared_friends.push_back(a);
}

Dataset DatasetBuilder::finalize() {
    if (agents_.empty()) throw data_error("no valid agents");

    Dataset d;

    // Dense indices in lexicographic id order, for reproducibility.
    std::vector<std::size_t> agent_order(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) agent_order[i] = i;
    std::sort(agent_order.begin(), agent_order.end(),
              [&](std::size_t a, std::size_t b) { return agents_[a].id < agents_[b].id; });

    std::vector<std::size_t> item_order(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) item_order[i] = i;
    std::sort(item_order.begin(), item_order.end(),
              [&](std::size_t a, std::size_t b) { return items_[a].id < items_[b].id; });

    d.agents_.resize(agents_.size());
    for (std::size_t pos = 0; pos < agent_order.size(); ++pos) {
        const AgentRecord& rec = agents_[agent_order[pos]];
        Agent& a = d.agents_[pos];
        a.id = rec.id;
        a.elite_years = rec.elite_years;
        a.profile_compliments = rec.profile_compliments;
        a.fans = rec.fans;
        a.content_compliments = rec.content_compliments;
        if (rec.account_age_years > 0) {
            a.account_age_years = rec.account_age_years;
        } else if (rec.registered_day >= 0 && max_day_ >= 0) {
            a.account_age_years =
                std::max(1.0 / 365.0, static_cast<double>(max_day_ - rec.registered_day) / 365.25);
        } else {
            a.account_age_years = 1.0;
        }
        d.agent_index_[a.id] = static_cast<AgentIdx>(pos);
    }

    d.items_.resize(items_.size());
    for (std::size_t pos = 0; pos < item_order.size(); ++pos) {
        d.items_[pos] = items_[item_order[pos]];
        d.item_index_[d.items_[pos].id] = static_cast<ItemIdx>(pos);
    }

    // Mutual friendship: keep an edge only when both endpoints exist and each
    // side declared the other.
    std::vector<std::set<AgentIdx>> declared(d.agents_.size());
    for (std::size_t slot = 0; slot < agents_.size(); ++slot) {
        auto self = d.agent_index_.find(agents_[slot].id);
        for (const auto& fid : agents_[slot].declared_friends) {
            auto other = d.agent_index_.find(fid);
            if (other == d.agent_index_.end()) continue;
            if (other->second == self->second) continue;  // no self-friendship
            declared[self->second].insert(other->second);
        }
    }
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        for (AgentIdx j : declared[i]) {
            if (j > i && declared[j].count(i)) {
                d.agents_[i].friends.push_back(j);
                d.agents_[j].friends.push_back(i);
            }
        }
    }
    for (auto& a : d.agents_) std::sort(a.friends.begin(), a.friends.end());

    // Deduplicate ratings: keep the latest timestamp, parse order breaking ties.
    std::map<std::pair<AgentIdx, ItemIdx>, std::pair<std::pair<std::int64_t, std::size_t>, double>> best;
    for (const auto& r : ratings_) {
        auto ai = d.agent_index_.find(r.agent_id);
        auto ti = d.item_index_.find(r.item_id);
        if (ai == d.agent_index_.end() || ti == d.item_index_.end())
            throw data_error("rating references unknown agent or item: " + r.agent_id + " / " +
                             r.item_id);
        auto key = std::make_pair(ai->second, ti->second);
        auto stamp = std::make_pair(r.day, r.order);
        auto it = best.find(key);
        if (it == best.end() || stamp > it->second.first) best[key] = {stamp, r.stars};
    }

    d.ratings_by_agent_.assign(d.agents_.size(), {});
    d.ratings_by_item_.assign(d.items_.size(), {});
    for (const auto& [key, val] : best) {
        d.ratings_by_agent_[key.first].push_back(Rating{key.second, val.second});
        d.ratings_by_item_[key.second].push_back(ItemRating{key.first, val.second});
    }
    d.n_ratings_ = best.size();

    double total = 0.0;
    d.item_means_.assign(d.items_.size(), 0.0);
    d.agent_means_.assign(d.agents_.size(), 0.0);
    for (std::size_t t = 0; t < d.ratings_by_item_.size(); ++t) {
        double s = 0.0;
        for (const auto& r : d.ratings_by_item_[t]) s += r.stars;
        total += s;
        d.item_means_[t] = d.ratings_by_item_[t].empty()
                               ? 0.0
                               : s / static_cast<double>(d.ratings_by_item_[t].size());
    }
    d.global_mean_ = d.n_ratings_ ? total / static_cast<double>(d.n_ratings_) : 0.0;
    for (std::size_t t = 0; t < d.ratings_by_item_.size(); ++t)
        if (d.ratings_by_item_[t].empty()) d.item_means_[t] = d.global_mean_;

    for (std::size_t i = 0; i < d.ratings_by_agent_.size(); ++i) {
        const auto& row = d.ratings_by_agent_[i];
        if (row.empty()) {
            d.agent_means_[i] = d.global_mean_;
        } else {
            double s = 0.0;
            for (const auto& r : row) s += r.stars;
            d.agent_means_[i] = s / static_cast<double>(row.size());
        }
        d.agents_[i].contributions = static_cast<long long>(row.size());
        d.max_content_compliments_ =
            std::max(d.max_content_compliments_, d.agents_[i].content_compliments);
    }
    return d;
}

// ------------------------------------------------------------- JSON load

namespace {

// Days since 1970-01-01 for "YYYY-MM-DD..." strings; -1 when unparsable.
std::int64_t parse_day(const std::string& s) {
    int y = 0, m = 0, day = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &day) != 3) return -1;
    if (m < 1 || m > 12 || day < 1 || day > 31) return -1;
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) return -1;
    return sys_days{ymd}.time_since_epoch().count();
}

long long to_count(const json& v) {
    if (v.is_number()) return v.get<long long>();
    return 0;
}

std::vector<std::string> parse_string_list(const json& v) {
    std::vector<std::string> out;
    if (v.is_array()) {
        for (const auto& e : v)
            if (e.is_string()) out.push_back(e.get<std::string>());
    } else if (v.is_string()) {
        // Yelp dumps often comma-join these lists.
        std::stringstream ss(v.get<std::string>());
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::size_t b = tok.find_first_not_of(" \t");
            std::size_t e = tok.find_last_not_of(" \t");
            if (b == std::string::npos) continue;
            std::string t = tok.substr(b, e - b + 1);
            if (!t.empty() && t != "None") out.push_back(std::move(t));
        }
    }
    return out;
}

int parse_elite_years(const json& rec) {
    if (rec.contains("elite_years") && rec["elite_years"].is_number())
        return rec["elite_years"].get<int>();
    if (rec.contains("elite")) {
        const auto& e = rec["elite"];
        if (e.is_number()) return e.get<int>();
        return static_cast<int>(parse_string_list(e).size());
    }
    return 0;
}

bool parse_user(const json& rec, DatasetBuilder& b) {
    if (!rec.contains("user_id") || !rec["user_id"].is_string()) return false;
    DatasetBuilder::AgentRecord a;
    a.id = rec["user_id"].get<std::string>();
    if (rec.contains("friends")) a.declared_friends = parse_string_list(rec["friends"]);
    a.elite_years = parse_elite_years(rec);
    a.fans = rec.contains("fans") ? to_count(rec["fans"]) : 0;
    long long profile = 0;
    if (rec.contains("profile_compliments")) {
        profile = to_count(rec["profile_compliments"]);
    } else {
        for (auto it = rec.begin(); it != rec.end(); ++it)
            if (it.key().rfind("compliment_", 0) == 0) profile += to_count(it.value());
    }
    a.profile_compliments = profile;
    if (rec.contains("content_compliments")) {
        a.content_compliments = to_count(rec["content_compliments"]);
    } else {
        // Votes received on posted content.
        for (const char* k : {"useful", "funny", "cool"})
            if (rec.contains(k)) a.content_compliments += to_count(rec[k]);
    }
    if (rec.contains("account_age_years") && rec["account_age_years"].is_number())
        a.account_age_years = rec["account_age_years"].get<double>();
    else if (rec.contains("yelping_since") && rec["yelping_since"].is_string())
        a.registered_day = parse_day(rec["yelping_since"].get<std::string>());
    b.add_agent(std::move(a));
    return true;
}

bool parse_review(const json& rec, DatasetBuilder& b) {
    if (!rec.contains("user_id") || !rec.contains("business_id") || !rec.contains("stars"))
        return false;
    if (!rec["user_id"].is_string() || !rec["business_id"].is_string() ||
        !rec["stars"].is_number())
        return false;
    double stars = rec["stars"].get<double>();
    if (stars < 1.0 || stars > 5.0) return false;
    std::int64_t day = -1;
    if (rec.contains("date") && rec["date"].is_string())
        day = parse_day(rec["date"].get<std::string>());
    b.add_rating(rec["user_id"].get<std::string>(), rec["business_id"].get<std::string>(), stars,
                 day);
    return true;
}

bool parse_business(const json& rec, DatasetBuilder& b) {
    if (!rec.contains("business_id") || !rec["business_id"].is_string()) return false;
    std::vector<std::string> cats;
    if (rec.contains("categories")) cats = parse_string_list(rec["categories"]);
    b.add_item(rec["business_id"].get<std::string>(), std::move(cats));
    return true;
}

enum class RecordType { User, Review, Business };

void ingest_file(const std::string& path, RecordType type, DatasetBuilder& b, LoadReport& rep,
                 std::vector<json>* deferred_reviews) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception&) {
            ++rep.records_skipped;
            std::cerr << path << ":" << line_no << ": malformed JSON, skipped\n";
            continue;
        }
        bool ok = false;
        switch (type) {
            case RecordType::User:
                ok = parse_user(rec, b);
                if (ok) ++rep.users_parsed;
                break;
            case RecordType::Review:
                // Reviews may arrive before the agents/items they reference.
                if (deferred_reviews) {
                    deferred_reviews->push_back(std::move(rec));
                    ok = true;
                } else {
                    ok = parse_review(rec, b);
                    if (ok) ++rep.reviews_parsed;
                }
                break;
            case RecordType::Business:
                ok = parse_business(rec, b);
                if (ok) ++rep.businesses_parsed;
                break;
        }
        if (!ok) {
            ++rep.records_skipped;
            std::cerr << path << ":" << line_no << ": missing required field, skipped\n";
        }
    }
}

// Replays deferred review records; ones referencing unknown ids are skipped,
// not fatal.
void apply_reviews(std::vector<json>& reviews, DatasetBuilder& b, LoadReport& rep) {
    for (const auto& rec : reviews) {
        if (!rec.contains("user_id") || !rec.contains("business_id") || !rec.contains("stars") ||
            !rec["user_id"].is_string() || !rec["business_id"].is_string() ||
            !rec["stars"].is_number()) {
            ++rep.records_skipped;
            continue;
        }
        if (!b.has_agent(rec["user_id"].get<std::string>()) ||
            !b.has_item(rec["business_id"].get<std::string>())) {
            ++rep.records_skipped;
            continue;
        }
        if (parse_review(rec, b))
            ++rep.reviews_parsed;
        else
            ++rep.records_skipped;
    }
}

}  // namespace

Dataset load_dataset(const std::string& user_file, const std::string& review_file,
                     const std::string& business_file, LoadReport* report) {
    DatasetBuilder b;
    LoadReport rep;
    std::vector<json> reviews;

    ingest_file(user_file, RecordType::User, b, rep, nullptr);
    ingest_file(business_file, RecordType::Business, b, rep, nullptr);
    ingest_file(review_file, RecordType::Review, b, rep, &reviews);

    if (rep.users_parsed == 0) throw data_error("no valid user records in " + user_file);
    apply_reviews(reviews, b, rep);

    if (report) *report = rep;
    return b.finalize();
}

Dataset load_bundle(const std::string& path, LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    DatasetBuilder b;
    LoadReport rep;
    std::string line;
    std::size_t line_no = 0;
    std::vector<json> reviews;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception&) {
            ++rep.records_skipped;
            std::cerr << path << ":" << line_no << ": malformed JSON, skipped\n";
            continue;
        }
        std::string t = rec.value("t", "");
        bool ok = false;
        if (t == "user") {
            ok = parse_user(rec, b);
            if (ok) ++rep.users_parsed;
        } else if (t == "review") {
            reviews.push_back(std::move(rec));
            ok = true;
        } else if (t == "business") {
            ok = parse_business(rec, b);
            if (ok) ++rep.businesses_parsed;
        }
        if (!ok) {
            ++rep.records_skipped;
            std::cerr << path << ":" << line_no << ": bad record, skipped\n";
        }
    }
    if (rep.users_parsed == 0) throw data_error("no valid user records in " + path);
    apply_reviews(reviews, b, rep);
    if (report) *report = rep;
    return b.finalize();
}

void save_bundle(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        const Agent& a = d.agent(i);
        json rec;
        rec["t"] = "user";
        rec["user_id"] = a.id;
        json friends = json::array();
        for (AgentIdx f : a.friends) friends.push_back(d.agent(f).id);
        rec["friends"] = friends;
        rec["elite_years"] = a.elite_years;
        rec["profile_compliments"] = a.profile_compliments;
        rec["fans"] = a.fans;
        rec["content_compliments"] = a.content_compliments;
        rec["account_age_years"] = a.account_age_years;
        out << rec.dump() << '\n';
    }
    for (ItemIdx t = 0; t < d.item_count(); ++t) {
        const Item& it = d.item(t);
        json rec;
        rec["t"] = "business";
        rec["business_id"] = it.id;
        rec["categories"] = it.categories;
        out << rec.dump() << '\n';
    }
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        for (const Rating& r : d.ratings_of(i)) {
            json rec;
            rec["t"] = "review";
            rec["user_id"] = d.agent(i).id;
            rec["business_id"] = d.item(r.item).id;
            rec["stars"] = r.stars;
            out << rec.dump() << '\n';
        }
    }
}

// ----------------------------------------------------------------- filter

Dataset filter_by_activity(const Dataset& d, int min_reviews, const std::string& category) {
    if (min_reviews < 1) throw data_error("min_reviews must be >= 1");

    std::vector<bool> item_matches(d.item_count(), false);
    bool category_seen = false;
    for (ItemIdx t = 0; t < d.item_count(); ++t) {
        const auto& cats = d.item(t).categories;
        if (std::binary_search(cats.begin(), cats.end(), category)) {
            item_matches[t] = true;
            category_seen = true;
        }
    }
    if (!category_seen)
        std::cerr << "filter_by_activity: no item carries category \"" << category << "\"\n";

    std::vector<bool> keep(d.agent_count(), false);
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        int n = 0;
        for (const Rating& r : d.ratings_of(i))
            if (item_matches[r.item]) ++n;
        if (n >= min_reviews) keep[i] = true;
    }

    DatasetBuilder b;
    std::vector<bool> item_used(d.item_count(), false);
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        if (!keep[i]) continue;
        const Agent& a = d.agent(i);
        DatasetBuilder::AgentRecord rec;
        rec.id = a.id;
        rec.elite_years = a.elite_years;
        rec.profile_compliments = a.profile_compliments;
        rec.fans = a.fans;
        rec.content_compliments = a.content_compliments;
        rec.account_age_years = a.account_age_years;
        for (AgentIdx f : a.friends)
            if (keep[f]) rec.declared_friends.push_back(d.agent(f).id);
        b.add_agent(std::move(rec));
        for (const Rating& r : d.ratings_of(i)) item_used[r.item] = true;
    }
    for (ItemIdx t = 0; t < d.item_count(); ++t)
        if (item_used[t]) b.add_item(d.item(t).id, d.item(t).categories);
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        if (!keep[i]) continue;
        for (const Rating& r : d.ratings_of(i)) b.add_rating(d.agent(i).id, d.item(r.item).id, r.stars);
    }
    return b.finalize();
}

// ------------------------------------------------------------------ split

namespace {

Dataset rebuild_without(const Dataset& d, const std::vector<std::vector<bool>>& to_test) {
    DatasetBuilder b;
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        const Agent& a = d.agent(i);
        DatasetBuilder::AgentRecord rec;
        rec.id = a.id;
        rec.elite_years = a.elite_years;
        rec.profile_compliments = a.profile_compliments;
        rec.fans = a.fans;
        rec.content_compliments = a.content_compliments;
        rec.account_age_years = a.account_age_years;
        // Mutual edges are declared by both endpoints, so finalize keeps them.
        for (AgentIdx f : a.friends) rec.declared_friends.push_back(d.agent(f).id);
        b.add_agent(std::move(rec));
    }
    for (ItemIdx t = 0; t < d.item_count(); ++t) b.add_item(d.item(t).id, d.item(t).categories);
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        const auto& row = d.ratings_of(i);
        for (std::size_t r = 0; r < row.size(); ++r)
            if (!to_test[i][r]) b.add_rating(d.agent(i).id, d.item(row[r].item).id, row[r].stars);
    }
    return b.finalize();
}

}  // namespace

SplitResult split_per_user(const Dataset& d, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw data_error("test_fraction must be in (0, 1)");

    std::mt19937_64 rng(seed);
    std::vector<std::vector<bool>> to_test(d.agent_count());
    std::vector<TestRating> test;
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        const auto& row = d.ratings_of(i);
        to_test[i].assign(row.size(), false);
        auto n_test = static_cast<std::size_t>(
            std::floor(test_fraction * static_cast<double>(row.size())));
        if (n_test == 0) continue;
        std::vector<std::size_t> order(row.size());
        for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t r = 0; r < n_test; ++r) to_test[i][order[r]] = true;
        for (std::size_t r = 0; r < row.size(); ++r)
            if (to_test[i][r]) test.push_back(TestRating{i, row[r].item, row[r].stars});
    }
    SplitResult out{rebuild_without(d, to_test), std::move(test)};
    return out;
}

std::vector<FoldSplit> make_cv_folds(const Dataset& d, int folds, std::uint64_t seed) {
    if (folds < 2) throw data_error("folds must be >= 2");

    std::mt19937_64 rng(seed);
    // fold_of[i][r]: which fold tests rating r of user i; -1 stays in train.
    std::vector<std::vector<int>> fold_of(d.agent_count());
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        const auto& row = d.ratings_of(i);
        fold_of[i].assign(row.size(), -1);
        if (row.size() < static_cast<std::size_t>(folds)) continue;
        std::vector<std::size_t> order(row.size());
        for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t r = 0; r < order.size(); ++r)
            fold_of[i][order[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
    }

    std::vector<FoldSplit> out;
    out.reserve(folds);
    for (int f = 0; f < folds; ++f) {
        std::vector<std::vector<bool>> to_test(d.agent_count());
        std::vector<TestRating> test;
        for (AgentIdx i = 0; i < d.agent_count(); ++i) {
            const auto& row = d.ratings_of(i);
            to_test[i].assign(row.size(), false);
            for (std::size_t r = 0; r < row.size(); ++r) {
                if (fold_of[i][r] == f) {
                    to_test[i][r] = true;
                    test.push_back(TestRating{i, row[r].item, row[r].stars});
                }
            }
        }
        out.push_back(FoldSplit{f, rebuild_without(d, to_test), std::move(test)});
    }
    return out;
}

// ------------------------------------------------------------------ stats

namespace {

StatSummary summarize(std::vector<double> values) {
    StatSummary s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    std::size_t n = values.size();
    s.median = (n % 2) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    s.min = values.front();
    s.max = values.back();
    // Mode: smallest value among those with maximal frequency.
    double best = values[0];
    std::size_t best_count = 0, run = 0;
    for (std::size_t i = 0; i < n; ++i) {
        run = (i > 0 && values[i] == values[i - 1]) ? run + 1 : 1;
        if (run > best_count) {
            best_count = run;
            best = values[i];
        }
    }
    s.mode = best;
    return s;
}

json summary_to_json(const StatSummary& s) {
    return json{{"mean", s.mean}, {"median", s.median}, {"mode", s.mode}, {"min", s.min}, {"max", s.max}};
}

}  // namespace

DatasetStats dataset_stats(const Dataset& d) {
    if (d.agent_count() == 0) throw data_error("dataset_stats: empty dataset");
    DatasetStats st;
    st.n_agents = static_cast<std::size_t>(d.agent_count());
    st.n_items = static_cast<std::size_t>(d.item_count());
    st.n_ratings = d.rating_count();

    std::vector<double> friends, reviews, user_avgs, per_item, scores;
    for (AgentIdx i = 0; i < d.agent_count(); ++i) {
        friends.push_back(static_cast<double>(d.agent(i).friends.size()));
        const auto& row = d.ratings_of(i);
        reviews.push_back(static_cast<double>(row.size()));
        if (!row.empty()) {
            double s = 0.0;
            for (const auto& r : row) {
                s += r.stars;
                scores.push_back(r.stars);
            }
            user_avgs.push_back(s / static_cast<double>(row.size()));
        }
    }
    for (ItemIdx t = 0; t < d.item_count(); ++t)
        per_item.push_back(static_cast<double>(d.raters_of(t).size()));

    st.friends_per_user = summarize(std::move(friends));
    st.reviews_per_user = summarize(std::move(reviews));
    st.avg_user_rating = summarize(std::move(user_avgs));
    st.reviews_per_item = summarize(std::move(per_item));
    st.review_scores = summarize(std::move(scores));
    return st;
}

std::string stats_to_json(const DatasetStats& s) {
    json j;
    j["n_agents"] = s.n_agents;
    j["n_items"] = s.n_items;
    j["n_ratings"] = s.n_ratings;
    j["friends_per_user"] = summary_to_json(s.friends_per_user);
    j["reviews_per_user"] = summary_to_json(s.reviews_per_user);
    j["avg_user_rating"] = summary_to_json(s.avg_user_rating);
    j["reviews_per_item"] = summary_to_json(s.reviews_per_item);
    j["review_scores"] = summary_to_json(s.review_scores);
    return j.dump(2);
}

}  // namespace trustrec
