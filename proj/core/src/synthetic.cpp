#include "colink/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "colink/document.hpp"
#include "colink/error.hpp"
#include "colink/json_io.hpp"
#include "yaml_util.hpp"

namespace fs = std::filesystem;

namespace colink {

namespace {

const std::vector<std::string> kSubsystems = {"billing",   "crm",     "hr",        "inventory", "logistics", "procurement",
                                              "support",   "marketing", "finance", "analytics", "security"};

const std::vector<std::string> kNouns = {
    "orders",   "invoices",  "customers", "payments",   "accounts",  "products", "shipments", "tickets",
    "employees", "contracts", "suppliers", "warehouses", "campaigns", "leads",    "reports",   "sessions",
    "devices",  "users",     "roles",     "permissions", "vendors",  "budgets",  "ledgers",   "assets",
    "claims",   "policies",  "projects",  "tasks",      "teams",     "events",   "messages",  "documents",
    "stores",   "regions",   "routes",    "vehicles",   "drivers",   "carriers", "quotes",    "receipts",
    "refunds",  "plans",     "licenses",  "audits",     "incidents", "alerts",   "metrics",   "batches"};

const std::vector<std::string> kPeople = {"John Smith",   "Ada Lovelace", "Grace Hopper", "Alan Turing",
                                          "Edsger Dijkstra", "Barbara Liskov", "Donald Knuth", "Frances Allen",
                                          "Ken Thompson", "Margaret Hamilton", "Niklaus Wirth", "Radia Perlman"};

const std::vector<std::string> kCities = {"Moscow", "Kazan", "Perm", "Omsk", "Tver", "Samara", "Tula", "Sochi"};
const std::vector<std::string> kStatuses = {"open", "closed", "pending", "archived"};
const std::vector<std::string> kTags = {"priority", "internal", "external", "legacy", "review", "new"};
const std::vector<std::string> kCodeFields = {"categoryId", "typeId", "regionId", "statusId", "kindId"};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t child_seed(std::uint64_t master, std::string_view label) { return splitmix64(master ^ fnv1a(label)); }

enum class KeyStyle { Hash, Int, Composite };

struct Link {
    std::size_t referencing;  // collection index
    std::size_t target_entity;
    std::string field;
    bool many = false;
    std::vector<std::size_t> pool_indices;  // into the target entity's pool
};

struct GenCollection {
    std::string id, name, subsystem;
    std::size_t entity = 0;
    std::size_t docs = 0;
    std::size_t shared = 0;       // docs drawing from the entity's common prefix
    std::size_t fresh_begin = 0;  // pool offset of this member's own values
    bool envelope = false;
    std::string code_field;  // empty when absent
    bool frequent = false;
    std::vector<std::size_t> links;  // indices into the link list
    std::set<std::string> fields;
};

struct GenEntity {
    std::string base, subsystem;
    KeyStyle style = KeyStyle::Hash;
    std::vector<std::size_t> members;  // collection indices
    std::int64_t int_base = 0;
    std::size_t common = 0;  // prefix of the pool present in every member
    // Shuffled common prefix; referrers take disjoint slices so that two
    // collections pointing at the same entity share no values.
    std::vector<std::size_t> unclaimed;
    std::uint64_t seed = 0;
};

std::string hex24(std::uint64_t seed, std::size_t k) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t a = splitmix64(seed ^ (0x51ed27a3ULL * (k + 1)));
    std::uint64_t b = splitmix64(a ^ k);
    std::string out(24, '0');
    for (int i = 0; i < 16; ++i) out[i] = digits[(a >> (4 * i)) & 0xf];
    for (int i = 0; i < 8; ++i) out[16 + i] = digits[(b >> (4 * i)) & 0xf];
    return out;
}

Value pool_value(const GenEntity& e, std::size_t k) {
    switch (e.style) {
        case KeyStyle::Hash: return Value(hex24(e.seed, k));
        case KeyStyle::Int: return Value(e.int_base + static_cast<std::int64_t>(k));
        case KeyStyle::Composite:
            return Value(Array{Value(e.int_base + static_cast<std::int64_t>(k)),
                               Value(kPeople[k % kPeople.size()])});
    }
    return Value();
}

std::string camel(const std::string& snake) {
    std::string out;
    bool upper = false;
    for (char c : snake) {
        if (c == '_') {
            upper = true;
            continue;
        }
        out += upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        upper = false;
    }
    return out;
}

std::string capitalized(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::vector<std::string> entity_names(std::size_t needed) {
    std::vector<std::string> names = kNouns;
    for (std::size_t i = 0; names.size() < needed; ++i)
        names.push_back(kNouns[i % kNouns.size()] + "_" + kNouns[(i / kNouns.size() + 1 + i) % kNouns.size()] +
                        (i >= kNouns.size() * kNouns.size() ? "_x" + std::to_string(i) : ""));
    std::set<std::string> seen;
    std::vector<std::string> unique;
    for (auto& n : names)
        if (seen.insert(n).second) unique.push_back(std::move(n));
    for (std::size_t i = 0; unique.size() < needed; ++i) unique.push_back("entity_x" + std::to_string(i));
    return unique;
}

class Generator {
public:
    explicit Generator(const CorpusSpec& spec) : spec_(spec), rng_(splitmix64(spec.seed)) {}

    GroundTruth run(const fs::path& out) {
        plan_collections();
        plan_documents();
        plan_pools();
        plan_links();
        plan_noise();
        write(out);
        return truth();
    }

private:
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    void plan_collections() {
        std::vector<std::string> subsystems = spec_.subsystem_names;
        for (std::size_t i = subsystems.size(); i < spec_.num_subsystems; ++i)
            subsystems.push_back(i < kSubsystems.size() ? kSubsystems[i] : "subsystem_" + std::to_string(i));
        subsystems.resize(spec_.num_subsystems);

        const auto [lo, hi] = spec_.collections_per_subsystem;
        const auto names = entity_names(hi);
        for (const auto& sub : subsystems) {
            const std::size_t target = std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
            std::vector<std::string> pool = names;
            std::shuffle(pool.begin(), pool.end(), rng_);
            std::size_t made = 0, next_name = 0;
            while (made < target) {
                std::size_t size = 1;
                const std::size_t remaining = target - made;
                if (remaining >= 2 && uniform() < spec_.version_group_rate)
                    size = remaining >= 3 && uniform() < 0.5 ? 3 : 2;
                GenEntity e;
                e.base = pool[next_name++ % pool.size()];
                e.subsystem = sub;
                const double r = uniform() * (spec_.hash_key_share + spec_.int_key_share + spec_.composite_key_share);
                e.style = r < spec_.hash_key_share                          ? KeyStyle::Hash
                          : r < spec_.hash_key_share + spec_.int_key_share ? KeyStyle::Int
                                                                            : KeyStyle::Composite;
                for (std::size_t m = 0; m < size; ++m) {
                    GenCollection c;
                    c.name = m == 0 ? e.base : e.base + "_v" + std::to_string(m + 1);
                    c.subsystem = sub;
                    c.id = sub + "/" + c.name;
                    c.entity = entities_.size();
                    e.members.push_back(collections_.size());
                    collections_.push_back(std::move(c));
                }
                e.seed = child_seed(spec_.seed, "entity:" + e.subsystem + "/" + e.base);
                entities_.push_back(std::move(e));
                made += size;
            }
        }
    }

    void plan_documents() {
        const auto [lo, hi] = spec_.docs_per_collection;
        const double a = std::log(static_cast<double>(lo));
        const double b = std::log(static_cast<double>(hi) + 1.0);
        for (auto& c : collections_) {
            const double d = std::floor(std::exp(a + (b - a) * uniform()));
            c.docs = std::clamp<std::size_t>(static_cast<std::size_t>(d), lo, hi);
        }
        if (spec_.total_documents == 0 || collections_.empty()) return;
        const double sum = std::accumulate(collections_.begin(), collections_.end(), 0.0,
                                           [](double s, const GenCollection& c) { return s + c.docs; });
        const double f = static_cast<double>(spec_.total_documents) / sum;
        std::size_t total = 0;
        for (auto& c : collections_) {
            c.docs = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c.docs * f)));
            total += c.docs;
        }
        std::vector<std::size_t> order(collections_.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return collections_[x].docs > collections_[y].docs; });
        for (std::size_t i = 0; total != spec_.total_documents; i = (i + 1) % order.size()) {
            auto& c = collections_[order[i]];
            if (total < spec_.total_documents) {
                ++c.docs;
                ++total;
            } else if (c.docs > 1) {
                --c.docs;
                --total;
            }
        }
    }

    void plan_pools() {
        std::int64_t next_base = 10000;
        for (auto& e : entities_) {
            std::size_t prefix = 0;
            e.common = std::numeric_limits<std::size_t>::max();
            for (std::size_t idx : e.members) {
                auto& c = collections_[idx];
                c.shared = e.members.size() == 1
                               ? c.docs
                               : std::min(c.docs, static_cast<std::size_t>(
                                                      std::ceil(spec_.version_primary_overlap * c.docs)));
                prefix = std::max(prefix, c.shared);
                e.common = std::min(e.common, c.shared);
            }
            e.unclaimed.resize(e.common);
            std::iota(e.unclaimed.begin(), e.unclaimed.end(), 0);
            std::shuffle(e.unclaimed.begin(), e.unclaimed.end(), rng_);
            std::size_t fresh = prefix;
            for (std::size_t idx : e.members) {
                auto& c = collections_[idx];
                c.fresh_begin = fresh;
                fresh += c.docs - c.shared;
            }
            if (e.style != KeyStyle::Hash && uniform() < spec_.noise.zero_based_int_primary_rate) {
                e.int_base = 0;
            } else {
                e.int_base = next_base;
                next_base += static_cast<std::int64_t>(fresh) + 1000;
            }
        }
    }

    // Index of the member with the most documents (first on ties).
    std::size_t referencing_member(std::size_t entity) const {
        const auto& members = entities_[entity].members;
        return *std::max_element(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
            return collections_[x].docs < collections_[y].docs;
        });
    }

    bool can_reference(std::size_t from, std::size_t to) const {
        const auto& target = entities_[to];
        if (target.unclaimed.size() < 2) return false;
        return collections_[referencing_member(from)].docs >= 2 || target.style == KeyStyle::Hash;
    }

    bool add_link(std::size_t a, std::size_t b) {
        if (a == b) return false;
        if (linked_.count(std::minmax(a, b))) return false;
        const bool ab = can_reference(a, b), ba = can_reference(b, a);
        if (!ab && !ba) return false;
        const bool forward = ab && (!ba || uniform() < 0.5);
        const std::size_t from = forward ? a : b, to = forward ? b : a;
        linked_.insert(std::minmax(a, b));

        Link link;
        link.referencing = referencing_member(from);
        link.target_entity = to;
        const auto& target = entities_[to];
        auto& ref = collections_[link.referencing];
        auto& target_pool = entities_[to].unclaimed;
        const std::size_t remaining = target_pool.size();
        std::size_t values;
        if (ref.docs == 1) {
            link.many = true;
            values = std::min<std::size_t>(remaining, 2 + pick(4));
        } else {
            link.many = target.style == KeyStyle::Hash && uniform() < spec_.multi_ref_rate;
            const auto wanted = static_cast<std::size_t>(std::ceil(spec_.link_value_fraction * remaining));
            values = std::min({remaining, link.many ? 2 * ref.docs : ref.docs, std::max<std::size_t>(2, wanted)});
        }
        link.pool_indices.assign(target_pool.end() - static_cast<std::ptrdiff_t>(values), target_pool.end());
        target_pool.resize(remaining - values);

        std::string stem = camel(target.base);
        std::string field = stem + (link.many ? "Ids" : "Id");
        if (ref.fields.count(field)) field = stem + capitalized(target.subsystem) + (link.many ? "Ids" : "Id");
        for (int k = 2; ref.fields.count(field); ++k)
            field = stem + capitalized(target.subsystem) + std::to_string(k) + (link.many ? "Ids" : "Id");
        ref.fields.insert(field);
        link.field = field;
        ref.links.push_back(links_.size());
        links_.push_back(std::move(link));
        return true;
    }

    std::size_t choose_partner(std::size_t e, std::size_t limit) {
        if (uniform() < spec_.intra_subsystem_link_rate) {
            std::vector<std::size_t> same;
            for (std::size_t f = 0; f < limit; ++f)
                if (f != e && entities_[f].subsystem == entities_[e].subsystem) same.push_back(f);
            if (!same.empty()) return same[pick(same.size())];
        }
        return pick(limit);
    }

    void plan_links() {
        const std::size_t v = entities_.size();
        if (v < 2) return;
        for (std::size_t e = 1; e < v; ++e) {
            bool done = false;
            for (int attempt = 0; attempt < 20 && !done; ++attempt) done = add_link(e, choose_partner(e, e));
            if (done) continue;
            std::vector<std::size_t> order(v);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng_);
            for (std::size_t f : order)
                if (add_link(e, f)) break;
        }
        const auto wanted = static_cast<std::size_t>(std::llround(spec_.planted_link_degree * v / 2.0));
        for (std::size_t attempt = 0; linked_.size() < wanted && attempt < 50 * v; ++attempt) {
            const std::size_t e = pick(v);
            add_link(e, choose_partner(e, v));
        }
    }

    void plan_noise() {
        for (auto& c : collections_) {
            c.envelope = uniform() < spec_.envelope_rate;
            if (uniform() < spec_.noise.small_int_collision_rate) {
                c.code_field = kCodeFields[pick(kCodeFields.size())];
                while (c.fields.count(c.code_field)) c.code_field = "x" + capitalized(c.code_field);
                c.fields.insert(c.code_field);
            }
            c.frequent = !spec_.noise.frequent_key_values.empty() && uniform() < spec_.noise.frequent_key_rate;
        }
    }

    static Value frequent_value(const std::string& text) {
        std::int64_t v = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec == std::errc() && res.ptr == text.data() + text.size()) return Value(v);
        return Value(text);
    }

    Value maybe_null(std::mt19937_64& rng, Value v) const {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < spec_.noise.unfilled_field_rate ? Value()
                                                                                                        : std::move(v);
    }

    std::string collection_text(std::size_t index) const {
        const auto& c = collections_[index];
        const auto& e = entities_[c.entity];
        std::mt19937_64 rng(child_seed(spec_.seed, "collection:" + c.id));
        auto uni = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
        const std::string primary_field = e.style == KeyStyle::Hash ? "_id" : "id";

        std::string out;
        for (std::size_t i = 0; i < c.docs; ++i) {
            Object payload;
            const std::size_t k = i < c.shared ? i : c.fresh_begin + (i - c.shared);
            payload.insert_or_assign(primary_field, pool_value(e, k));
            payload.insert_or_assign("name", Value(kPeople[uni(kPeople.size())]));
            for (std::size_t li : c.links) {
                const auto& link = links_[li];
                const auto& target = entities_[link.target_entity];
                const auto& idx = link.pool_indices;
                if (link.many) {
                    Array values;
                    if (c.docs == 1) {
                        for (std::size_t p : idx) values.push_back(pool_value(target, p));
                    } else {
                        const std::size_t width = std::min<std::size_t>(idx.size(), 2 + i % 2);
                        for (std::size_t t = 0; t < width; ++t)
                            values.push_back(pool_value(target, idx[(2 * i + t) % idx.size()]));
                    }
                    payload.insert_or_assign(link.field, Value(std::move(values)));
                } else {
                    payload.insert_or_assign(link.field, pool_value(target, idx[i % idx.size()]));
                }
            }
            if (!c.code_field.empty())
                payload.insert_or_assign(c.code_field, Value(static_cast<std::int64_t>(
                                                           uni(static_cast<std::size_t>(spec_.noise.small_int_range)))));
            if (c.frequent) {
                const auto& values = spec_.noise.frequent_key_values;
                payload.insert_or_assign("parentId", frequent_value(values[i % values.size()]));
            }
            payload.insert_or_assign(
                "amount", maybe_null(rng, Value(static_cast<double>(uni(1000000)) / 100.0)));
            payload.insert_or_assign("status", maybe_null(rng, Value(kStatuses[uni(kStatuses.size())])));
            payload.insert_or_assign("notes", maybe_null(rng, Value("note " + std::to_string(uni(100000)))));
            payload.insert_or_assign(
                "address", maybe_null(rng, Value(Object{{"city", Value(kCities[uni(kCities.size())])},
                                                        {"zip", Value(std::to_string(100000 + uni(900000)))}})));
            payload.insert_or_assign(
                "tags", maybe_null(rng, Value(Array{Value(kTags[uni(kTags.size())]), Value(kTags[uni(kTags.size())])})));
            char date[16];
            std::snprintf(date, sizeof date, "%04zu-%02zu-%02zu", 2015 + uni(10), 1 + uni(12), 1 + uni(28));

            Object root;
            if (c.envelope) {
                root.insert_or_assign("createdAt", Value(std::string(date)));
                root.insert_or_assign("source", Value(c.subsystem));
                root.insert_or_assign("data", Value(std::move(payload)));
            } else {
                payload.insert_or_assign("createdAt", Value(std::string(date)));
                root = std::move(payload);
            }
            out += serialize(Value(std::move(root)));
            out += '\n';
        }
        return out;
    }

    void write(const fs::path& out) {
        std::error_code ec;
        if (fs::exists(out, ec) && !fs::is_empty(out, ec)) {
            if (!fs::exists(out / "ground_truth.json"))
                throw IoError("refusing to generate into non-empty directory " + out.string());
            for (const auto& entry : fs::directory_iterator(out))
                if (entry.is_directory()) fs::remove_all(entry.path());
        }
        fs::create_directories(out, ec);
        if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
        for (std::size_t i = 0; i < collections_.size(); ++i) {
            const auto& c = collections_[i];
            write_text_file(out / c.subsystem / (c.name + ".jsonl"), collection_text(i));
        }
        write_text_file(out / "ground_truth.json", truth().to_json().dump(2) + "\n");
    }

    GroundTruth truth() const {
        GroundTruth t;
        t.seed = spec_.seed;
        for (const auto& c : collections_) {
            t.subsystem_of[c.id] = c.subsystem;
            t.documents[c.id] = c.docs;
        }
        for (const auto& link : links_) {
            const auto& target = entities_[link.target_entity];
            t.true_links.emplace_back(collections_[link.referencing].id, collections_[target.members.front()].id);
        }
        std::sort(t.true_links.begin(), t.true_links.end());
        for (const auto& e : entities_) {
            std::vector<std::string> group;
            for (std::size_t m : e.members) group.push_back(collections_[m].id);
            std::sort(group.begin(), group.end());
            t.entity_groups.push_back(std::move(group));
        }
        std::sort(t.entity_groups.begin(), t.entity_groups.end());
        return t;
    }

    const CorpusSpec& spec_;
    std::mt19937_64 rng_;
    std::vector<GenCollection> collections_;
    std::vector<GenEntity> entities_;
    std::vector<Link> links_;
    std::set<std::pair<std::size_t, std::size_t>> linked_;
};

}  // namespace

CorpusSpec CorpusSpec::frequent_key_noise(std::uint64_t seed) {
    CorpusSpec spec;
    spec.seed = seed;
    spec.noise.frequent_key_values = {"0", "1", "2", "3"};
    spec.noise.frequent_key_rate = 0.8;
    return spec;
}

void validate_spec(const CorpusSpec& s) {
    auto rate = [](double v, const char* key) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(key, "must lie in [0, 1]");
    };
    if (s.num_subsystems == 0) throw ValidationError("num_subsystems", "must be at least 1");
    if (s.collections_per_subsystem.first == 0 || s.collections_per_subsystem.first > s.collections_per_subsystem.second)
        throw ValidationError("collections_per_subsystem", "expected a non-empty range [min, max] with min >= 1");
    if (s.docs_per_collection.first == 0 || s.docs_per_collection.first > s.docs_per_collection.second)
        throw ValidationError("docs_per_collection", "expected a non-empty range [min, max] with min >= 1");
    if (!(s.planted_link_degree >= 0.0)) throw ValidationError("planted_link_degree", "must be non-negative");
    rate(s.intra_subsystem_link_rate, "intra_subsystem_link_rate");
    rate(s.hash_key_share, "key_style_mix.hash");
    rate(s.int_key_share, "key_style_mix.int");
    rate(s.composite_key_share, "key_style_mix.composite");
    if (s.hash_key_share + s.int_key_share + s.composite_key_share <= 0.0)
        throw ValidationError("key_style_mix", "at least one key style needs a positive share");
    rate(s.multi_ref_rate, "key_style_mix.multi");
    rate(s.version_group_rate, "version_group_rate");
    rate(s.version_primary_overlap, "version_primary_overlap");
    rate(s.link_value_fraction, "link_value_fraction");
    rate(s.envelope_rate, "envelope_rate");
    rate(s.noise.small_int_collision_rate, "noise.small_int_collision_rate");
    rate(s.noise.frequent_key_rate, "noise.frequent_key_rate");
    rate(s.noise.unfilled_field_rate, "noise.unfilled_field_rate");
    rate(s.noise.zero_based_int_primary_rate, "noise.zero_based_int_primary_rate");
    if (s.noise.small_int_range < 1) throw ValidationError("noise.small_int_range", "must be at least 1");
    if (s.subsystem_names.size() > s.num_subsystems)
        throw ValidationError("subsystem_names", "more names than subsystems");
}

CorpusSpec spec_from_yaml(std::string_view text) {
    using namespace yaml_util;
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("malformed YAML: ") + e.what());
    }
    CorpusSpec s;
    if (root.IsNull()) return s;
    check_keys(root, "",
               {"seed", "num_subsystems", "subsystem_names", "collections_per_subsystem", "docs_per_collection",
                "total_documents", "planted_link_degree", "intra_subsystem_link_rate", "key_style_mix",
                "version_group_rate", "version_primary_overlap", "link_value_fraction", "envelope_rate", "noise"});
    auto range = [](const YAML::Node& n, const std::string& key) {
        if (!n.IsSequence() || n.size() != 2) throw ValidationError(key, "expected [min, max]");
        return std::pair<std::size_t, std::size_t>{read_count(n[0], key + "[0]"), read_count(n[1], key + "[1]")};
    };
    if (root["seed"]) s.seed = read_scalar<std::uint64_t>(root["seed"], "seed", "an unsigned integer");
    if (root["num_subsystems"]) s.num_subsystems = read_count(root["num_subsystems"], "num_subsystems");
    if (root["subsystem_names"]) s.subsystem_names = read_strings(root["subsystem_names"], "subsystem_names");
    if (root["collections_per_subsystem"])
        s.collections_per_subsystem = range(root["collections_per_subsystem"], "collections_per_subsystem");
    if (root["docs_per_collection"]) s.docs_per_collection = range(root["docs_per_collection"], "docs_per_collection");
    if (root["total_documents"]) s.total_documents = read_count(root["total_documents"], "total_documents");
    if (root["planted_link_degree"]) s.planted_link_degree = read_real(root["planted_link_degree"], "planted_link_degree");
    if (root["intra_subsystem_link_rate"])
        s.intra_subsystem_link_rate = read_real(root["intra_subsystem_link_rate"], "intra_subsystem_link_rate");
    if (const auto mix = root["key_style_mix"]) {
        check_keys(mix, "key_style_mix", {"hash", "int", "composite", "multi"});
        if (mix["hash"]) s.hash_key_share = read_real(mix["hash"], "key_style_mix.hash");
        if (mix["int"]) s.int_key_share = read_real(mix["int"], "key_style_mix.int");
        if (mix["composite"]) s.composite_key_share = read_real(mix["composite"], "key_style_mix.composite");
        if (mix["multi"]) s.multi_ref_rate = read_real(mix["multi"], "key_style_mix.multi");
    }
    if (root["version_group_rate"]) s.version_group_rate = read_real(root["version_group_rate"], "version_group_rate");
    if (root["version_primary_overlap"])
        s.version_primary_overlap = read_real(root["version_primary_overlap"], "version_primary_overlap");
    if (root["link_value_fraction"]) s.link_value_fraction = read_real(root["link_value_fraction"], "link_value_fraction");
    if (root["envelope_rate"]) s.envelope_rate = read_real(root["envelope_rate"], "envelope_rate");
    if (const auto noise = root["noise"]) {
        check_keys(noise, "noise",
                   {"small_int_collision_rate", "small_int_range", "frequent_key_values", "frequent_key_rate",
                    "unfilled_field_rate", "zero_based_int_primary_rate"});
        auto& n = s.noise;
        if (noise["small_int_collision_rate"])
            n.small_int_collision_rate = read_real(noise["small_int_collision_rate"], "noise.small_int_collision_rate");
        if (noise["small_int_range"])
            n.small_int_range = read_scalar<std::int64_t>(noise["small_int_range"], "noise.small_int_range", "an integer");
        if (noise["frequent_key_values"])
            n.frequent_key_values = read_strings(noise["frequent_key_values"], "noise.frequent_key_values");
        if (noise["frequent_key_rate"]) n.frequent_key_rate = read_real(noise["frequent_key_rate"], "noise.frequent_key_rate");
        if (noise["unfilled_field_rate"])
            n.unfilled_field_rate = read_real(noise["unfilled_field_rate"], "noise.unfilled_field_rate");
        if (noise["zero_based_int_primary_rate"])
            n.zero_based_int_primary_rate =
                read_real(noise["zero_based_int_primary_rate"], "noise.zero_based_int_primary_rate");
    }
    validate_spec(s);
    return s;
}

CorpusSpec load_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read corpus spec " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return spec_from_yaml(buffer.str());
}

std::string spec_to_yaml(const CorpusSpec& s) {
    nlohmann::ordered_json j;
    j["seed"] = s.seed;
    j["num_subsystems"] = s.num_subsystems;
    if (!s.subsystem_names.empty()) j["subsystem_names"] = s.subsystem_names;
    j["collections_per_subsystem"] = {s.collections_per_subsystem.first, s.collections_per_subsystem.second};
    j["docs_per_collection"] = {s.docs_per_collection.first, s.docs_per_collection.second};
    j["total_documents"] = s.total_documents;
    j["planted_link_degree"] = s.planted_link_degree;
    j["intra_subsystem_link_rate"] = s.intra_subsystem_link_rate;
    j["key_style_mix"] = {{"hash", s.hash_key_share},
                          {"int", s.int_key_share},
                          {"composite", s.composite_key_share},
                          {"multi", s.multi_ref_rate}};
    j["version_group_rate"] = s.version_group_rate;
    j["version_primary_overlap"] = s.version_primary_overlap;
    j["link_value_fraction"] = s.link_value_fraction;
    j["envelope_rate"] = s.envelope_rate;
    j["noise"] = {{"small_int_collision_rate", s.noise.small_int_collision_rate},
                  {"small_int_range", s.noise.small_int_range},
                  {"frequent_key_values", s.noise.frequent_key_values},
                  {"frequent_key_rate", s.noise.frequent_key_rate},
                  {"unfilled_field_rate", s.noise.unfilled_field_rate},
                  {"zero_based_int_primary_rate", s.noise.zero_based_int_primary_rate}};
    YAML::Emitter out;
    yaml_util::emit(out, j);
    return std::string(out.c_str()) + "\n";
}

GroundTruth generate_corpus(const CorpusSpec& spec, const fs::path& out) {
    validate_spec(spec);
    Generator gen(spec);
    return gen.run(out);
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json GroundTruth::to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["subsystems"] = subsystem_of;
    j["documents"] = documents;
    auto links = nlohmann::ordered_json::array();
    for (const auto& [a, b] : true_links) links.push_back({a, b});
    j["true_links"] = links;
    j["entity_groups"] = entity_groups;
    return j;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
    try {
        GroundTruth t;
        t.seed = j.at("seed").get<std::uint64_t>();
        t.subsystem_of = j.at("subsystems").get<std::map<std::string, std::string>>();
        if (j.contains("documents")) t.documents = j.at("documents").get<std::map<std::string, std::size_t>>();
        for (const auto& link : j.at("true_links"))
            t.true_links.emplace_back(link.at(0).get<std::string>(), link.at(1).get<std::string>());
        t.entity_groups = j.at("entity_groups").get<std::vector<std::vector<std::string>>>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed ground truth: ") + e.what());
    }
}

GroundTruth read_ground_truth(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read ground truth " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("ground truth " + path.string() + " is not valid JSON: " + e.what());
    }
    return GroundTruth::from_json(j);
}

nlohmann::ordered_json Evaluation::to_json() const {
    return {{"link_precision", link_precision},
            {"link_recall", link_recall},
            {"link_f1", link_f1},
            {"pairwise_precision", pairwise_precision},
            {"pairwise_recall", pairwise_recall},
            {"pairwise_f1", pairwise_f1},
            {"subsystems_covered", subsystems_covered},
            {"subsystems_total", subsystems_total},
            {"average_degree", average_degree},
            {"predicted_links", predicted_links},
            {"true_links", true_links}};
}

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::size_t pairs(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

Evaluation evaluate_against_truth(const GraphDocument& result, const GroundTruth& truth) {
    std::unordered_map<std::string, std::size_t> node_of;
    for (std::size_t i = 0; i < result.nodes.size(); ++i) {
        for (const auto& c : result.nodes[i].collections) {
            if (!truth.subsystem_of.count(c))
                throw CorpusMismatch("result collection '" + c + "' is not part of the ground truth");
            node_of[c] = i;
        }
    }
    std::unordered_map<std::string, std::size_t> node_index;
    for (std::size_t i = 0; i < result.nodes.size(); ++i) node_index[result.nodes[i].id] = i;

    Evaluation ev;
    std::set<std::pair<std::size_t, std::size_t>> predicted;
    std::vector<std::size_t> degree(result.nodes.size(), 0);
    for (const auto& e : result.edges) {
        auto u = node_index.find(e.u), v = node_index.find(e.v);
        if (u == node_index.end() || v == node_index.end())
            throw ParseError("graph edge references an unknown node: " + e.u + " -- " + e.v);
        if (u->second == v->second) continue;
        if (predicted.insert(std::minmax(u->second, v->second)).second) {
            ++degree[u->second];
            ++degree[v->second];
        }
    }
    std::set<std::pair<std::size_t, std::size_t>> expected;
    std::size_t unreachable = 0;
    for (const auto& [a, b] : truth.true_links) {
        auto u = node_of.find(a), v = node_of.find(b);
        if (u == node_of.end() || v == node_of.end()) {
            ++unreachable;
            continue;
        }
        if (u->second != v->second) expected.insert(std::minmax(u->second, v->second));
    }
    std::size_t hits = 0;
    for (const auto& p : predicted) hits += expected.count(p);
    ev.predicted_links = predicted.size();
    ev.true_links = expected.size() + unreachable;
    ev.link_precision = ratio(hits, predicted.size());
    ev.link_recall = ratio(hits, ev.true_links);
    ev.link_f1 = f1(ev.link_precision, ev.link_recall);

    // Pairwise agreement via the contingency table of (truth group, node).
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
    std::map<std::size_t, std::size_t> node_sizes;
    std::size_t truth_pairs = 0;
    for (std::size_t g = 0; g < truth.entity_groups.size(); ++g) {
        std::size_t present = 0;
        for (const auto& c : truth.entity_groups[g]) {
            auto it = node_of.find(c);
            if (it == node_of.end()) continue;
            ++present;
            ++cells[{g, it->second}];
        }
        truth_pairs += pairs(present);
    }
    for (const auto& [c, node] : node_of) ++node_sizes[node];
    std::size_t predicted_pairs = 0, shared_pairs = 0;
    for (const auto& [node, size] : node_sizes) predicted_pairs += pairs(size);
    for (const auto& [cell, size] : cells) shared_pairs += pairs(size);
    ev.pairwise_precision = ratio(shared_pairs, predicted_pairs);
    ev.pairwise_recall = ratio(shared_pairs, truth_pairs);
    ev.pairwise_f1 = f1(ev.pairwise_precision, ev.pairwise_recall);

    std::set<std::string> all, covered;
    for (const auto& [c, node] : node_of) {
        const auto& sub = truth.subsystem_of.at(c);
        all.insert(sub);
        if (degree[node] > 0) covered.insert(sub);
    }
    ev.subsystems_covered = covered.size();
    ev.subsystems_total = all.size();
    ev.average_degree = result.nodes.empty() ? 0.0 : 2.0 * static_cast<double>(predicted.size()) / result.nodes.size();
    return ev;
}

GraphDocument truth_as_graph(const GroundTruth& truth) {
    GraphDocument doc;
    std::vector<std::vector<std::string>> groups = truth.entity_groups;
    std::sort(groups.begin(), groups.end());
    std::unordered_map<std::string, std::size_t> group_of;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& first = groups[g].front();
        const auto slash = first.find('/');
        doc.nodes.push_back(GraphNode{"entity/" + first, slash == std::string::npos ? first : first.substr(slash + 1),
                                      truth.subsystem_of.count(first) ? truth.subsystem_of.at(first) : "", groups[g]});
        for (const auto& c : groups[g]) group_of[c] = g;
    }
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& [a, b] : truth.true_links) {
        auto u = group_of.find(a), v = group_of.find(b);
        if (u == group_of.end() || v == group_of.end() || u->second == v->second) continue;
        edges.insert(std::minmax(u->second, v->second));
    }
    for (const auto& [u, v] : edges) doc.edges.push_back(GraphEdge{doc.nodes[u].id, doc.nodes[v].id, 0, 0.0, 0.0, 0.0});
    doc.meta = {{"kind", "truth"}};
    return doc;
}

}  // namespace colink
