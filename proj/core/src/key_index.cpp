#include "colink/key_index.hpp"

#include <algorithm>

#include "colink/error.hpp"

namespace colink {

void CollectionKeys::OrderedSet::add(const KeyValue& k) {
    if (seen.emplace(k, static_cast<std::uint32_t>(values.size())).second) values.push_back(k);
}

void CollectionKeys::add_key(const KeyValue& k) { keys_.add(k); }

void CollectionKeys::add_primary(std::size_t slot, const KeyValue& k) { primary_.at(slot).add(k); }

const std::vector<std::vector<KeyValue>>& CollectionKeys::primary_candidates() const {
    primary_view_.clear();
    for (const auto& p : primary_) primary_view_.push_back(p.values);
    return primary_view_;
}

CollectionKeys CollectionKeys::restricted_to(std::span<const KeyValue::Kind> kinds) const {
    auto wanted = [&](const KeyValue& k) { return std::find(kinds.begin(), kinds.end(), k.kind()) != kinds.end(); };
    CollectionKeys out(primary_.size());
    for (const auto& k : keys_.values)
        if (wanted(k)) out.add_key(k);
    for (std::size_t slot = 0; slot < primary_.size(); ++slot)
        for (const auto& k : primary_[slot].values)
            if (wanted(k)) out.add_primary(slot, k);
    out.boolean_values_ = boolean_values_;
    return out;
}

namespace {

template <typename Sink>
void add_values(const Value& v, const HashMatcher& hashes, Sink&& sink, CollectionKeys* bool_counter) {
    if (v.is_array() && !is_composite_shape(v.as_array())) {
        for (const auto& el : v.as_array()) {
            if (el.is_array()) continue;
            add_values(el, hashes, sink, bool_counter);
        }
        return;
    }
    auto k = canonicalize_key_value(v, hashes);
    if (!k) return;
    if (k->kind() == KeyValue::Kind::Bool) {
        if (bool_counter) bool_counter->count_boolean();
        return;
    }
    sink(*k);
}

}  // namespace

void extract_keys(const Object& document, const CollectionKeyProfile& profile, const HashMatcher& hashes,
                  CollectionKeys& out) {
    std::vector<const Value*> found;
    auto scan = [&](const FieldPath& path, auto&& sink, CollectionKeys* bool_counter) {
        found.clear();
        resolve_all(document, path, found);
        for (const Value* v : found) add_values(*v, hashes, sink, bool_counter);
    };
    auto to_keys = [&](const KeyValue& k) { out.add_key(k); };
    for (const KeyDescriptor* d : profile.key_descriptors()) scan(d->path, to_keys, &out);

    if (profile.primary) {
        scan(profile.primary->path, [&](const KeyValue& k) { out.add_primary(0, k); }, nullptr);
        for (std::size_t i = 0; i < profile.primary_alternates.size(); ++i)
            scan(profile.primary_alternates[i], [&](const KeyValue& k) { out.add_primary(i + 1, k); }, nullptr);
    }
}

KeySetIndex KeySetIndex::build(std::vector<std::string> collection_ids, const std::vector<CollectionKeys>& keys) {
    if (collection_ids.size() != keys.size())
        throw InvariantViolation("key index: collection/key list size mismatch");
    KeySetIndex idx;
    idx.ids_ = std::move(collection_ids);
    const auto m = idx.ids_.size();
    for (CollectionIndex i = 0; i < m; ++i) {
        if (!idx.id_lookup_.emplace(idx.ids_[i], i).second)
            throw DuplicateCollection("duplicate collection id: " + idx.ids_[i]);
    }
    idx.sets_.resize(m);
    idx.primary_sets_.resize(m);

    auto intern = [&idx](const KeyValue& k) -> KeyId {
        auto [it, inserted] = idx.lookup_.emplace(k, static_cast<KeyId>(idx.values_.size()));
        if (inserted) {
            idx.values_.push_back(k);
            idx.inverted_.emplace_back();
        }
        return it->second;
    };

    for (CollectionIndex i = 0; i < m; ++i) {
        auto& set = idx.sets_[i];
        set.reserve(keys[i].keys().size());
        for (const auto& k : keys[i].keys()) set.push_back(intern(k));
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        for (KeyId z : set) idx.inverted_[z].push_back(i);
    }
    for (CollectionIndex i = 0; i < m; ++i) {
        for (const auto& cand : keys[i].primary_candidates()) {
            std::vector<KeyId> ps;
            ps.reserve(cand.size());
            for (const auto& k : cand) {
                auto it = idx.lookup_.find(k);
                if (it == idx.lookup_.end())
                    throw InvariantViolation("primary key value missing from collection key set");
                ps.push_back(it->second);
            }
            std::sort(ps.begin(), ps.end());
            ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
            idx.primary_sets_[i].push_back(std::move(ps));
        }
    }

    idx.set_weight_.assign(m, 0.0);
    for (CollectionIndex i = 0; i < m; ++i) {
        double w = 0.0;
        for (KeyId z : idx.sets_[i]) w += idx.weight(z);
        idx.set_weight_[i] = w;
    }
    double total = 0.0;
    for (KeyId z = 0; z < idx.values_.size(); ++z) total += idx.weight(z);
    idx.total_weight_ = total;
    return idx;
}

std::optional<CollectionIndex> KeySetIndex::find_collection(std::string_view id) const {
    auto it = id_lookup_.find(std::string(id));
    if (it == id_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<KeyId> KeySetIndex::find_key(const KeyValue& k) const {
    auto it = lookup_.find(k);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

bool KeySetIndex::consistent() const {
    std::size_t pairs_from_sets = 0;
    for (CollectionIndex i = 0; i < sets_.size(); ++i) {
        for (KeyId z : sets_[i]) {
            if (!std::binary_search(inverted_[z].begin(), inverted_[z].end(), i)) return false;
            ++pairs_from_sets;
        }
    }
    std::size_t pairs_from_inverted = 0;
    for (const auto& holders : inverted_) {
        if (holders.empty()) return false;
        pairs_from_inverted += holders.size();
    }
    return pairs_from_sets == pairs_from_inverted;
}

KeySetIndex build_key_index(const std::vector<Collection>& collections,
                            const std::vector<CollectionKeyProfile>& profiles, const HashMatcher& hashes,
                            KeyIndexReport* report) {
    if (collections.size() != profiles.size())
        throw InvariantViolation("build_key_index: one profile per collection required");
    std::vector<std::string> ids;
    std::vector<CollectionKeys> keys;
    for (std::size_t i = 0; i < collections.size(); ++i) {
        const auto& profile = profiles[i];
        const std::size_t slots = profile.primary ? 1 + profile.primary_alternates.size() : 0;
        CollectionKeys ck(slots);
        if (profile.key_descriptors().empty()) {
            if (report) report->empty_profiles.push_back(collections[i].id);
        } else {
            for (const auto& doc : collections[i].documents) extract_keys(doc.root, profile, hashes, ck);
        }
        if (report) report->boolean_values += ck.boolean_values();
        ids.push_back(collections[i].id);
        keys.push_back(std::move(ck));
    }
    return KeySetIndex::build(std::move(ids), keys);
}

}  // namespace colink
