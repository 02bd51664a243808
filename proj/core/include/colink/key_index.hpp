#pragma once

// Per-collection canonical key sets and the inverted map key -> collections.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "colink/document.hpp"
#include "colink/key_inference.hpp"

namespace colink {

using KeyId = std::uint32_t;
using CollectionIndex = std::uint32_t;

// Distinct key values observed in one collection, split by where they came
// from. Filled document by document; order of first appearance is kept.
class CollectionKeys {
public:
    CollectionKeys() = default;
    // `primary_slots` = 1 + number of low-confidence alternates (0 when the
    // profile has no primary).
    explicit CollectionKeys(std::size_t primary_slots) : primary_(primary_slots) {}

    void add_key(const KeyValue& k);
    void add_primary(std::size_t slot, const KeyValue& k);
    void count_boolean() { ++boolean_values_; }

    const std::vector<KeyValue>& keys() const noexcept { return keys_.values; }
    const std::vector<std::vector<KeyValue>>& primary_candidates() const;
    std::size_t boolean_values() const noexcept { return boolean_values_; }

    // Copy holding only keys of the given kinds (primaries filtered alike).
    CollectionKeys restricted_to(std::span<const KeyValue::Kind> kinds) const;

private:
    struct OrderedSet {
        std::vector<KeyValue> values;
        std::unordered_map<KeyValue, std::uint32_t, KeyValueHash> seen;
        void add(const KeyValue& k);
    };

    OrderedSet keys_;
    std::vector<OrderedSet> primary_;
    mutable std::vector<std::vector<KeyValue>> primary_view_;
    std::size_t boolean_values_ = 0;
};

// Adds the canonical key values found in one document at the profile's
// primary and foreign paths. Index segments in paths match every element;
// arrays that are not composite keys contribute each element. Booleans are
// counted but never become keys.
void extract_keys(const Object& document, const CollectionKeyProfile& profile, const HashMatcher& hashes,
                  CollectionKeys& out);

class KeySetIndex {
public:
    // Collections in canonical order; `keys[i]` belongs to `collection_ids[i]`.
    static KeySetIndex build(std::vector<std::string> collection_ids, const std::vector<CollectionKeys>& keys);

    std::size_t num_collections() const noexcept { return ids_.size(); }
    std::size_t num_keys() const noexcept { return values_.size(); }
    const std::string& collection_id(CollectionIndex i) const { return ids_[i]; }
    const std::vector<std::string>& collection_ids() const noexcept { return ids_; }
    std::optional<CollectionIndex> find_collection(std::string_view id) const;

    const KeyValue& key_value(KeyId z) const { return values_[z]; }
    std::optional<KeyId> find_key(const KeyValue& k) const;

    // Sorted key ids of collection i.
    std::span<const KeyId> set(CollectionIndex i) const { return sets_[i]; }
    // Sorted collection indices holding key z.
    std::span<const CollectionIndex> holders(KeyId z) const { return inverted_[z]; }
    // c(z): number of collections holding z.
    std::size_t count(KeyId z) const { return inverted_[z].size(); }

    // Inverse-frequency weight 1/c(z) and its sums.
    double weight(KeyId z) const { return 1.0 / static_cast<double>(inverted_[z].size()); }
    double set_weight(CollectionIndex i) const { return set_weight_[i]; }
    double total_weight() const noexcept { return total_weight_; }

    // Candidate primary-key value sets (sorted key ids); index 0 is the chosen
    // primary, later entries are low-confidence alternates.
    const std::vector<std::vector<KeyId>>& primary_sets(CollectionIndex i) const { return primary_sets_[i]; }

    // Debug/consistency check of the set <-> inverted relation.
    bool consistent() const;

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, CollectionIndex> id_lookup_;
    std::vector<KeyValue> values_;
    std::unordered_map<KeyValue, KeyId, KeyValueHash> lookup_;
    std::vector<std::vector<KeyId>> sets_;
    std::vector<std::vector<CollectionIndex>> inverted_;
    std::vector<std::vector<std::vector<KeyId>>> primary_sets_;
    std::vector<double> set_weight_;
    double total_weight_ = 0.0;
};

struct KeyIndexReport {
    std::vector<std::string> empty_profiles;  // collections indexed with no key paths
    std::size_t boolean_values = 0;
};

// In-memory convenience: extracts keys from every document of every
// collection. `profiles[i]` belongs to `collections[i]`. Collections are
// indexed in the given order.
KeySetIndex build_key_index(const std::vector<Collection>& collections,
                            const std::vector<CollectionKeyProfile>& profiles, const HashMatcher& hashes,
                            KeyIndexReport* report = nullptr);

}  // namespace colink
