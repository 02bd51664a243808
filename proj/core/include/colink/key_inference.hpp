#pragma once

// Detection of identifier, name and date fields in a collection's schema
// document, including composite ([int, text]) and multi-reference (array of
// hashes) key forms.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colink/document.hpp"

namespace colink {

// Ordered keyword list; index 0 has the highest priority.
class KeywordSet {
public:
    // Throws ValidationError on empty list, non-lowercase or duplicate words.
    explicit KeywordSet(std::vector<std::string> words);
    static KeywordSet defaults();

    const std::vector<std::string>& words() const noexcept { return words_; }
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::vector<std::string> words_;
};

struct KeywordMatch {
    std::string keyword;
    std::size_t priority = 0;
    bool exact = false;  // the whole field name equals the keyword

    friend bool operator==(const KeywordMatch&, const KeywordMatch&) = default;
};

// Field names are split into tokens on '_', '-' and camel-case boundaries.
// A keyword matches if it equals a token, or if the lowercased name ends with
// the keyword and that suffix starts on a token boundary ("user_id" ends with
// "_id"; "color" and "android" do not contain "id").
std::optional<KeywordMatch> keyword_match(std::string_view field_name, const KeywordSet& keywords);

std::vector<std::string> tokenize_field_name(std::string_view field_name);

enum class KeyRole : std::uint8_t { Primary, Foreign, Name, Date };
enum class IdType : std::uint8_t { Simple, Composite, Many };

std::string_view to_string(KeyRole r) noexcept;
std::string_view to_string(IdType t) noexcept;

struct KeyDescriptor {
    FieldPath path;
    KeyRole role = KeyRole::Foreign;
    IdType id_type = IdType::Simple;
    std::optional<std::string> matched_keyword;
    std::optional<std::size_t> priority;
    bool exact_match = false;
    bool hash_match = false;  // the schema value was hash-shaped

    friend bool operator==(const KeyDescriptor&, const KeyDescriptor&) = default;
};

struct CollectionKeyProfile {
    std::string collection_id;
    std::optional<KeyDescriptor> primary;
    std::vector<KeyDescriptor> foreign;
    std::vector<KeyDescriptor> names;
    std::vector<KeyDescriptor> dates;
    // Set when the primary was chosen among hash-valued fields without any
    // keyword match. `primary_alternates` then lists the other hash-valued
    // candidates (they also appear in `foreign`).
    bool low_confidence_primary = false;
    std::vector<FieldPath> primary_alternates;

    // Primary plus foreign descriptors: every path whose values enter the
    // collection's key set.
    std::vector<const KeyDescriptor*> key_descriptors() const;

    friend bool operator==(const CollectionKeyProfile&, const CollectionKeyProfile&) = default;
};

struct DateRules {
    // strftime-like: %Y %m %d %H %M %S, plus %f (optional fraction) and %z
    // (optional 'Z' or +hh:mm / -hh:mm offset).
    std::vector<std::string> formats = {"%Y-%m-%d", "%Y-%m-%dT%H:%M:%S%f%z", "%Y/%m/%d", "%d.%m.%Y"};
    // Integers in [min, max) interpreted as epoch seconds or milliseconds.
    std::int64_t epoch_min_seconds = 631152000;    // 1990-01-01
    std::int64_t epoch_max_seconds = 4102444800;   // 2100-01-01
};

struct KeyInferenceConfig {
    KeywordSet keywords = KeywordSet::defaults();
    HashMatcher hashes;
    DateRules dates;
    std::vector<std::string> name_fields = {"name", "title", "label"};
};

bool is_hash(const Value& value, const HashMatcher& hashes);
bool is_hash(const Value& value);

// Exactly two scalar elements, the first an integer, at least one a string.
bool key_is_composite(const Array& array) noexcept;
// Non-empty and every element hash-shaped.
bool key_is_multi_ref(const Array& array, const HashMatcher& hashes);
bool key_is_multi_ref(const Array& array);

bool is_date(const Value& value, const DateRules& rules);
bool is_date(const Value& value);
bool matches_date_format(std::string_view text, std::string_view format);

struct EmbeddedKeys {
    std::vector<KeyDescriptor> foreign;
    std::vector<KeyDescriptor> names;
    std::vector<KeyDescriptor> dates;
};

// Classifies one field (full path + value) and recurses into arrays and
// embedded objects. Array elements are visited with an empty field name.
EmbeddedKeys process_embedded(const FieldPath& path, const Value& value, const KeyInferenceConfig& config);

CollectionKeyProfile find_keys(const Object& document, bool find_primary, const KeyInferenceConfig& config);
CollectionKeyProfile find_keys(const Document& document, bool find_primary, const KeyInferenceConfig& config);

}  // namespace colink
