#include "colink/key_inference.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <set>
#include <unordered_set>

#include "colink/error.hpp"

namespace colink {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower_or_digit(char c) {
    return std::islower(static_cast<unsigned char>(c)) != 0 || std::isdigit(static_cast<unsigned char>(c)) != 0;
}
bool is_separator(char c) { return c == '_' || c == '-' || c == ' ' || c == '.'; }

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

// Positions where a camel-case token starts.
bool camel_boundary(std::string_view name, std::size_t pos) {
    if (pos == 0 || pos >= name.size()) return false;
    const char prev = name[pos - 1];
    const char cur = name[pos];
    if (is_upper(cur) && is_lower_or_digit(prev)) return true;
    // "HTTPServer": boundary before 'S'
    if (is_upper(cur) && is_upper(prev) && pos + 1 < name.size() &&
        std::islower(static_cast<unsigned char>(name[pos + 1])))
        return true;
    return false;
}

}  // namespace

KeywordSet::KeywordSet(std::vector<std::string> words) : words_(std::move(words)) {
    if (words_.empty()) throw ValidationError("keywords", "keyword set must not be empty");
    std::unordered_set<std::string> seen;
    for (const auto& w : words_) {
        if (w.empty()) throw ValidationError("keywords", "empty keyword");
        if (to_lower(w) != w) throw ValidationError("keywords", "keyword must be lowercase: " + w);
        if (!seen.insert(w).second) throw ValidationError("keywords", "duplicate keyword: " + w);
    }
}

KeywordSet KeywordSet::defaults() { return KeywordSet({"_id", "id", "uid", "guid", "key", "pk"}); }

std::vector<std::string> tokenize_field_name(std::string_view name) {
    std::vector<std::string> tokens;
    std::string cur;
    for (std::size_t i = 0; i < name.size(); ++i) {
        const char c = name[i];
        if (is_separator(c)) {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
            continue;
        }
        if (camel_boundary(name, i) && !cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
        cur.push_back(lower(c));
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::optional<KeywordMatch> keyword_match(std::string_view field_name, const KeywordSet& keywords) {
    if (field_name.empty()) return std::nullopt;
    const std::string lowered = to_lower(field_name);
    const auto tokens = tokenize_field_name(field_name);
    for (std::size_t prio = 0; prio < keywords.size(); ++prio) {
        const std::string& kw = keywords.words()[prio];
        bool hit = std::find(tokens.begin(), tokens.end(), kw) != tokens.end();
        if (!hit && lowered.size() >= kw.size() &&
            lowered.compare(lowered.size() - kw.size(), kw.size(), kw) == 0) {
            const std::size_t p = lowered.size() - kw.size();
            hit = p == 0 || is_separator(field_name[p]) || is_separator(field_name[p - 1]) ||
                  camel_boundary(field_name, p);
        }
        if (hit) return KeywordMatch{kw, prio, lowered == kw};
    }
    return std::nullopt;
}

std::string_view to_string(KeyRole r) noexcept {
    switch (r) {
        case KeyRole::Primary: return "primary";
        case KeyRole::Foreign: return "foreign";
        case KeyRole::Name: return "name";
        case KeyRole::Date: return "date";
    }
    return "?";
}

std::string_view to_string(IdType t) noexcept {
    switch (t) {
        case IdType::Simple: return "simple";
        case IdType::Composite: return "composite";
        case IdType::Many: return "many";
    }
    return "?";
}

std::vector<const KeyDescriptor*> CollectionKeyProfile::key_descriptors() const {
    std::vector<const KeyDescriptor*> out;
    if (primary) out.push_back(&*primary);
    for (const auto& f : foreign) out.push_back(&f);
    return out;
}

// ---------------------------------------------------------------------------
// Shape predicates

bool is_hash(const Value& value, const HashMatcher& hashes) { return hashes.matches(value); }

bool is_hash(const Value& value) {
    static const HashMatcher matcher;
    return matcher.matches(value);
}

bool key_is_composite(const Array& array) noexcept { return is_composite_shape(array); }

bool key_is_multi_ref(const Array& array, const HashMatcher& hashes) {
    if (array.empty()) return false;
    return std::all_of(array.begin(), array.end(), [&](const Value& v) { return hashes.matches(v); });
}

bool key_is_multi_ref(const Array& array) {
    static const HashMatcher matcher;
    return key_is_multi_ref(array, matcher);
}

// ---------------------------------------------------------------------------
// Dates

namespace {

bool take_digits(std::string_view text, std::size_t& pos, std::size_t count, int& out) {
    if (pos + count > text.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const char c = text[pos + i];
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        v = v * 10 + (c - '0');
    }
    pos += count;
    out = v;
    return true;
}

}  // namespace

bool matches_date_format(std::string_view text, std::string_view format) {
    int year = -1, month = -1, day = -1, value = 0;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < format.size(); ++f) {
        if (format[f] != '%' || f + 1 >= format.size()) {
            if (pos >= text.size() || text[pos] != format[f]) return false;
            ++pos;
            continue;
        }
        const char spec = format[++f];
        switch (spec) {
            case 'Y':
                if (!take_digits(text, pos, 4, year)) return false;
                break;
            case 'm':
                if (!take_digits(text, pos, 2, month) || month < 1 || month > 12) return false;
                break;
            case 'd':
                if (!take_digits(text, pos, 2, day) || day < 1) return false;
                break;
            case 'H':
                if (!take_digits(text, pos, 2, value) || value > 23) return false;
                break;
            case 'M':
                if (!take_digits(text, pos, 2, value) || value > 59) return false;
                break;
            case 'S':
                if (!take_digits(text, pos, 2, value) || value > 60) return false;
                break;
            case 'f':
                if (pos < text.size() && text[pos] == '.') {
                    std::size_t digits = 0;
                    ++pos;
                    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                        ++pos;
                        ++digits;
                    }
                    if (digits == 0 || digits > 9) return false;
                }
                break;
            case 'z':
                if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
                    ++pos;
                } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
                    ++pos;
                    if (!take_digits(text, pos, 2, value) || value > 23) return false;
                    if (pos < text.size() && text[pos] == ':') ++pos;
                    if (!take_digits(text, pos, 2, value) || value > 59) return false;
                }
                break;
            case '%':
                if (pos >= text.size() || text[pos] != '%') return false;
                ++pos;
                break;
            default: return false;
        }
    }
    if (pos != text.size()) return false;
    if (year >= 0 && month > 0 && day > 0) {
        const std::chrono::year_month_day ymd{std::chrono::year{year},
                                              std::chrono::month{static_cast<unsigned>(month)},
                                              std::chrono::day{static_cast<unsigned>(day)}};
        if (!ymd.ok()) return false;
    }
    return true;
}

bool is_date(const Value& value, const DateRules& rules) {
    if (value.is_int()) {
        const auto v = value.as_int();
        if (v >= rules.epoch_min_seconds && v < rules.epoch_max_seconds) return true;
        const auto min_ms = rules.epoch_min_seconds * 1000;
        const auto max_ms = rules.epoch_max_seconds * 1000;
        return v >= min_ms && v < max_ms;
    }
    if (!value.is_str()) return false;
    const auto& s = value.as_str();
    if (s.size() < 6 || s.size() > 40) return false;
    return std::any_of(rules.formats.begin(), rules.formats.end(),
                       [&](const std::string& fmt) { return matches_date_format(s, fmt); });
}

bool is_date(const Value& value) {
    static const DateRules rules;
    return is_date(value, rules);
}

// ---------------------------------------------------------------------------
// Key search

namespace {

bool is_name_field(std::string_view name, const KeyInferenceConfig& config) {
    if (name.empty()) return false;
    const auto lowered = to_lower(name);
    return std::find(config.name_fields.begin(), config.name_fields.end(), lowered) != config.name_fields.end();
}

IdType classify(const Value& value, const HashMatcher& hashes) {
    if (!value.is_array()) return IdType::Simple;
    if (key_is_composite(value.as_array())) return IdType::Composite;
    if (key_is_multi_ref(value.as_array(), hashes)) return IdType::Many;
    return IdType::Simple;
}

KeyDescriptor make_key(const FieldPath& path, const Value& value, const std::optional<KeywordMatch>& km,
                       const KeyInferenceConfig& config) {
    KeyDescriptor d;
    d.path = path;
    d.role = KeyRole::Foreign;
    d.id_type = classify(value, config.hashes);
    if (km) {
        d.matched_keyword = km->keyword;
        d.priority = km->priority;
        d.exact_match = km->exact;
    }
    d.hash_match = is_hash(value, config.hashes);
    return d;
}

KeyDescriptor make_plain(const FieldPath& path, KeyRole role) {
    KeyDescriptor d;
    d.path = path;
    d.role = role;
    d.id_type = IdType::Simple;
    return d;
}

// Appends descriptors whose wildcard path is not yet present. Array elements
// share one descriptor per wildcard path.
void append_unique(std::vector<KeyDescriptor>& into, std::vector<KeyDescriptor>&& from,
                   std::set<std::string>& seen) {
    for (auto& d : from)
        if (seen.insert(d.path.wildcard_string()).second) into.push_back(std::move(d));
}

struct Accumulator {
    EmbeddedKeys keys;
    std::set<std::string> seen_foreign, seen_names, seen_dates;

    void merge(EmbeddedKeys&& other) {
        append_unique(keys.foreign, std::move(other.foreign), seen_foreign);
        append_unique(keys.names, std::move(other.names), seen_names);
        append_unique(keys.dates, std::move(other.dates), seen_dates);
    }
};

CollectionKeyProfile find_keys_at(const Object& document, const FieldPath& prefix, bool find_primary,
                                  const KeyInferenceConfig& config);

// Booleans never become keys, whatever the field is called.
bool key_like(const std::optional<KeywordMatch>& km, const Value& value, const KeyInferenceConfig& config) {
    if (value.is_bool()) return false;
    return km || is_hash(value, config.hashes);
}

void process_field(const FieldPath& path, std::string_view name, const Value& value,
                   const KeyInferenceConfig& config, Accumulator& acc) {
    const auto km = keyword_match(name, config.keywords);
    if (key_like(km, value, config)) {
        acc.merge(EmbeddedKeys{{make_key(path, value, km, config)}, {}, {}});
    } else if (is_name_field(name, config)) {
        acc.merge(EmbeddedKeys{{}, {make_plain(path, KeyRole::Name)}, {}});
    } else if (is_date(value, config.dates)) {
        acc.merge(EmbeddedKeys{{}, {}, {make_plain(path, KeyRole::Date)}});
    } else if (value.is_array()) {
        const auto& arr = value.as_array();
        if (key_is_composite(arr) || key_is_multi_ref(arr, config.hashes)) {
            acc.merge(EmbeddedKeys{{make_key(path, value, std::nullopt, config)}, {}, {}});
            return;
        }
        for (std::size_t i = 0; i < arr.size(); ++i) process_field(path.child(i), {}, arr[i], config, acc);
    } else if (value.is_object()) {
        auto nested = find_keys_at(value.as_object(), path, false, config);
        acc.merge(EmbeddedKeys{std::move(nested.foreign), std::move(nested.names), std::move(nested.dates)});
    }
}

struct Candidate {
    KeyDescriptor descriptor;
    std::size_t order;
};

// Keyword matches first (by priority, then exact before containment), then
// hash-only candidates; ties keep field order.
bool better_candidate(const KeyDescriptor& a, std::size_t order_a, const KeyDescriptor& b, std::size_t order_b) {
    const bool ka = a.priority.has_value();
    const bool kb = b.priority.has_value();
    if (ka != kb) return ka;
    if (ka) {
        if (*a.priority != *b.priority) return *a.priority < *b.priority;
        if (a.exact_match != b.exact_match) return a.exact_match;
    }
    return order_a < order_b;
}

CollectionKeyProfile find_keys_at(const Object& document, const FieldPath& prefix, bool find_primary,
                                  const KeyInferenceConfig& config) {
    CollectionKeyProfile profile;
    Accumulator acc;
    std::vector<Candidate> candidates;

    std::size_t order = 0;
    for (const auto& [name, value] : document) {
        const FieldPath path = prefix.child(name);
        if (find_primary) {
            const auto km = keyword_match(name, config.keywords);
            if (key_like(km, value, config)) {
                candidates.push_back(Candidate{make_key(path, value, km, config), order++});
                continue;
            }
        }
        process_field(path, name, value, config, acc);
        ++order;
    }

    if (find_primary && !candidates.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i)
            if (better_candidate(candidates[i].descriptor, candidates[i].order, candidates[best].descriptor,
                                 candidates[best].order))
                best = i;
        profile.primary = candidates[best].descriptor;
        profile.low_confidence_primary = !profile.primary->priority.has_value();
        std::vector<KeyDescriptor> demoted;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (i == best) continue;
            if (profile.low_confidence_primary && !candidates[i].descriptor.priority)
                profile.primary_alternates.push_back(candidates[i].descriptor.path);
            demoted.push_back(candidates[i].descriptor);
        }
        acc.merge(EmbeddedKeys{std::move(demoted), {}, {}});
    } else if (find_primary) {
        auto& foreign = acc.keys.foreign;
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < foreign.size(); ++i) {
            if (!foreign[i].priority) continue;
            if (!best || better_candidate(foreign[i], i, foreign[*best], *best)) best = i;
        }
        if (best) {
            profile.primary = foreign[*best];
            foreign.erase(foreign.begin() + static_cast<std::ptrdiff_t>(*best));
        }
    }

    if (profile.primary) profile.primary->role = KeyRole::Primary;
    profile.foreign = std::move(acc.keys.foreign);
    profile.names = std::move(acc.keys.names);
    profile.dates = std::move(acc.keys.dates);
    return profile;
}

}  // namespace

EmbeddedKeys process_embedded(const FieldPath& path, const Value& value, const KeyInferenceConfig& config) {
    Accumulator acc;
    process_field(path, path.leaf_name(), value, config, acc);
    return std::move(acc.keys);
}

CollectionKeyProfile find_keys(const Object& document, bool find_primary, const KeyInferenceConfig& config) {
    return find_keys_at(document, FieldPath{}, find_primary, config);
}

CollectionKeyProfile find_keys(const Document& document, bool find_primary, const KeyInferenceConfig& config) {
    return find_keys(document.root, find_primary, config);
}

}  // namespace colink
