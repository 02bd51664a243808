#pragma once

// Recursive document value model shared by every stage: JSON-like values,
// documents, collections, field paths and canonical key values.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace colink {

class Value;

using Array = std::vector<Value>;

// Insertion-ordered map of field name to value. Field order is part of the
// value: key inference walks fields in this order.
class Object {
public:
    using Field = std::pair<std::string, Value>;
    using const_iterator = std::vector<Field>::const_iterator;

    Object() = default;
    Object(std::initializer_list<Field> fields);

    // Returns true if the name was already present (the old value is replaced
    // in place, keeping the original position).
    bool insert_or_assign(std::string name, Value value);

    const Value* find(std::string_view name) const;
    Value* find(std::string_view name);

    std::size_t size() const noexcept { return fields_.size(); }
    bool empty() const noexcept { return fields_.empty(); }
    const_iterator begin() const noexcept { return fields_.begin(); }
    const_iterator end() const noexcept { return fields_.end(); }
    const Field& operator[](std::size_t i) const { return fields_[i]; }

    friend bool operator==(const Object& a, const Object& b);

private:
    std::vector<Field> fields_;
};

struct Null {
    friend bool operator==(Null, Null) = default;
};

enum class ValueType : std::uint8_t { Null, Bool, Int, Float, Str, Array, Object };

std::string_view to_string(ValueType t) noexcept;

class Value {
public:
    using Storage = std::variant<Null, bool, std::int64_t, double, std::string, Array, Object>;

    Value() = default;
    Value(Null) {}
    Value(std::nullptr_t) {}
    Value(bool b) : v_(b) {}
    Value(int i) : v_(static_cast<std::int64_t>(i)) {}
    Value(std::int64_t i) : v_(i) {}
    Value(double d) : v_(d) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(Array a) : v_(std::move(a)) {}
    Value(Object o) : v_(std::move(o)) {}

    ValueType type() const noexcept { return static_cast<ValueType>(v_.index()); }

    bool is_null() const noexcept { return type() == ValueType::Null; }
    bool is_bool() const noexcept { return type() == ValueType::Bool; }
    bool is_int() const noexcept { return type() == ValueType::Int; }
    bool is_float() const noexcept { return type() == ValueType::Float; }
    bool is_str() const noexcept { return type() == ValueType::Str; }
    bool is_array() const noexcept { return type() == ValueType::Array; }
    bool is_object() const noexcept { return type() == ValueType::Object; }
    bool is_container() const noexcept { return is_array() || is_object(); }

    bool as_bool() const { return std::get<bool>(v_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    double as_float() const { return std::get<double>(v_); }
    const std::string& as_str() const { return std::get<std::string>(v_); }
    const Array& as_array() const { return std::get<Array>(v_); }
    Array& as_array() { return std::get<Array>(v_); }
    const Object& as_object() const { return std::get<Object>(v_); }
    Object& as_object() { return std::get<Object>(v_); }

    const Storage& storage() const noexcept { return v_; }

    friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }

private:
    Storage v_;
};

struct Document {
    Object root;
    std::size_t ordinal = 0;
    // Number of duplicate field names collapsed while parsing (last one wins).
    std::size_t duplicate_fields = 0;

    friend bool operator==(const Document& a, const Document& b) { return a.root == b.root; }
};

struct Collection {
    std::string id;
    std::string name;
    std::string subsystem;
    std::vector<Document> documents;
};

// ---------------------------------------------------------------------------
// Field paths

// A segment is either a field name or an array index.
using PathSegment = std::variant<std::string, std::size_t>;

class FieldPath {
public:
    FieldPath() = default;
    explicit FieldPath(std::vector<PathSegment> segments) : segments_(std::move(segments)) {}

    // Parses the textual form produced by to_string(): `a.b[0].c`. Field names
    // containing '.', '[' or '\' are escaped with a backslash.
    static FieldPath parse(std::string_view text);

    FieldPath child(std::string name) const;
    FieldPath child(std::size_t index) const;
    FieldPath prefixed(const FieldPath& prefix) const;

    const std::vector<PathSegment>& segments() const noexcept { return segments_; }
    bool empty() const noexcept { return segments_.empty(); }
    std::size_t size() const noexcept { return segments_.size(); }

    // Last field-name segment, or empty when the path ends in indices only.
    std::string_view leaf_name() const;

    // The same path with every array index replaced by a wildcard; two paths
    // that differ only in indices share a wildcard form.
    std::string wildcard_string() const;
    std::string to_string() const;

    friend bool operator==(const FieldPath&, const FieldPath&) = default;
    friend auto operator<=>(const FieldPath& a, const FieldPath& b) {
        return a.to_string() <=> b.to_string();
    }

private:
    std::vector<PathSegment> segments_;
};

// Exact resolution: indices must exist. Returns nullptr when any segment is
// missing.
const Value* resolve(const Value& root, const FieldPath& path);
const Value* resolve(const Object& root, const FieldPath& path);

// Resolution treating every index segment as "all elements"; appends every
// reachable value to `out`.
void resolve_all(const Value& root, const FieldPath& path, std::vector<const Value*>& out);
void resolve_all(const Object& root, const FieldPath& path, std::vector<const Value*>& out);

// ---------------------------------------------------------------------------
// Shape predicates shared by canonicalization and key inference

// Decides whether a string looks like a hash identifier. The default pattern
// accepts hexadecimal strings of length 24, 32, 40 or 64 (either case).
class HashMatcher {
public:
    static constexpr std::string_view kDefaultPattern =
        "[0-9a-fA-F]{24}|[0-9a-fA-F]{32}|[0-9a-fA-F]{40}|[0-9a-fA-F]{64}";

    HashMatcher();
    explicit HashMatcher(std::string pattern);

    bool matches(std::string_view s) const;
    bool matches(const std::string& s) const { return matches(std::string_view(s)); }
    bool matches(const char* s) const { return matches(std::string_view(s)); }
    bool matches(const Value& v) const { return v.is_str() && matches(v.as_str()); }
    const std::string& pattern() const noexcept { return pattern_; }

private:
    std::string pattern_;
    bool is_default_;
    std::regex re_;
};

// Two-element [integer, ..., at least one string] array of scalars.
bool is_composite_shape(const Array& array) noexcept;

// ---------------------------------------------------------------------------
// Key values

struct CompositeKey {
    std::int64_t number;
    std::string text;
    friend auto operator<=>(const CompositeKey&, const CompositeKey&) = default;
};

// Canonical identifier value. No cross-type coercion: Int 815 and Str "815"
// are different keys.
class KeyValue {
public:
    using Storage = std::variant<std::int64_t, std::string, bool, CompositeKey>;
    enum class Kind : std::uint8_t { Int, Str, Bool, Composite };

    KeyValue(std::int64_t i) : v_(i) {}
    KeyValue(std::string s) : v_(std::move(s)) {}
    KeyValue(bool b) : v_(b) {}
    KeyValue(CompositeKey c) : v_(std::move(c)) {}

    Kind kind() const noexcept { return static_cast<Kind>(v_.index()); }
    const Storage& storage() const noexcept { return v_; }

    // Reconstructs the document value this key was canonicalized from.
    Value to_value() const;
    std::string to_string() const;

    friend auto operator<=>(const KeyValue&, const KeyValue&) = default;
    friend bool operator==(const KeyValue&, const KeyValue&) = default;

private:
    Storage v_;
};

std::string_view to_string(KeyValue::Kind k) noexcept;

struct KeyValueHash {
    std::size_t operator()(const KeyValue& k) const noexcept;
};

std::optional<KeyValue> canonicalize_key_value(const Value& value, const HashMatcher& hashes);
std::optional<KeyValue> canonicalize_key_value(const Value& value);

// ---------------------------------------------------------------------------

// 0 for scalars; 1 + deepest child for containers (empty containers are 1).
std::size_t nesting_depth(const Value& value);
std::size_t nesting_depth(const Object& object);

// First document whose root has at least one field.
const Document* schema_document(const Collection& collection);

}  // namespace colink
