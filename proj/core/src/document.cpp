#include "colink/document.hpp"

#include <algorithm>
#include <cctype>

#include "colink/error.hpp"

namespace colink {

Object::Object(std::initializer_list<Field> fields) {
    for (const auto& f : fields) insert_or_assign(f.first, f.second);
}

bool Object::insert_or_assign(std::string name, Value value) {
    for (auto& f : fields_) {
        if (f.first == name) {
            f.second = std::move(value);
            return true;
        }
    }
    fields_.emplace_back(std::move(name), std::move(value));
    return false;
}

const Value* Object::find(std::string_view name) const {
    for (const auto& f : fields_)
        if (f.first == name) return &f.second;
    return nullptr;
}

Value* Object::find(std::string_view name) {
    for (auto& f : fields_)
        if (f.first == name) return &f.second;
    return nullptr;
}

bool operator==(const Object& a, const Object& b) { return a.fields_ == b.fields_; }

std::string_view to_string(ValueType t) noexcept {
    switch (t) {
        case ValueType::Null: return "null";
        case ValueType::Bool: return "bool";
        case ValueType::Int: return "int";
        case ValueType::Float: return "float";
        case ValueType::Str: return "str";
        case ValueType::Array: return "array";
        case ValueType::Object: return "object";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// FieldPath

FieldPath FieldPath::child(std::string name) const {
    FieldPath p = *this;
    p.segments_.emplace_back(std::move(name));
    return p;
}

FieldPath FieldPath::child(std::size_t index) const {
    FieldPath p = *this;
    p.segments_.emplace_back(index);
    return p;
}

FieldPath FieldPath::prefixed(const FieldPath& prefix) const {
    FieldPath p = prefix;
    p.segments_.insert(p.segments_.end(), segments_.begin(), segments_.end());
    return p;
}

std::string_view FieldPath::leaf_name() const {
    for (auto it = segments_.rbegin(); it != segments_.rend(); ++it)
        if (const auto* s = std::get_if<std::string>(&*it)) return *s;
    return {};
}

namespace {

void append_escaped(std::string& out, const std::string& name) {
    for (char c : name) {
        if (c == '.' || c == '[' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
}

std::string path_string(const std::vector<PathSegment>& segments, bool wildcard) {
    std::string out;
    bool first = true;
    for (const auto& seg : segments) {
        if (const auto* name = std::get_if<std::string>(&seg)) {
            if (!first) out.push_back('.');
            append_escaped(out, *name);
        } else {
            out.push_back('[');
            out += wildcard ? std::string("*") : std::to_string(std::get<std::size_t>(seg));
            out.push_back(']');
        }
        first = false;
    }
    return out;
}

}  // namespace

std::string FieldPath::to_string() const { return path_string(segments_, false); }
std::string FieldPath::wildcard_string() const { return path_string(segments_, true); }

FieldPath FieldPath::parse(std::string_view text) {
    std::vector<PathSegment> segs;
    std::string cur;
    bool have_name = false;
    std::size_t i = 0;
    auto flush = [&] {
        if (have_name) segs.emplace_back(std::move(cur));
        cur.clear();
        have_name = false;
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\\') {
            if (i + 1 >= text.size()) throw ParseError("dangling escape in field path");
            cur.push_back(text[i + 1]);
            have_name = true;
            i += 2;
        } else if (c == '.') {
            flush();
            ++i;
        } else if (c == '[') {
            flush();
            auto close = text.find(']', i);
            if (close == std::string_view::npos) throw ParseError("unterminated index in field path");
            auto digits = text.substr(i + 1, close - i - 1);
            if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                               [](char d) { return std::isdigit(static_cast<unsigned char>(d)); }))
                throw ParseError("bad index in field path: " + std::string(text));
            segs.emplace_back(static_cast<std::size_t>(std::stoull(std::string(digits))));
            i = close + 1;
        } else {
            cur.push_back(c);
            have_name = true;
            ++i;
        }
    }
    flush();
    if (segs.empty()) throw ParseError("empty field path");
    return FieldPath(std::move(segs));
}

namespace {

const Value* step(const Value& v, const PathSegment& seg) {
    if (const auto* name = std::get_if<std::string>(&seg)) {
        if (!v.is_object()) return nullptr;
        return v.as_object().find(*name);
    }
    if (!v.is_array()) return nullptr;
    const auto& arr = v.as_array();
    auto idx = std::get<std::size_t>(seg);
    return idx < arr.size() ? &arr[idx] : nullptr;
}

void resolve_all_from(const Value& v, const std::vector<PathSegment>& segs, std::size_t pos,
                      std::vector<const Value*>& out) {
    if (pos == segs.size()) {
        out.push_back(&v);
        return;
    }
    const auto& seg = segs[pos];
    if (const auto* name = std::get_if<std::string>(&seg)) {
        if (!v.is_object()) return;
        if (const auto* next = v.as_object().find(*name)) resolve_all_from(*next, segs, pos + 1, out);
        return;
    }
    if (!v.is_array()) return;
    for (const auto& el : v.as_array()) resolve_all_from(el, segs, pos + 1, out);
}

}  // namespace

const Value* resolve(const Value& root, const FieldPath& path) {
    const Value* cur = &root;
    for (const auto& seg : path.segments()) {
        cur = step(*cur, seg);
        if (!cur) return nullptr;
    }
    return cur;
}

const Value* resolve(const Object& root, const FieldPath& path) {
    if (path.empty()) return nullptr;
    const auto* first = std::get_if<std::string>(&path.segments().front());
    if (!first) return nullptr;
    const Value* cur = root.find(*first);
    for (std::size_t i = 1; cur && i < path.size(); ++i) cur = step(*cur, path.segments()[i]);
    return cur;
}

void resolve_all(const Value& root, const FieldPath& path, std::vector<const Value*>& out) {
    resolve_all_from(root, path.segments(), 0, out);
}

void resolve_all(const Object& root, const FieldPath& path, std::vector<const Value*>& out) {
    if (path.empty()) return;
    const auto* first = std::get_if<std::string>(&path.segments().front());
    if (!first) return;
    if (const Value* v = root.find(*first)) resolve_all_from(*v, path.segments(), 1, out);
}

// ---------------------------------------------------------------------------
// HashMatcher

namespace {

bool default_hash_shape(std::string_view s) {
    const auto n = s.size();
    if (n != 24 && n != 32 && n != 40 && n != 64) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

HashMatcher::HashMatcher() : HashMatcher(std::string(kDefaultPattern)) {}

HashMatcher::HashMatcher(std::string pattern)
    : pattern_(std::move(pattern)), is_default_(pattern_ == kDefaultPattern) {
    try {
        re_ = std::regex(pattern_, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
        throw ValidationError("hash_pattern", std::string("invalid regex: ") + e.what());
    }
}

bool HashMatcher::matches(std::string_view s) const {
    if (is_default_) return default_hash_shape(s);
    return std::regex_match(s.begin(), s.end(), re_);
}

bool is_composite_shape(const Array& array) noexcept {
    if (array.size() != 2) return false;
    bool has_string = false;
    for (const auto& el : array) {
        if (el.is_container()) return false;
        if (el.is_str()) has_string = true;
    }
    return array[0].is_int() && has_string;
}

// ---------------------------------------------------------------------------
// KeyValue

Value KeyValue::to_value() const {
    return std::visit(
        [](const auto& v) -> Value {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CompositeKey>) {
                return Value(Array{Value(v.number), Value(v.text)});
            } else {
                return Value(v);
            }
        },
        v_);
}

std::string KeyValue::to_string() const {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CompositeKey>) {
                return "[" + std::to_string(v.number) + "," + v.text + "]";
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else {
                return std::to_string(v);
            }
        },
        v_);
}

std::string_view to_string(KeyValue::Kind k) noexcept {
    switch (k) {
        case KeyValue::Kind::Int: return "int";
        case KeyValue::Kind::Str: return "str";
        case KeyValue::Kind::Bool: return "bool";
        case KeyValue::Kind::Composite: return "composite";
    }
    return "?";
}

std::size_t KeyValueHash::operator()(const KeyValue& k) const noexcept {
    const auto& s = k.storage();
    std::size_t h = std::hash<std::size_t>{}(s.index() * 0x9e3779b97f4a7c15ULL);
    auto mix = [&h](std::size_t x) { h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    switch (k.kind()) {
        case KeyValue::Kind::Int: mix(std::hash<std::int64_t>{}(std::get<std::int64_t>(s))); break;
        case KeyValue::Kind::Str: mix(std::hash<std::string>{}(std::get<std::string>(s))); break;
        case KeyValue::Kind::Bool: mix(std::get<bool>(s) ? 1 : 2); break;
        case KeyValue::Kind::Composite: {
            const auto& c = std::get<CompositeKey>(s);
            mix(std::hash<std::int64_t>{}(c.number));
            mix(std::hash<std::string>{}(c.text));
            break;
        }
    }
    return h;
}

namespace {

std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::optional<KeyValue> canonical_string(std::string_view raw, const HashMatcher& hashes) {
    auto t = trim(raw);
    if (t.empty()) return std::nullopt;
    std::string s(t);
    if (hashes.matches(s))
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return KeyValue(std::move(s));
}

}  // namespace

std::optional<KeyValue> canonicalize_key_value(const Value& value, const HashMatcher& hashes) {
    switch (value.type()) {
        case ValueType::Int: return KeyValue(value.as_int());
        case ValueType::Bool: return KeyValue(value.as_bool());
        case ValueType::Str: return canonical_string(value.as_str(), hashes);
        case ValueType::Array: {
            const auto& arr = value.as_array();
            if (!is_composite_shape(arr)) return std::nullopt;
            // The text part is element[1] when it is a string, else the first
            // string found; the numeric part is always element[0].
            const Value& text = arr[1].is_str() ? arr[1] : arr[0];
            auto t = trim(text.as_str());
            return KeyValue(CompositeKey{arr[0].as_int(), std::string(t)});
        }
        default: return std::nullopt;
    }
}

std::optional<KeyValue> canonicalize_key_value(const Value& value) {
    static const HashMatcher default_matcher;
    return canonicalize_key_value(value, default_matcher);
}

// ---------------------------------------------------------------------------

std::size_t nesting_depth(const Value& value) {
    if (value.is_array()) {
        std::size_t deepest = 0;
        for (const auto& el : value.as_array()) deepest = std::max(deepest, nesting_depth(el));
        return 1 + deepest;
    }
    if (value.is_object()) return nesting_depth(value.as_object());
    return 0;
}

std::size_t nesting_depth(const Object& object) {
    std::size_t deepest = 0;
    for (const auto& [name, v] : object) deepest = std::max(deepest, nesting_depth(v));
    return 1 + deepest;
}

const Document* schema_document(const Collection& collection) {
    for (const auto& doc : collection.documents)
        if (!doc.root.empty()) return &doc;
    return nullptr;
}

}  // namespace colink
