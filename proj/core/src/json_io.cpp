#include "colink/json_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "colink/error.hpp"

namespace colink {

namespace {

// Builds a Value directly from SAX events so object field order and
// duplicate keys are under our control.
class ValueBuilder final : public nlohmann::json_sax<nlohmann::json> {
public:
    bool null() override { return put(Value()); }
    bool boolean(bool b) override { return put(Value(b)); }
    bool number_integer(number_integer_t i) override { return put(Value(static_cast<std::int64_t>(i))); }
    bool number_unsigned(number_unsigned_t u) override {
        if (u <= static_cast<number_unsigned_t>(std::numeric_limits<std::int64_t>::max()))
            return put(Value(static_cast<std::int64_t>(u)));
        return put(Value(static_cast<double>(u)));
    }
    bool number_float(number_float_t f, const string_t&) override { return put(Value(static_cast<double>(f))); }
    bool string(string_t& s) override { return put(Value(std::move(s))); }
    bool binary(binary_t&) override { return put(Value()); }

    bool start_object(std::size_t) override {
        stack_.push_back(Frame{Value(Object{}), {}});
        return true;
    }
    bool key(string_t& k) override {
        stack_.back().pending_key = std::move(k);
        return true;
    }
    bool end_object() override { return pop(); }
    bool start_array(std::size_t) override {
        stack_.push_back(Frame{Value(Array{}), {}});
        return true;
    }
    bool end_array() override { return pop(); }

    bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) override {
        error_position_ = position;
        error_message_ = ex.what();
        return false;
    }

    ParsedValue take() { return ParsedValue{std::move(result_), duplicates_}; }
    std::size_t error_position() const { return error_position_; }
    const std::string& error_message() const { return error_message_; }

private:
    struct Frame {
        Value value;
        std::string pending_key;
    };

    bool put(Value v) {
        if (stack_.empty()) {
            result_ = std::move(v);
            return true;
        }
        auto& top = stack_.back();
        if (top.value.is_array()) {
            top.value.as_array().push_back(std::move(v));
        } else {
            if (top.value.as_object().insert_or_assign(std::move(top.pending_key), std::move(v))) ++duplicates_;
            top.pending_key.clear();
        }
        return true;
    }

    bool pop() {
        Value done = std::move(stack_.back().value);
        stack_.pop_back();
        return put(std::move(done));
    }

    std::vector<Frame> stack_;
    Value result_;
    std::size_t duplicates_ = 0;
    std::size_t error_position_ = 0;
    std::string error_message_;
};

void write_string(std::string& out, const std::string& s) {
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (c < 0x20) {
                    static const char* hex = "0123456789abcdef";
                    out += "\\u00";
                    out.push_back(hex[c >> 4]);
                    out.push_back(hex[c & 0xf]);
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    out.push_back('"');
}

void write_float(std::string& out, double d) {
    if (!std::isfinite(d)) {
        out += "null";
        return;
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string_view text(buf, static_cast<std::size_t>(end - buf));
    out += text;
    if (text.find_first_of(".eEn") == std::string_view::npos) out += ".0";
}

void write_value(std::string& out, const Value& v);

void write_object(std::string& out, const Object& o) {
    out.push_back('{');
    bool first = true;
    for (const auto& [name, field] : o) {
        if (!first) out.push_back(',');
        write_string(out, name);
        out.push_back(':');
        write_value(out, field);
        first = false;
    }
    out.push_back('}');
}

void write_value(std::string& out, const Value& v) {
    switch (v.type()) {
        case ValueType::Null: out += "null"; break;
        case ValueType::Bool: out += v.as_bool() ? "true" : "false"; break;
        case ValueType::Int: out += std::to_string(v.as_int()); break;
        case ValueType::Float: write_float(out, v.as_float()); break;
        case ValueType::Str: write_string(out, v.as_str()); break;
        case ValueType::Array: {
            out.push_back('[');
            bool first = true;
            for (const auto& el : v.as_array()) {
                if (!first) out.push_back(',');
                write_value(out, el);
                first = false;
            }
            out.push_back(']');
            break;
        }
        case ValueType::Object: write_object(out, v.as_object()); break;
    }
}

}  // namespace

ParsedValue parse_value(std::string_view text) {
    ValueBuilder builder;
    const bool ok = nlohmann::json::sax_parse(text.begin(), text.end(), &builder,
                                              nlohmann::json::input_format_t::json, true);
    if (!ok) throw SyntaxError("malformed JSON: " + builder.error_message(), builder.error_position());
    return builder.take();
}

Document parse_document(std::string_view text, std::size_t ordinal) {
    auto parsed = parse_value(text);
    if (!parsed.value.is_object())
        throw NotAnObject(std::string("top-level JSON value is ") + std::string(to_string(parsed.value.type())) +
                          ", expected object");
    Document doc;
    doc.root = std::move(parsed.value.as_object());
    doc.ordinal = ordinal;
    doc.duplicate_fields = parsed.duplicate_fields;
    return doc;
}

std::string serialize(const Value& value) {
    std::string out;
    write_value(out, value);
    return out;
}

std::string serialize(const Document& document) {
    std::string out;
    write_object(out, document.root);
    return out;
}

}  // namespace colink
