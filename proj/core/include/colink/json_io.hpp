#pragma once

#include <string>
#include <string_view>

#include "colink/document.hpp"

namespace colink {

struct ParsedValue {
    Value value;
    std::size_t duplicate_fields = 0;
};

// Parses exactly one JSON value. Integers that fit in int64 become Int, every
// other number becomes Float. Duplicate object keys: the last one wins.
// Throws SyntaxError.
ParsedValue parse_value(std::string_view text);

// Throws SyntaxError, or NotAnObject when the top-level value is not an object.
Document parse_document(std::string_view text, std::size_t ordinal = 0);

// Compact single-line JSON. Floats are written in shortest round-trip form and
// always carry a fraction or exponent so they re-parse as Float.
std::string serialize(const Value& value);
std::string serialize(const Document& document);

}  // namespace colink
