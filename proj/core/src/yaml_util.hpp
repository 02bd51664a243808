#pragma once

// YAML reading helpers shared by the config and corpus-spec loaders. Every
// failure names the offending key path.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "colink/error.hpp"

namespace colink::yaml_util {

inline std::string join_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

inline void check_map(const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) throw ValidationError(path, "expected a mapping");
}

inline void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<std::string_view> allowed) {
    check_map(node, path);
    for (const auto& entry : node) {
        const auto key = entry.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValidationError(join_path(path, key), "unknown configuration key");
    }
}

template <typename T>
T read_scalar(const YAML::Node& node, const std::string& path, std::string_view expected) {
    if (!node.IsScalar()) throw ValidationError(path, "expected " + std::string(expected));
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ValidationError(path, "expected " + std::string(expected));
    }
}

inline std::size_t read_count(const YAML::Node& node, const std::string& path) {
    const auto v = read_scalar<long long>(node, path, "a non-negative integer");
    if (v < 0) throw ValidationError(path, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline double read_real(const YAML::Node& node, const std::string& path) {
    if (node.IsScalar()) {
        const auto text = node.Scalar();
        if (text == "-inf" || text == "-infinity") return -std::numeric_limits<double>::infinity();
        if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    }
    const auto v = read_scalar<double>(node, path, "a number");
    if (std::isnan(v)) throw ValidationError(path, "expected a number");
    return v;
}

inline std::vector<std::string> read_strings(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence()) throw ValidationError(path, "expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(read_scalar<std::string>(node[i], path + "[" + std::to_string(i) + "]", "a string"));
    return out;
}

inline nlohmann::ordered_json real_json(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    return v;
}

inline void emit(YAML::Emitter& out, const nlohmann::ordered_json& j) {
    switch (j.type()) {
        case nlohmann::ordered_json::value_t::object:
            out << YAML::BeginMap;
            for (const auto& [k, v] : j.items()) {
                out << YAML::Key << k << YAML::Value;
                emit(out, v);
            }
            out << YAML::EndMap;
            break;
        case nlohmann::ordered_json::value_t::array:
            if (j.empty()) out << YAML::Flow;
            out << YAML::BeginSeq;
            for (const auto& v : j) emit(out, v);
            out << YAML::EndSeq;
            break;
        case nlohmann::ordered_json::value_t::string: {
            const auto& s = j.get_ref<const std::string&>();
            if (s.empty())
                out << YAML::DoubleQuoted << s;
            else
                out << s;
            break;
        }
        case nlohmann::ordered_json::value_t::boolean: out << j.get<bool>(); break;
        case nlohmann::ordered_json::value_t::number_integer: out << j.get<std::int64_t>(); break;
        case nlohmann::ordered_json::value_t::number_unsigned: out << j.get<std::uint64_t>(); break;
        case nlohmann::ordered_json::value_t::number_float: {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, j.get<double>());
            std::string text(buf, res.ptr);
            if (text.find_first_of(".e") == std::string::npos) text += ".0";
            out << text;
            break;
        }
        default: out << YAML::Null; break;
    }
}

}  // namespace colink::yaml_util
