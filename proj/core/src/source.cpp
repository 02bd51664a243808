#include "colink/source.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <yaml-cpp/yaml.h>

#include "colink/error.hpp"

namespace fs = std::filesystem;

namespace colink {

namespace {

constexpr const char* kManifest = "manifest.yaml";

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<CollectionRef> read_manifest(const fs::path& root, const SourceConfig& cfg) {
    YAML::Node doc;
    try {
        doc = YAML::LoadFile((root / kManifest).string());
    } catch (const YAML::Exception& e) {
        throw SourceUnavailable("cannot read manifest in " + root.string() + ": " + e.what());
    }
    const auto list = doc["collections"];
    if (!list || !list.IsSequence())
        throw SourceUnavailable("manifest in " + root.string() + " has no collections list");
    std::vector<CollectionRef> out;
    for (const auto& entry : list) {
        if (!entry.IsMap() || !entry["file"])
            throw SourceUnavailable("manifest entry without file in " + root.string());
        const auto file = entry["file"].as<std::string>();
        const fs::path rel(file);
        CollectionRef ref;
        ref.location = (root / rel).string();
        ref.name = entry["name"] ? entry["name"].as<std::string>() : rel.stem().string();
        if (entry["subsystem"])
            ref.subsystem = entry["subsystem"].as<std::string>();
        else if (!cfg.subsystem.empty())
            ref.subsystem = cfg.subsystem;
        else
            ref.subsystem = rel.has_parent_path() ? rel.parent_path().filename().string() : "default";
        ref.id = ref.subsystem + "/" + ref.name;
        out.push_back(std::move(ref));
    }
    return out;
}

}  // namespace

DirectorySource::DirectorySource(SourceConfig config) : config_(std::move(config)) {}

std::vector<CollectionRef> DirectorySource::collections() {
    const fs::path root(config_.location);
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw SourceUnavailable("corpus directory not found: " + root.string());

    std::vector<CollectionRef> out;
    if (fs::exists(root / kManifest)) {
        out = read_manifest(root, config_);
    } else {
        auto add = [&](const fs::path& file, const std::string& subsystem) {
            CollectionRef ref;
            ref.name = file.stem().string();
            ref.subsystem = config_.subsystem.empty() ? subsystem : config_.subsystem;
            ref.id = ref.subsystem + "/" + ref.name;
            ref.location = file.string();
            out.push_back(std::move(ref));
        };
        for (const auto& entry : fs::directory_iterator(root)) {
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
                add(entry.path(), "default");
            } else if (entry.is_directory()) {
                for (const auto& inner : fs::directory_iterator(entry.path()))
                    if (inner.is_regular_file() && inner.path().extension() == ".jsonl")
                        add(inner.path(), entry.path().filename().string());
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].id == out[i - 1].id) throw DuplicateCollection("collection id appears twice: " + out[i].id);
    return out;
}

void DirectorySource::stream(const CollectionRef& collection,
                             const std::function<void(std::string_view, std::size_t)>& fn) {
    std::ifstream in(collection.location, std::ios::binary);
    if (!in) throw SourceUnavailable("cannot open collection file " + collection.location);
    std::string line;
    std::size_t ordinal = 0;
    while (std::getline(in, line)) {
        if (is_blank(line)) continue;
        fn(line, ordinal++);
    }
}

std::string DirectorySource::describe() const { return "directory:" + config_.location; }

MongoSource::MongoSource(SourceConfig config) : config_(std::move(config)) {}

std::vector<CollectionRef> MongoSource::collections() {
    throw SourceUnavailable("document store adapter is not available in this build: " + config_.location);
}

void MongoSource::stream(const CollectionRef& collection, const std::function<void(std::string_view, std::size_t)>&) {
    throw SourceUnavailable("document store adapter is not available in this build: " + collection.id);
}

std::string MongoSource::describe() const { return "mongodb:" + config_.location; }

std::unique_ptr<SourceAdapter> make_source(const SourceConfig& config) {
    if (config.kind == "directory") return std::make_unique<DirectorySource>(config);
    if (config.kind == "mongodb") return std::make_unique<MongoSource>(config);
    throw ValidationError("sources.kind", "unknown source kind '" + config.kind + "'");
}

}  // namespace colink
