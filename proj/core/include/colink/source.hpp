#pragma once

// Data source adapters: enumerate collections and stream their raw
// document records in a stable order.

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "colink/config.hpp"

namespace colink {

struct CollectionRef {
    std::string id;  // "<subsystem>/<name>"
    std::string name;
    std::string subsystem;
    std::string location;  // adapter-specific handle (file path for directories)
    friend bool operator==(const CollectionRef&, const CollectionRef&) = default;
};

class SourceAdapter {
public:
    virtual ~SourceAdapter() = default;
    // Sorted by id. Throws SourceUnavailable.
    virtual std::vector<CollectionRef> collections() = 0;
    // Calls `fn` once per non-blank record (one JSON text) with its 0-based
    // record number. Throws SourceUnavailable.
    virtual void stream(const CollectionRef& collection,
                        const std::function<void(std::string_view record, std::size_t ordinal)>& fn) = 0;
    virtual std::string describe() const = 0;
};

// Canonical corpus layout: <root>/<subsystem>/<collection>.jsonl, plus
// top-level .jsonl files labelled with the source subsystem (or "default").
// An optional <root>/manifest.yaml lists
//   collections: [{file, name, subsystem}]
// and replaces directory discovery.
class DirectorySource : public SourceAdapter {
public:
    explicit DirectorySource(SourceConfig config);
    std::vector<CollectionRef> collections() override;
    void stream(const CollectionRef& collection,
                const std::function<void(std::string_view, std::size_t)>& fn) override;
    std::string describe() const override;

private:
    SourceConfig config_;
};

// Placeholder for a live document store; every call reports the source as
// unavailable.
class MongoSource : public SourceAdapter {
public:
    explicit MongoSource(SourceConfig config);
    std::vector<CollectionRef> collections() override;
    void stream(const CollectionRef& collection,
                const std::function<void(std::string_view, std::size_t)>& fn) override;
    std::string describe() const override;

private:
    SourceConfig config_;
};

// Throws ValidationError for an unknown kind.
std::unique_ptr<SourceAdapter> make_source(const SourceConfig& config);

}  // namespace colink
