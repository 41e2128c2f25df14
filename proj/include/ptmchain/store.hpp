#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptmchain/types.hpp"

struct sqlite3;

namespace ptmchain::store {

struct UnmatchedName {
    std::int64_t id = 0;
    Registry registry = Registry::HuggingFace;
    std::string name;
    std::int64_t occurrences = 0;
};

struct ExtractedMetadata {
    std::int64_t id = 0;
    std::int64_t ptm_id = 0;
    std::string payload_json;  // JSON object keyed by metadata field name
    std::string mode;          // "cheap", "accurate" or "cheap-fallback"
    std::string extracted_at;  // ISO-8601 UTC
};

struct RepoScanStats {
    std::int64_t repo_id = 0;
    int files_seen = 0;
    int files_prefiltered = 0;
    int files_analyzed = 0;
    int files_skipped = 0;
    int usage_records = 0;
    std::string scanned_at;
};

/// SQLite-backed persistence. Natural keys carry identity: (registry, name)
/// for packages, (host, full_name) for repositories, (repo_id, file, line,
/// signature_id) for usage records. Numeric ids are local to one database.
class Store {
public:
    static Store open(const std::filesystem::path& path);
    static Store open_memory();

    Store(Store&&) noexcept;
    Store& operator=(Store&&) noexcept;
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;
    ~Store();

    // Packages. Upsert keeps the existing id and replaces the other fields.
    std::int64_t put_ptm(const PtmPackage& p);
    std::optional<PtmPackage> get_ptm(Registry registry, const std::string& name) const;
    std::optional<PtmPackage> ptm_by_id(std::int64_t id) const;
    std::vector<PtmPackage> all_ptms() const;  // ordered by id
    std::vector<PtmPackage> ptms_with_min_downloads(std::int64_t min) const;

    // Repositories.
    std::int64_t put_repo(const Repository& r);
    std::optional<Repository> get_repo(const std::string& host,
                                       const std::string& full_name) const;
    std::optional<Repository> repo_by_id(std::int64_t id) const;
    std::vector<Repository> all_repos() const;

    // Usage records: insert-if-absent on the natural key.
    // Returns how many rows were newly inserted.
    int add_usage_records(const std::vector<UsageRecord>& records);
    std::vector<UsageRecord> usage_for_repo(std::int64_t repo_id) const;
    std::vector<UsageRecord> all_usage() const;

    // Derived tables are replaced wholesale so a rerun converges.
    void replace_links(const std::vector<PtmAppLink>& links);
    std::vector<PtmAppLink> all_links() const;
    void replace_ptm_ptm_links(const std::vector<PtmPtmLink>& links);
    std::vector<PtmPtmLink> all_ptm_ptm_links() const;
    void replace_unmatched(const std::vector<UnmatchedName>& names);
    std::vector<UnmatchedName> all_unmatched() const;

    // Merge-style variants used by bulk ingest: existing rows keep their ids,
    // evidence sets union, occurrence counts take the incoming value.
    void add_link(const PtmAppLink& link);
    void add_ptm_ptm_link(const PtmPtmLink& link);
    void add_unmatched(const UnmatchedName& name);

    // Metadata: one row per package. The write is skipped when payload and
    // mode match the stored row, so the timestamp only moves on real change.
    bool put_metadata(std::int64_t ptm_id, const std::string& payload_json,
                      const std::string& mode, const std::string& extracted_at);
    std::optional<ExtractedMetadata> metadata_for(std::int64_t ptm_id) const;
    std::vector<ExtractedMetadata> all_metadata() const;

    void record_repo_scan(const RepoScanStats& stats);
    std::vector<RepoScanStats> repo_scans() const;

    std::int64_t count(const std::string& table) const;

    void begin();
    void commit();
    void rollback();

    struct Impl;  // definition local to store.cpp

private:
    Store() = default;
    std::unique_ptr<Impl> impl_;
};

/// Writes one JSONL file per table into `dir` (created if needed), rows
/// ordered by id, keys in a fixed order. Exporting, ingesting into a fresh
/// database and exporting again reproduces the same bytes.
void export_jsonl(const Store& store, const std::filesystem::path& dir);

/// Same tables as RFC-4180 CSV with a header row. List- and object-valued
/// columns hold compact JSON.
void export_csv(const Store& store, const std::filesystem::path& dir);

struct IngestStats {
    int ptms = 0;
    int repos = 0;
    int usage_records = 0;
    int links = 0;
    int ptm_ptm_links = 0;
    int unmatched = 0;
    int metadata = 0;
    std::vector<std::string> warnings;  // skipped rows with reasons
};

/// Loads an export directory. Incoming numeric ids are dropped; rows join
/// through their natural keys, and cross-references are remapped. Unknown
/// fields on package rows merge into the extra blob. Malformed lines are
/// skipped and reported in `warnings`.
IngestStats ingest_jsonl(Store& store, const std::filesystem::path& dir);

}  // namespace ptmchain::store
