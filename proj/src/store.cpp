#include "ptmchain/store.hpp"

#include <sqlite3.h>

#include <json.hpp>

namespace ptmchain::store {

namespace {

using nlohmann::json;

std::string tags_to_json(const std::vector<std::string>& tags) {
    json arr = json::array();
    for (const auto& t : tags) arr.push_back(t);
    return arr.dump();
}

std::vector<std::string> tags_from_json(const std::string& text) {
    std::vector<std::string> out;
    json arr = json::parse(text, nullptr, false);
    if (!arr.is_array()) return out;
    for (const auto& t : arr) {
        if (t.is_string()) out.push_back(t.get<std::string>());
    }
    return out;
}

}  // namespace

struct Store::Impl {
    sqlite3* db = nullptr;

    ~Impl() {
        if (db) sqlite3_close(db);
    }

    void check(int rc, const char* what) const {
        if (rc != SQLITE_OK && rc != SQLITE_DONE && rc != SQLITE_ROW) {
            throw Error(std::string(what) + ": " + sqlite3_errmsg(db));
        }
    }

    void exec(const char* sql) const {
        char* err = nullptr;
        int rc = sqlite3_exec(db, sql, nullptr, nullptr, &err);
        if (rc != SQLITE_OK) {
            std::string msg = err ? err : "unknown sqlite error";
            sqlite3_free(err);
            throw Error("sqlite exec failed: " + msg);
        }
    }
};

namespace {

/// Prepared statement with scoped finalization.
class Stmt {
public:
    Stmt(const Store::Impl& impl, const char* sql) : impl_(impl) {
        impl_.check(sqlite3_prepare_v2(impl_.db, sql, -1, &stmt_, nullptr), sql);
    }
    ~Stmt() {
        if (stmt_) sqlite3_finalize(stmt_);
    }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    Stmt& bind(int idx, std::int64_t v) {
        impl_.check(sqlite3_bind_int64(stmt_, idx, v), "bind int");
        return *this;
    }
    Stmt& bind(int idx, const std::string& v) {
        impl_.check(sqlite3_bind_text(stmt_, idx, v.c_str(), static_cast<int>(v.size()),
                                      SQLITE_TRANSIENT),
                    "bind text");
        return *this;
    }
    Stmt& bind(int idx, const std::optional<std::string>& v) {
        if (v) return bind(idx, *v);
        impl_.check(sqlite3_bind_null(stmt_, idx), "bind null");
        return *this;
    }
    Stmt& bind_opt_int(int idx, const std::optional<std::int64_t>& v) {
        if (v) return bind(idx, *v);
        impl_.check(sqlite3_bind_null(stmt_, idx), "bind null");
        return *this;
    }

    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        impl_.check(rc, "step");
        return false;
    }

    std::int64_t col_int(int idx) const { return sqlite3_column_int64(stmt_, idx); }
    std::string col_text(int idx) const {
        const unsigned char* p = sqlite3_column_text(stmt_, idx);
        return p ? reinterpret_cast<const char*>(p) : "";
    }
    std::optional<std::string> col_opt_text(int idx) const {
        if (sqlite3_column_type(stmt_, idx) == SQLITE_NULL) return std::nullopt;
        return col_text(idx);
    }
    std::optional<std::int64_t> col_opt_int(int idx) const {
        if (sqlite3_column_type(stmt_, idx) == SQLITE_NULL) return std::nullopt;
        return col_int(idx);
    }

private:
    const Store::Impl& impl_;
    sqlite3_stmt* stmt_ = nullptr;
};

constexpr int kSchemaVersion = 1;

const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta (
  key TEXT PRIMARY KEY,
  value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS ptm_package (
  id INTEGER PRIMARY KEY,
  registry TEXT NOT NULL,
  name TEXT NOT NULL,
  downloads INTEGER NOT NULL DEFAULT 0,
  license_raw TEXT,
  tags TEXT NOT NULL DEFAULT '[]',
  card TEXT,
  created_at TEXT,
  snapshot_ref TEXT,
  extra_blob TEXT NOT NULL DEFAULT '{}',
  UNIQUE(registry, name)
);
CREATE TABLE IF NOT EXISTS repository (
  id INTEGER PRIMARY KEY,
  host TEXT NOT NULL,
  full_name TEXT NOT NULL,
  stars INTEGER NOT NULL DEFAULT 0,
  license_raw TEXT,
  scanned_commit TEXT,
  UNIQUE(host, full_name)
);
CREATE TABLE IF NOT EXISTS usage_record (
  id INTEGER PRIMARY KEY,
  repo_id INTEGER NOT NULL REFERENCES repository(id),
  file TEXT NOT NULL,
  line INTEGER NOT NULL,
  signature_id TEXT NOT NULL,
  library TEXT NOT NULL,
  model_name TEXT,
  UNIQUE(repo_id, file, line, signature_id)
);
CREATE TABLE IF NOT EXISTS ptm_app_link (
  id INTEGER PRIMARY KEY,
  repo_id INTEGER NOT NULL REFERENCES repository(id),
  ptm_id INTEGER NOT NULL REFERENCES ptm_package(id),
  strength TEXT NOT NULL,
  UNIQUE(repo_id, ptm_id)
);
CREATE TABLE IF NOT EXISTS link_evidence (
  link_id INTEGER NOT NULL REFERENCES ptm_app_link(id) ON DELETE CASCADE,
  usage_id INTEGER NOT NULL REFERENCES usage_record(id),
  UNIQUE(link_id, usage_id)
);
CREATE TABLE IF NOT EXISTS ptm_ptm_link (
  id INTEGER PRIMARY KEY,
  child_ptm_id INTEGER NOT NULL REFERENCES ptm_package(id),
  base_model_name TEXT NOT NULL,
  resolved_base_id INTEGER REFERENCES ptm_package(id),
  UNIQUE(child_ptm_id, base_model_name)
);
CREATE TABLE IF NOT EXISTS unmatched_name (
  id INTEGER PRIMARY KEY,
  registry TEXT NOT NULL,
  name TEXT NOT NULL,
  occurrences INTEGER NOT NULL DEFAULT 0,
  UNIQUE(registry, name)
);
CREATE TABLE IF NOT EXISTS extracted_metadata (
  id INTEGER PRIMARY KEY,
  ptm_id INTEGER NOT NULL UNIQUE REFERENCES ptm_package(id),
  payload TEXT NOT NULL,
  mode TEXT NOT NULL,
  extracted_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS repo_scan_result (
  repo_id INTEGER PRIMARY KEY REFERENCES repository(id),
  files_seen INTEGER NOT NULL,
  files_prefiltered INTEGER NOT NULL,
  files_analyzed INTEGER NOT NULL,
  files_skipped INTEGER NOT NULL,
  usage_records INTEGER NOT NULL,
  scanned_at TEXT NOT NULL
);
)sql";

}  // namespace

Store Store::open(const std::filesystem::path& path) {
    Store s;
    s.impl_ = std::make_unique<Impl>();
    int rc = sqlite3_open(path.string().c_str(), &s.impl_->db);
    if (rc != SQLITE_OK) {
        throw Error("cannot open database at " + path.string() + ": " +
                    (s.impl_->db ? sqlite3_errmsg(s.impl_->db) : "out of memory"));
    }
    s.impl_->exec("PRAGMA foreign_keys = ON;");
    s.impl_->exec(kSchema);

    Stmt get(*s.impl_, "SELECT value FROM meta WHERE key = 'schema_version'");
    if (get.step()) {
        int found = std::stoi(get.col_text(0));
        if (found != kSchemaVersion) {
            throw Error("database schema version " + std::to_string(found) +
                        " does not match expected " + std::to_string(kSchemaVersion));
        }
    } else {
        Stmt put(*s.impl_,
                 "INSERT INTO meta (key, value) VALUES ('schema_version', ?1)");
        put.bind(1, std::to_string(kSchemaVersion));
        put.step();
    }
    return s;
}

Store Store::open_memory() { return open(":memory:"); }

Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

std::int64_t Store::put_ptm(const PtmPackage& p) {
    Stmt upsert(*impl_, R"sql(
        INSERT INTO ptm_package
          (registry, name, downloads, license_raw, tags, card, created_at,
           snapshot_ref, extra_blob)
        VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)
        ON CONFLICT(registry, name) DO UPDATE SET
          downloads = excluded.downloads,
          license_raw = excluded.license_raw,
          tags = excluded.tags,
          card = excluded.card,
          created_at = excluded.created_at,
          snapshot_ref = excluded.snapshot_ref,
          extra_blob = excluded.extra_blob
    )sql");
    upsert.bind(1, to_string(p.registry))
        .bind(2, p.name)
        .bind(3, p.downloads)
        .bind(4, p.license_raw)
        .bind(5, tags_to_json(p.tags))
        .bind(6, p.card)
        .bind(7, p.created_at)
        .bind(8, p.snapshot_ref)
        .bind(9, p.extra_blob.empty() ? std::string("{}") : p.extra_blob);
    upsert.step();

    Stmt get(*impl_, "SELECT id FROM ptm_package WHERE registry = ?1 AND name = ?2");
    get.bind(1, to_string(p.registry)).bind(2, p.name);
    get.step();
    return get.col_int(0);
}

namespace {

PtmPackage read_ptm(const Stmt& s) {
    PtmPackage p;
    p.id = s.col_int(0);
    p.registry = registry_from_string(s.col_text(1)).value_or(Registry::HuggingFace);
    p.name = s.col_text(2);
    p.downloads = s.col_int(3);
    p.license_raw = s.col_opt_text(4);
    p.tags = tags_from_json(s.col_text(5));
    p.card = s.col_opt_text(6);
    p.created_at = s.col_opt_text(7);
    p.snapshot_ref = s.col_opt_text(8);
    p.extra_blob = s.col_text(9);
    return p;
}

constexpr const char* kPtmCols =
    "id, registry, name, downloads, license_raw, tags, card, created_at, "
    "snapshot_ref, extra_blob";

}  // namespace

std::optional<PtmPackage> Store::get_ptm(Registry registry, const std::string& name) const {
    Stmt s(*impl_, ("SELECT " + std::string(kPtmCols) +
                    " FROM ptm_package WHERE registry = ?1 AND name = ?2")
                       .c_str());
    s.bind(1, to_string(registry)).bind(2, name);
    if (!s.step()) return std::nullopt;
    return read_ptm(s);
}

std::optional<PtmPackage> Store::ptm_by_id(std::int64_t id) const {
    Stmt s(*impl_,
           ("SELECT " + std::string(kPtmCols) + " FROM ptm_package WHERE id = ?1").c_str());
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_ptm(s);
}

std::vector<PtmPackage> Store::all_ptms() const {
    Stmt s(*impl_,
           ("SELECT " + std::string(kPtmCols) + " FROM ptm_package ORDER BY id").c_str());
    std::vector<PtmPackage> out;
    while (s.step()) out.push_back(read_ptm(s));
    return out;
}

std::vector<PtmPackage> Store::ptms_with_min_downloads(std::int64_t min) const {
    Stmt s(*impl_, ("SELECT " + std::string(kPtmCols) +
                    " FROM ptm_package WHERE downloads >= ?1"
                    " ORDER BY downloads DESC, name ASC")
                       .c_str());
    s.bind(1, min);
    std::vector<PtmPackage> out;
    while (s.step()) out.push_back(read_ptm(s));
    return out;
}

std::int64_t Store::put_repo(const Repository& r) {
    Stmt upsert(*impl_, R"sql(
        INSERT INTO repository (host, full_name, stars, license_raw, scanned_commit)
        VALUES (?1, ?2, ?3, ?4, ?5)
        ON CONFLICT(host, full_name) DO UPDATE SET
          stars = excluded.stars,
          license_raw = excluded.license_raw,
          scanned_commit = excluded.scanned_commit
    )sql");
    upsert.bind(1, r.host)
        .bind(2, r.full_name)
        .bind(3, r.stars)
        .bind(4, r.license_raw)
        .bind(5, r.scanned_commit);
    upsert.step();

    Stmt get(*impl_, "SELECT id FROM repository WHERE host = ?1 AND full_name = ?2");
    get.bind(1, r.host).bind(2, r.full_name);
    get.step();
    return get.col_int(0);
}

namespace {

Repository read_repo(const Stmt& s) {
    Repository r;
    r.id = s.col_int(0);
    r.host = s.col_text(1);
    r.full_name = s.col_text(2);
    r.stars = s.col_int(3);
    r.license_raw = s.col_opt_text(4);
    r.scanned_commit = s.col_opt_text(5);
    return r;
}

constexpr const char* kRepoCols = "id, host, full_name, stars, license_raw, scanned_commit";

}  // namespace

std::optional<Repository> Store::get_repo(const std::string& host,
                                          const std::string& full_name) const {
    Stmt s(*impl_, ("SELECT " + std::string(kRepoCols) +
                    " FROM repository WHERE host = ?1 AND full_name = ?2")
                       .c_str());
    s.bind(1, host).bind(2, full_name);
    if (!s.step()) return std::nullopt;
    return read_repo(s);
}

std::optional<Repository> Store::repo_by_id(std::int64_t id) const {
    Stmt s(*impl_,
           ("SELECT " + std::string(kRepoCols) + " FROM repository WHERE id = ?1").c_str());
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_repo(s);
}

std::vector<Repository> Store::all_repos() const {
    Stmt s(*impl_,
           ("SELECT " + std::string(kRepoCols) + " FROM repository ORDER BY id").c_str());
    std::vector<Repository> out;
    while (s.step()) out.push_back(read_repo(s));
    return out;
}

int Store::add_usage_records(const std::vector<UsageRecord>& records) {
    begin();
    int inserted = 0;
    try {
        for (const auto& r : records) {
            Stmt s(*impl_, R"sql(
                INSERT OR IGNORE INTO usage_record
                  (repo_id, file, line, signature_id, library, model_name)
                VALUES (?1, ?2, ?3, ?4, ?5, ?6)
            )sql");
            s.bind(1, r.repo_id)
                .bind(2, r.file)
                .bind(3, static_cast<std::int64_t>(r.line))
                .bind(4, r.signature_id)
                .bind(5, r.library)
                .bind(6, r.model_name);
            s.step();
            inserted += sqlite3_changes(impl_->db);
        }
    } catch (...) {
        rollback();
        throw;
    }
    commit();
    return inserted;
}

namespace {

UsageRecord read_usage(const Stmt& s) {
    UsageRecord r;
    r.id = s.col_int(0);
    r.repo_id = s.col_int(1);
    r.file = s.col_text(2);
    r.line = static_cast<int>(s.col_int(3));
    r.signature_id = s.col_text(4);
    r.library = s.col_text(5);
    r.model_name = s.col_opt_text(6);
    return r;
}

constexpr const char* kUsageCols =
    "id, repo_id, file, line, signature_id, library, model_name";

}  // namespace

std::vector<UsageRecord> Store::usage_for_repo(std::int64_t repo_id) const {
    Stmt s(*impl_, ("SELECT " + std::string(kUsageCols) +
                    " FROM usage_record WHERE repo_id = ?1 ORDER BY id")
                       .c_str());
    s.bind(1, repo_id);
    std::vector<UsageRecord> out;
    while (s.step()) out.push_back(read_usage(s));
    return out;
}

std::vector<UsageRecord> Store::all_usage() const {
    Stmt s(*impl_,
           ("SELECT " + std::string(kUsageCols) + " FROM usage_record ORDER BY id").c_str());
    std::vector<UsageRecord> out;
    while (s.step()) out.push_back(read_usage(s));
    return out;
}

void Store::replace_links(const std::vector<PtmAppLink>& links) {
    begin();
    try {
        impl_->exec("DELETE FROM link_evidence;");
        impl_->exec("DELETE FROM ptm_app_link;");
        for (const auto& l : links) {
            Stmt s(*impl_,
                   "INSERT INTO ptm_app_link (repo_id, ptm_id, strength) VALUES (?1, ?2, ?3)");
            s.bind(1, l.repo_id).bind(2, l.ptm_id).bind(3, to_string(l.strength));
            s.step();
            std::int64_t link_id = sqlite3_last_insert_rowid(impl_->db);
            for (std::int64_t usage_id : l.evidence) {
                Stmt e(*impl_,
                       "INSERT OR IGNORE INTO link_evidence (link_id, usage_id) VALUES (?1, ?2)");
                e.bind(1, link_id).bind(2, usage_id);
                e.step();
            }
        }
    } catch (...) {
        rollback();
        throw;
    }
    commit();
}

std::vector<PtmAppLink> Store::all_links() const {
    Stmt s(*impl_, "SELECT id, repo_id, ptm_id, strength FROM ptm_app_link ORDER BY id");
    std::vector<PtmAppLink> out;
    while (s.step()) {
        PtmAppLink l;
        l.id = s.col_int(0);
        l.repo_id = s.col_int(1);
        l.ptm_id = s.col_int(2);
        l.strength =
            match_strength_from_string(s.col_text(3)).value_or(MatchStrength::Exact);
        out.push_back(std::move(l));
    }
    for (auto& l : out) {
        Stmt e(*impl_,
               "SELECT usage_id FROM link_evidence WHERE link_id = ?1 ORDER BY usage_id");
        e.bind(1, l.id);
        while (e.step()) l.evidence.push_back(e.col_int(0));
    }
    return out;
}

void Store::replace_ptm_ptm_links(const std::vector<PtmPtmLink>& links) {
    begin();
    try {
        impl_->exec("DELETE FROM ptm_ptm_link;");
        for (const auto& l : links) {
            Stmt s(*impl_, R"sql(
                INSERT INTO ptm_ptm_link (child_ptm_id, base_model_name, resolved_base_id)
                VALUES (?1, ?2, ?3)
            )sql");
            s.bind(1, l.child_ptm_id).bind(2, l.base_model_name).bind_opt_int(3, l.resolved_base_id);
            s.step();
        }
    } catch (...) {
        rollback();
        throw;
    }
    commit();
}

std::vector<PtmPtmLink> Store::all_ptm_ptm_links() const {
    Stmt s(*impl_,
           "SELECT id, child_ptm_id, base_model_name, resolved_base_id FROM ptm_ptm_link "
           "ORDER BY id");
    std::vector<PtmPtmLink> out;
    while (s.step()) {
        PtmPtmLink l;
        l.id = s.col_int(0);
        l.child_ptm_id = s.col_int(1);
        l.base_model_name = s.col_text(2);
        l.resolved_base_id = s.col_opt_int(3);
        out.push_back(std::move(l));
    }
    return out;
}

void Store::replace_unmatched(const std::vector<UnmatchedName>& names) {
    begin();
    try {
        impl_->exec("DELETE FROM unmatched_name;");
        for (const auto& n : names) {
            Stmt s(*impl_,
                   "INSERT INTO unmatched_name (registry, name, occurrences) VALUES (?1, ?2, ?3)");
            s.bind(1, to_string(n.registry)).bind(2, n.name).bind(3, n.occurrences);
            s.step();
        }
    } catch (...) {
        rollback();
        throw;
    }
    commit();
}

std::vector<UnmatchedName> Store::all_unmatched() const {
    Stmt s(*impl_, "SELECT id, registry, name, occurrences FROM unmatched_name ORDER BY id");
    std::vector<UnmatchedName> out;
    while (s.step()) {
        UnmatchedName n;
        n.id = s.col_int(0);
        n.registry = registry_from_string(s.col_text(1)).value_or(Registry::HuggingFace);
        n.name = s.col_text(2);
        n.occurrences = s.col_int(3);
        out.push_back(std::move(n));
    }
    return out;
}

void Store::add_link(const PtmAppLink& link) {
    Stmt ins(*impl_, R"sql(
        INSERT OR IGNORE INTO ptm_app_link (repo_id, ptm_id, strength)
        VALUES (?1, ?2, ?3)
    )sql");
    ins.bind(1, link.repo_id).bind(2, link.ptm_id).bind(3, to_string(link.strength));
    ins.step();

    Stmt get(*impl_, "SELECT id FROM ptm_app_link WHERE repo_id = ?1 AND ptm_id = ?2");
    get.bind(1, link.repo_id).bind(2, link.ptm_id);
    get.step();
    std::int64_t link_id = get.col_int(0);
    for (std::int64_t usage_id : link.evidence) {
        Stmt e(*impl_,
               "INSERT OR IGNORE INTO link_evidence (link_id, usage_id) VALUES (?1, ?2)");
        e.bind(1, link_id).bind(2, usage_id);
        e.step();
    }
}

void Store::add_ptm_ptm_link(const PtmPtmLink& link) {
    Stmt s(*impl_, R"sql(
        INSERT INTO ptm_ptm_link (child_ptm_id, base_model_name, resolved_base_id)
        VALUES (?1, ?2, ?3)
        ON CONFLICT(child_ptm_id, base_model_name) DO UPDATE SET
          resolved_base_id = excluded.resolved_base_id
    )sql");
    s.bind(1, link.child_ptm_id)
        .bind(2, link.base_model_name)
        .bind_opt_int(3, link.resolved_base_id);
    s.step();
}

void Store::add_unmatched(const UnmatchedName& name) {
    Stmt s(*impl_, R"sql(
        INSERT INTO unmatched_name (registry, name, occurrences) VALUES (?1, ?2, ?3)
        ON CONFLICT(registry, name) DO UPDATE SET occurrences = excluded.occurrences
    )sql");
    s.bind(1, to_string(name.registry)).bind(2, name.name).bind(3, name.occurrences);
    s.step();
}

bool Store::put_metadata(std::int64_t ptm_id, const std::string& payload_json,
                         const std::string& mode, const std::string& extracted_at) {
    Stmt get(*impl_, "SELECT payload, mode FROM extracted_metadata WHERE ptm_id = ?1");
    get.bind(1, ptm_id);
    if (get.step()) {
        if (get.col_text(0) == payload_json && get.col_text(1) == mode) return false;
        Stmt upd(*impl_, R"sql(
            UPDATE extracted_metadata SET payload = ?2, mode = ?3, extracted_at = ?4
            WHERE ptm_id = ?1
        )sql");
        upd.bind(1, ptm_id).bind(2, payload_json).bind(3, mode).bind(4, extracted_at);
        upd.step();
        return true;
    }
    Stmt ins(*impl_, R"sql(
        INSERT INTO extracted_metadata (ptm_id, payload, mode, extracted_at)
        VALUES (?1, ?2, ?3, ?4)
    )sql");
    ins.bind(1, ptm_id).bind(2, payload_json).bind(3, mode).bind(4, extracted_at);
    ins.step();
    return true;
}

namespace {

ExtractedMetadata read_metadata(const Stmt& s) {
    ExtractedMetadata m;
    m.id = s.col_int(0);
    m.ptm_id = s.col_int(1);
    m.payload_json = s.col_text(2);
    m.mode = s.col_text(3);
    m.extracted_at = s.col_text(4);
    return m;
}

}  // namespace

std::optional<ExtractedMetadata> Store::metadata_for(std::int64_t ptm_id) const {
    Stmt s(*impl_,
           "SELECT id, ptm_id, payload, mode, extracted_at FROM extracted_metadata "
           "WHERE ptm_id = ?1");
    s.bind(1, ptm_id);
    if (!s.step()) return std::nullopt;
    return read_metadata(s);
}

std::vector<ExtractedMetadata> Store::all_metadata() const {
    Stmt s(*impl_,
           "SELECT id, ptm_id, payload, mode, extracted_at FROM extracted_metadata "
           "ORDER BY id");
    std::vector<ExtractedMetadata> out;
    while (s.step()) out.push_back(read_metadata(s));
    return out;
}

void Store::record_repo_scan(const RepoScanStats& stats) {
    Stmt s(*impl_, R"sql(
        INSERT INTO repo_scan_result
          (repo_id, files_seen, files_prefiltered, files_analyzed, files_skipped,
           usage_records, scanned_at)
        VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)
        ON CONFLICT(repo_id) DO UPDATE SET
          files_seen = excluded.files_seen,
          files_prefiltered = excluded.files_prefiltered,
          files_analyzed = excluded.files_analyzed,
          files_skipped = excluded.files_skipped,
          usage_records = excluded.usage_records,
          scanned_at = excluded.scanned_at
    )sql");
    s.bind(1, stats.repo_id)
        .bind(2, static_cast<std::int64_t>(stats.files_seen))
        .bind(3, static_cast<std::int64_t>(stats.files_prefiltered))
        .bind(4, static_cast<std::int64_t>(stats.files_analyzed))
        .bind(5, static_cast<std::int64_t>(stats.files_skipped))
        .bind(6, static_cast<std::int64_t>(stats.usage_records))
        .bind(7, stats.scanned_at);
    s.step();
}

std::vector<RepoScanStats> Store::repo_scans() const {
    Stmt s(*impl_, R"sql(
        SELECT repo_id, files_seen, files_prefiltered, files_analyzed, files_skipped,
               usage_records, scanned_at
        FROM repo_scan_result ORDER BY repo_id
    )sql");
    std::vector<RepoScanStats> out;
    while (s.step()) {
        RepoScanStats r;
        r.repo_id = s.col_int(0);
        r.files_seen = static_cast<int>(s.col_int(1));
        r.files_prefiltered = static_cast<int>(s.col_int(2));
        r.files_analyzed = static_cast<int>(s.col_int(3));
        r.files_skipped = static_cast<int>(s.col_int(4));
        r.usage_records = static_cast<int>(s.col_int(5));
        r.scanned_at = s.col_text(6);
        out.push_back(std::move(r));
    }
    return out;
}

std::int64_t Store::count(const std::string& table) const {
    static const std::vector<std::string> kTables = {
        "ptm_package",  "repository",     "usage_record",       "ptm_app_link",
        "link_evidence", "ptm_ptm_link",  "unmatched_name",     "extracted_metadata",
        "repo_scan_result"};
    bool known = false;
    for (const auto& t : kTables) {
        if (t == table) known = true;
    }
    if (!known) throw Error("unknown table: " + table);
    Stmt s(*impl_, ("SELECT COUNT(*) FROM " + table).c_str());
    s.step();
    return s.col_int(0);
}

void Store::begin() { impl_->exec("BEGIN;"); }
void Store::commit() { impl_->exec("COMMIT;"); }
void Store::rollback() { impl_->exec("ROLLBACK;"); }

}  // namespace ptmchain::store
