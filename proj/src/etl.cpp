#include <fstream>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "ptmchain/store.hpp"
#include "ptmchain/strings.hpp"

namespace ptmchain::store {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

ojson opt_str(const std::optional<std::string>& v) {
    return v ? ojson(*v) : ojson(nullptr);
}

ojson opt_int(const std::optional<std::int64_t>& v) {
    return v ? ojson(*v) : ojson(nullptr);
}

ojson parse_object_or_empty(const std::string& text) {
    ojson j = ojson::parse(text, nullptr, false);
    return j.is_object() ? j : ojson::object();
}

ojson ptm_row(const PtmPackage& p) {
    ojson row;
    row["id"] = p.id;
    row["registry"] = to_string(p.registry);
    row["name"] = p.name;
    row["downloads"] = p.downloads;
    row["license"] = opt_str(p.license_raw);
    row["tags"] = p.tags;
    row["card"] = opt_str(p.card);
    row["created_at"] = opt_str(p.created_at);
    row["snapshot_ref"] = opt_str(p.snapshot_ref);
    row["extra"] = parse_object_or_empty(p.extra_blob);
    return row;
}

ojson repo_row(const Repository& r) {
    ojson row;
    row["id"] = r.id;
    row["host"] = r.host;
    row["full_name"] = r.full_name;
    row["stars"] = r.stars;
    row["license"] = opt_str(r.license_raw);
    row["scanned_commit"] = opt_str(r.scanned_commit);
    return row;
}

ojson usage_row(const UsageRecord& u) {
    ojson row;
    row["id"] = u.id;
    row["repo_id"] = u.repo_id;
    row["file"] = u.file;
    row["line"] = u.line;
    row["signature_id"] = u.signature_id;
    row["library"] = u.library;
    row["model_name"] = opt_str(u.model_name);
    return row;
}

ojson link_row(const PtmAppLink& l) {
    ojson row;
    row["id"] = l.id;
    row["repo_id"] = l.repo_id;
    row["ptm_id"] = l.ptm_id;
    row["strength"] = to_string(l.strength);
    row["evidence"] = l.evidence;
    return row;
}

ojson ptm_link_row(const PtmPtmLink& l) {
    ojson row;
    row["id"] = l.id;
    row["child_ptm_id"] = l.child_ptm_id;
    row["base_model_name"] = l.base_model_name;
    row["resolved_base_id"] = opt_int(l.resolved_base_id);
    return row;
}

ojson unmatched_row(const UnmatchedName& n) {
    ojson row;
    row["id"] = n.id;
    row["registry"] = to_string(n.registry);
    row["name"] = n.name;
    row["occurrences"] = n.occurrences;
    return row;
}

ojson metadata_row(const ExtractedMetadata& m) {
    ojson row;
    row["id"] = m.id;
    row["ptm_id"] = m.ptm_id;
    row["payload"] = parse_object_or_empty(m.payload_json);
    row["mode"] = m.mode;
    row["extracted_at"] = m.extracted_at;
    return row;
}

ojson scan_row(const RepoScanStats& r) {
    ojson row;
    row["repo_id"] = r.repo_id;
    row["files_seen"] = r.files_seen;
    row["files_prefiltered"] = r.files_prefiltered;
    row["files_analyzed"] = r.files_analyzed;
    row["files_skipped"] = r.files_skipped;
    row["usage_records"] = r.usage_records;
    row["scanned_at"] = r.scanned_at;
    return row;
}

template <typename Rows, typename ToRow>
void write_jsonl(const fs::path& file, const Rows& rows, ToRow to_row) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    for (const auto& r : rows) {
        out << to_row(r).dump() << "\n";
    }
}

std::string csv_cell(const ojson& v) {
    std::string text;
    if (v.is_null()) {
        return "";
    } else if (v.is_string()) {
        text = v.get<std::string>();
    } else {
        text = v.dump();
    }
    bool needs_quote = text.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quote) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += "\"";
    return quoted;
}

template <typename Rows, typename ToRow>
void write_csv(const fs::path& file, const Rows& rows, ToRow to_row) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    bool header_done = false;
    for (const auto& r : rows) {
        ojson row = to_row(r);
        if (!header_done) {
            bool first = true;
            for (auto it = row.begin(); it != row.end(); ++it) {
                if (!first) out << ",";
                out << csv_cell(ojson(it.key()));
                first = false;
            }
            out << "\r\n";
            header_done = true;
        }
        bool first = true;
        for (auto it = row.begin(); it != row.end(); ++it) {
            if (!first) out << ",";
            out << csv_cell(it.value());
            first = false;
        }
        out << "\r\n";
    }
    if (!header_done) {
        out << "";  // an empty table exports as an empty file
    }
}

}  // namespace

void export_jsonl(const Store& store, const fs::path& dir) {
    fs::create_directories(dir);
    write_jsonl(dir / "ptm_package.jsonl", store.all_ptms(), ptm_row);
    write_jsonl(dir / "repository.jsonl", store.all_repos(), repo_row);
    write_jsonl(dir / "usage_record.jsonl", store.all_usage(), usage_row);
    write_jsonl(dir / "ptm_app_link.jsonl", store.all_links(), link_row);
    write_jsonl(dir / "ptm_ptm_link.jsonl", store.all_ptm_ptm_links(), ptm_link_row);
    write_jsonl(dir / "unmatched_name.jsonl", store.all_unmatched(), unmatched_row);
    write_jsonl(dir / "extracted_metadata.jsonl", store.all_metadata(), metadata_row);
    write_jsonl(dir / "repo_scan_result.jsonl", store.repo_scans(), scan_row);
}

void export_csv(const Store& store, const fs::path& dir) {
    fs::create_directories(dir);
    write_csv(dir / "ptm_package.csv", store.all_ptms(), ptm_row);
    write_csv(dir / "repository.csv", store.all_repos(), repo_row);
    write_csv(dir / "usage_record.csv", store.all_usage(), usage_row);
    write_csv(dir / "ptm_app_link.csv", store.all_links(), link_row);
    write_csv(dir / "ptm_ptm_link.csv", store.all_ptm_ptm_links(), ptm_link_row);
    write_csv(dir / "unmatched_name.csv", store.all_unmatched(), unmatched_row);
    write_csv(dir / "extracted_metadata.csv", store.all_metadata(), metadata_row);
    write_csv(dir / "repo_scan_result.csv", store.repo_scans(), scan_row);
}

namespace {

std::optional<std::string> opt_from(const ojson& row, const char* key) {
    if (!row.contains(key) || row[key].is_null()) return std::nullopt;
    return row[key].get<std::string>();
}

/// Calls `fn(line_json, line_number)` for every parseable line.
template <typename Fn>
void for_each_line(const fs::path& file, IngestStats& stats, const std::string& table,
                   Fn fn) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return;  // absent table files are fine
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ojson row = ojson::parse(line, nullptr, false);
        if (!row.is_object()) {
            stats.warnings.push_back(table + " line " + std::to_string(line_no) +
                                     ": not a JSON object, skipped");
            continue;
        }
        try {
            fn(row, line_no);
        } catch (const std::exception& e) {
            stats.warnings.push_back(table + " line " + std::to_string(line_no) + ": " +
                                     e.what() + ", skipped");
        }
    }
}

const char* kKnownPtmKeys[] = {"id",   "registry",   "name",         "downloads", "license",
                               "tags", "card",       "created_at",   "snapshot_ref", "extra"};

bool known_ptm_key(const std::string& key) {
    for (const char* k : kKnownPtmKeys) {
        if (key == k) return true;
    }
    return false;
}

}  // namespace

IngestStats ingest_jsonl(Store& store, const fs::path& dir) {
    IngestStats stats;
    std::unordered_map<std::int64_t, std::int64_t> repo_ids;
    std::unordered_map<std::int64_t, std::int64_t> ptm_ids;
    std::unordered_map<std::int64_t, std::int64_t> usage_ids;

    for_each_line(dir / "repository.jsonl", stats, "repository",
                  [&](const ojson& row, int) {
        Repository r;
        r.host = row.value("host", "github");
        r.full_name = row.at("full_name").get<std::string>();
        if (r.full_name.empty()) throw Error("empty full_name");
        r.stars = row.value("stars", std::int64_t{0});
        r.license_raw = opt_from(row, "license");
        r.scanned_commit = opt_from(row, "scanned_commit");
        std::int64_t new_id = store.put_repo(r);
        if (row.contains("id") && row["id"].is_number_integer()) {
            repo_ids[row["id"].get<std::int64_t>()] = new_id;
        }
        ++stats.repos;
    });

    for_each_line(dir / "ptm_package.jsonl", stats, "ptm_package",
                  [&](const ojson& row, int) {
        PtmPackage p;
        auto reg = registry_from_string(row.value("registry", ""));
        if (!reg) throw Error("unknown registry");
        p.registry = *reg;
        p.name = row.at("name").get<std::string>();
        if (p.name.empty()) throw Error("empty name");
        p.downloads = row.value("downloads", std::int64_t{0});
        if (p.downloads < 0) throw Error("negative downloads");
        p.license_raw = opt_from(row, "license");
        if (row.contains("tags") && row["tags"].is_array()) {
            for (const auto& t : row["tags"]) {
                if (t.is_string()) p.tags.push_back(t.get<std::string>());
            }
        }
        p.card = opt_from(row, "card");
        p.created_at = opt_from(row, "created_at");
        p.snapshot_ref = opt_from(row, "snapshot_ref");

        // Off-schema keys ride along in the blob and survive a round trip.
        ojson extra = ojson::object();
        if (row.contains("extra") && row["extra"].is_object()) extra = row["extra"];
        for (auto it = row.begin(); it != row.end(); ++it) {
            if (!known_ptm_key(it.key())) extra[it.key()] = it.value();
        }
        p.extra_blob = extra.dump();

        std::int64_t new_id = store.put_ptm(p);
        if (row.contains("id") && row["id"].is_number_integer()) {
            ptm_ids[row["id"].get<std::int64_t>()] = new_id;
        }
        ++stats.ptms;
    });

    {
        std::vector<UsageRecord> pending;
        std::vector<std::int64_t> old_ids;
        for_each_line(dir / "usage_record.jsonl", stats, "usage_record",
                      [&](const ojson& row, int) {
            UsageRecord u;
            std::int64_t old_repo = row.at("repo_id").get<std::int64_t>();
            auto mapped = repo_ids.find(old_repo);
            if (mapped == repo_ids.end()) throw Error("repo_id not in this export");
            u.repo_id = mapped->second;
            u.file = row.at("file").get<std::string>();
            u.line = row.at("line").get<int>();
            if (u.line < 1) throw Error("line must be positive");
            u.signature_id = row.at("signature_id").get<std::string>();
            u.library = row.value("library", "");
            u.model_name = opt_from(row, "model_name");
            pending.push_back(std::move(u));
            old_ids.push_back(row.value("id", std::int64_t{0}));
        });
        store.add_usage_records(pending);
        stats.usage_records = static_cast<int>(pending.size());

        std::map<std::tuple<std::int64_t, std::string, int, std::string>, std::int64_t>
            by_key;
        for (const auto& u : store.all_usage()) {
            by_key[{u.repo_id, u.file, u.line, u.signature_id}] = u.id;
        }
        for (size_t i = 0; i < pending.size(); ++i) {
            auto it = by_key.find({pending[i].repo_id, pending[i].file, pending[i].line,
                                   pending[i].signature_id});
            if (it != by_key.end() && old_ids[i] != 0) usage_ids[old_ids[i]] = it->second;
        }
    }

    for_each_line(dir / "ptm_app_link.jsonl", stats, "ptm_app_link",
                  [&](const ojson& row, int) {
        PtmAppLink l;
        auto r = repo_ids.find(row.at("repo_id").get<std::int64_t>());
        auto p = ptm_ids.find(row.at("ptm_id").get<std::int64_t>());
        if (r == repo_ids.end()) throw Error("repo_id not in this export");
        if (p == ptm_ids.end()) throw Error("ptm_id not in this export");
        l.repo_id = r->second;
        l.ptm_id = p->second;
        auto strength = match_strength_from_string(row.value("strength", ""));
        if (!strength) throw Error("unknown link strength");
        l.strength = *strength;
        if (row.contains("evidence") && row["evidence"].is_array()) {
            for (const auto& ev : row["evidence"]) {
                auto u = usage_ids.find(ev.get<std::int64_t>());
                if (u != usage_ids.end()) l.evidence.push_back(u->second);
            }
        }
        store.add_link(l);
        ++stats.links;
    });

    for_each_line(dir / "ptm_ptm_link.jsonl", stats, "ptm_ptm_link",
                  [&](const ojson& row, int) {
        PtmPtmLink l;
        auto c = ptm_ids.find(row.at("child_ptm_id").get<std::int64_t>());
        if (c == ptm_ids.end()) throw Error("child_ptm_id not in this export");
        l.child_ptm_id = c->second;
        l.base_model_name = row.at("base_model_name").get<std::string>();
        if (l.base_model_name.empty()) throw Error("empty base_model_name");
        if (row.contains("resolved_base_id") && !row["resolved_base_id"].is_null()) {
            auto b = ptm_ids.find(row["resolved_base_id"].get<std::int64_t>());
            if (b != ptm_ids.end()) l.resolved_base_id = b->second;
        }
        store.add_ptm_ptm_link(l);
        ++stats.ptm_ptm_links;
    });

    for_each_line(dir / "unmatched_name.jsonl", stats, "unmatched_name",
                  [&](const ojson& row, int) {
        UnmatchedName n;
        auto reg = registry_from_string(row.value("registry", ""));
        if (!reg) throw Error("unknown registry");
        n.registry = *reg;
        n.name = row.at("name").get<std::string>();
        n.occurrences = row.value("occurrences", std::int64_t{0});
        store.add_unmatched(n);
        ++stats.unmatched;
    });

    for_each_line(dir / "extracted_metadata.jsonl", stats, "extracted_metadata",
                  [&](const ojson& row, int) {
        auto p = ptm_ids.find(row.at("ptm_id").get<std::int64_t>());
        if (p == ptm_ids.end()) throw Error("ptm_id not in this export");
        if (!row.contains("payload") || !row["payload"].is_object()) {
            throw Error("payload must be an object");
        }
        store.put_metadata(p->second, row["payload"].dump(), row.value("mode", "cheap"),
                           row.value("extracted_at", ""));
        ++stats.metadata;
    });

    for_each_line(dir / "repo_scan_result.jsonl", stats, "repo_scan_result",
                  [&](const ojson& row, int) {
        auto r = repo_ids.find(row.at("repo_id").get<std::int64_t>());
        if (r == repo_ids.end()) throw Error("repo_id not in this export");
        RepoScanStats s;
        s.repo_id = r->second;
        s.files_seen = row.value("files_seen", 0);
        s.files_prefiltered = row.value("files_prefiltered", 0);
        s.files_analyzed = row.value("files_analyzed", 0);
        s.files_skipped = row.value("files_skipped", 0);
        s.usage_records = row.value("usage_records", 0);
        s.scanned_at = row.value("scanned_at", "");
        store.record_repo_scan(s);
    });

    return stats;
}

}  // namespace ptmchain::store
