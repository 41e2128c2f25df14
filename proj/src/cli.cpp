#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptmchain/cards.hpp"
#include "ptmchain/cli.hpp"
#include "ptmchain/client.hpp"
#include "ptmchain/license.hpp"
#include "ptmchain/mapper.hpp"
#include "ptmchain/scanner.hpp"
#include "ptmchain/signatures.hpp"
#include "ptmchain/stats.hpp"
#include "ptmchain/store.hpp"

#ifndef PTMCHAIN_DEFAULT_DATA_DIR
#define PTMCHAIN_DEFAULT_DATA_DIR "data"
#endif

namespace ptmchain::cli {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

fs::path data_path(const std::string& data_dir, const char* rel) {
    return fs::path(data_dir) / rel;
}

void emit(std::ostream& out, const ordered_json& summary) {
    out << summary.dump() << "\n";
}

int cmd_ingest(store::Store& store, const std::string& from, std::ostream& out,
               std::ostream& err) {
    store::IngestStats stats = store::ingest_jsonl(store, from);
    for (const auto& w : stats.warnings) err << "warning: " << w << "\n";
    emit(out, {{"command", "ingest"},
               {"ptms", stats.ptms},
               {"repos", stats.repos},
               {"usage_records", stats.usage_records},
               {"links", stats.links},
               {"ptm_ptm_links", stats.ptm_ptm_links},
               {"unmatched", stats.unmatched},
               {"metadata", stats.metadata},
               {"warnings", stats.warnings.size()}});
    return 0;
}

int cmd_scan(store::Store& store, const std::string& corpus,
             const std::string& signatures_file, int jobs, bool prefilter,
             bool detect_license, const std::string& data_dir, std::ostream& out,
             std::ostream& err) {
    sig::SignatureSet signatures = sig::SignatureSet::load(signatures_file);
    scan::ScanConfig config;
    config.jobs = jobs;
    config.prefilter = prefilter;
    scan::CorpusScan corpus_scan = scan::scan_corpus(corpus, signatures, config);

    std::optional<license::Fingerprints> fingerprints;
    std::optional<license::Classifier> classifier;
    if (detect_license) {
        fingerprints = license::Fingerprints::load(
            data_path(data_dir, "licenses/texts"));
        classifier =
            license::Classifier::load(data_path(data_dir, "licenses/classes.json"));
    }

    std::string now = card::utc_now_iso();
    int total_records = 0;
    int inserted = 0;
    for (const auto& repo_scan : corpus_scan.repos) {
        Repository repo;
        if (auto existing = store.get_repo("github", repo_scan.repo)) {
            repo = *existing;
        } else {
            repo.full_name = repo_scan.repo;
        }
        if (detect_license && (!repo.license_raw || repo.license_raw->empty())) {
            // corpus directories spell "owner/name" as "owner__name"
            std::string dir_name = repo_scan.repo;
            auto pos = dir_name.find('/');
            if (pos != std::string::npos) dir_name.replace(pos, 1, "__");
            license::Class detected = license::detect_repo_license(
                fs::path(corpus) / dir_name, *fingerprints, *classifier);
            switch (detected.category) {
                case license::Category::NoLicense:
                case license::Category::Multiple:
                case license::Category::Other:
                    break;
                default:
                    repo.license_raw = detected.token;
            }
        }
        std::int64_t repo_id = store.put_repo(repo);

        std::vector<UsageRecord> records = repo_scan.records;
        for (auto& r : records) r.repo_id = repo_id;
        inserted += store.add_usage_records(records);
        total_records += static_cast<int>(records.size());

        store::RepoScanStats scan_stats;
        scan_stats.repo_id = repo_id;
        scan_stats.files_seen = repo_scan.files_seen;
        scan_stats.files_prefiltered = repo_scan.files_prefiltered;
        scan_stats.files_analyzed = repo_scan.files_analyzed;
        scan_stats.files_skipped = static_cast<int>(repo_scan.skipped.size());
        scan_stats.usage_records = static_cast<int>(records.size());
        scan_stats.scanned_at = now;
        store.record_repo_scan(scan_stats);

        for (const auto& skipped : repo_scan.skipped) {
            err << repo_scan.repo << ": skipped " << skipped.path << " ("
                << skipped.reason << ")\n";
        }
    }
    emit(out, {{"command", "scan"},
               {"repos", corpus_scan.repos.size()},
               {"usage_records", total_records},
               {"new_usage_records", inserted}});
    return 0;
}

int cmd_map(store::Store& store, std::ostream& out) {
    mapping::MapStats stats = mapping::map_dependencies(store);
    mapping::PtmPtmStats ptm_stats = mapping::derive_ptm_ptm_links(store);
    emit(out, {{"command", "map"},
               {"links", stats.links},
               {"distinct_repos", stats.distinct_repos},
               {"distinct_ptms", stats.distinct_ptms},
               {"unmatched_names", stats.unmatched_names},
               {"dynamic_usages", stats.dynamic_usages},
               {"ptm_ptm_links", ptm_stats.links},
               {"ptm_ptm_resolved", ptm_stats.resolved}});
    return 0;
}

int cmd_license_check(store::Store& store, const std::string& data_dir,
                      std::ostream& out) {
    auto classifier =
        license::Classifier::load(data_path(data_dir, "licenses/classes.json"));
    auto matrix = license::Matrix::load(data_path(data_dir, "licenses/matrix.json"));
    license::FlowReport report = license::license_flows(store, classifier, matrix);

    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"ptm_license", row.ptm_license},
                        {"repo_license", row.repo_license},
                        {"count", row.count},
                        {"verdict", license::to_string(row.verdict)},
                        {"reason", row.reason}});
    }
    emit(out, {{"command", "license-check"},
               {"total_links", report.total_links},
               {"identical_pct", report.identical_pct},
               {"incompatible_pct", report.incompatible_pct},
               {"unanalyzed_pct", report.unanalyzed_pct},
               {"no_license_downstream_pct", report.no_license_downstream_pct},
               {"rows", rows}});
    return 0;
}

int cmd_extract(store::Store& store, const std::string& data_dir, bool accurate,
                bool live, const std::string& base_url, const std::string& model,
                const std::string& api_key_env, std::ostream& out, std::ostream& err) {
    card::Schema schema = card::Schema::load(data_path(data_dir, "metadata_schema.json"));
    card::ExtractOptions options;
    {
        std::ifstream in(data_path(data_dir, "prompts/extract.txt"), std::ios::binary);
        if (!in) throw Error("cannot open the prompt template");
        std::ostringstream buf;
        buf << in.rdbuf();
        options.prompt_template = buf.str();
    }
    options.model = model;

    std::unique_ptr<card::CompletionClient> client;
    if (live) {
        card::LiveClientConfig config;
        config.base_url = base_url;
        config.model = model;
        config.api_key_env = api_key_env;
        client = std::make_unique<card::LiveClient>(config);
    } else {
        err << "no --live flag: the offline client answers every request with an "
               "empty object\n";
        client = std::make_unique<card::MockClient>(
            card::MockClient::Fallback::EmptyObject);
    }

    card::ExtractRunStats stats =
        card::extract_all(store, schema, *client, options, accurate);
    emit(out, {{"command", "extract"},
               {"mode", accurate ? "accurate" : "cheap"},
               {"cards_processed", stats.cards_processed},
               {"rows_written", stats.rows_written},
               {"requests", stats.requests},
               {"violations", stats.violations}});
    return 0;
}

int cmd_stats(store::Store& store, const std::string& data_dir, std::ostream& out) {
    stats::DomainMap map = stats::DomainMap::load(data_path(data_dir, "domains.json"));
    card::Schema schema = card::Schema::load(data_path(data_dir, "metadata_schema.json"));
    ordered_json report = stats::full_report(store, map, schema);
    report["command"] = "stats";
    emit(out, report);
    return 0;
}

int cmd_export(store::Store& store, const std::string& to, const std::string& format,
               std::ostream& out) {
    if (format == "jsonl" || format == "both") store::export_jsonl(store, to);
    if (format == "csv" || format == "both") store::export_csv(store, to);
    emit(out, {{"command", "export"}, {"dir", to}, {"format", format}});
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Supply-chain analyzer for pre-trained model reuse"};
    app.name("ptmchain");
    app.require_subcommand(1);

    std::string db_path = "ptmchain.db";
    std::string data_dir = PTMCHAIN_DEFAULT_DATA_DIR;
    app.add_option("--db", db_path, "SQLite database path");
    app.add_option("--data-dir", data_dir, "directory with signature and license data");

    auto* ingest = app.add_subcommand("ingest", "load a JSONL export directory");
    std::string ingest_from;
    ingest->add_option("--from", ingest_from, "export directory")->required();

    auto* scan = app.add_subcommand("scan", "scan a corpus of repository checkouts");
    std::string scan_corpus;
    std::string scan_signatures;
    int scan_jobs = 1;
    bool scan_no_prefilter = false;
    bool scan_detect_license = false;
    scan->add_option("--corpus", scan_corpus, "directory of owner__name checkouts")
        ->required();
    scan->add_option("--signatures", scan_signatures, "signature catalog JSON");
    scan->add_option("--jobs", scan_jobs, "parallel workers")->check(CLI::Range(1, 64));
    scan->add_flag("--no-prefilter", scan_no_prefilter,
                   "analyze every file, skipping the textual pre-filter");
    scan->add_flag("--detect-license", scan_detect_license,
                   "fill missing repository licenses from LICENSE files");

    auto* map_cmd = app.add_subcommand(
        "map", "rebuild application-to-package and package-to-package links");

    auto* license_cmd =
        app.add_subcommand("license-check", "license flows over the stored links");

    auto* extract = app.add_subcommand("extract", "extract metadata from model cards");
    bool extract_accurate = false;
    bool extract_live = false;
    std::string extract_base_url = "https://api.openai.com";
    std::string extract_model = "gpt-3.5-turbo";
    std::string extract_key_env = "PTMCHAIN_API_KEY";
    extract->add_flag("--accurate", extract_accurate,
                      "one whole-card request instead of per-group requests");
    extract->add_flag("--live", extract_live, "call a real completion endpoint");
    extract->add_option("--base-url", extract_base_url, "completion endpoint base URL");
    extract->add_option("--model", extract_model, "completion model name");
    extract->add_option("--api-key-env", extract_key_env,
                        "environment variable holding the API key");

    auto* stats_cmd = app.add_subcommand("stats", "ecosystem statistics report");

    auto* export_cmd = app.add_subcommand("export", "write the database out as files");
    std::string export_to;
    std::string export_format = "jsonl";
    export_cmd->add_option("--to", export_to, "output directory")->required();
    export_cmd->add_option("--format", export_format, "jsonl, csv or both")
        ->check(CLI::IsMember({"jsonl", "csv", "both"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        store::Store store = store::Store::open(db_path);
        if (ingest->parsed()) return cmd_ingest(store, ingest_from, out, err);
        if (scan->parsed()) {
            if (scan_signatures.empty()) {
                scan_signatures = data_path(data_dir, "signatures.json").string();
            }
            return cmd_scan(store, scan_corpus, scan_signatures, scan_jobs,
                            !scan_no_prefilter, scan_detect_license, data_dir, out,
                            err);
        }
        if (map_cmd->parsed()) return cmd_map(store, out);
        if (license_cmd->parsed()) return cmd_license_check(store, data_dir, out);
        if (extract->parsed()) {
            return cmd_extract(store, data_dir, extract_accurate, extract_live,
                               extract_base_url, extract_model, extract_key_env, out,
                               err);
        }
        if (stats_cmd->parsed()) return cmd_stats(store, data_dir, out);
        if (export_cmd->parsed()) return cmd_export(store, export_to, export_format, out);
        err << "no subcommand\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ptmchain::cli
