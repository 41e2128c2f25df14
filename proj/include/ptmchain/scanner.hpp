#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ptmchain/analyzer.hpp"
#include "ptmchain/signatures.hpp"

namespace ptmchain::scan {

struct ScanConfig {
    std::vector<std::string> exclude_dirs = {"venv", ".venv", "env",
                                             "site-packages", "node_modules",
                                             "__pycache__"};
    std::size_t max_file_bytes = 2 * 1024 * 1024;
    bool prefilter = true;
    int jobs = 1;
};

struct SkippedFile {
    std::string path;    // repo-relative, '/'-separated
    std::string reason;
};

struct RepoScan {
    std::string repo;    // "owner/name"
    std::vector<UsageRecord> records;      // sorted by (file, line, signature_id)
    std::vector<SkippedFile> skipped;
    int files_seen = 0;        // .py files reached after directory exclusion
    int files_prefiltered = 0; // rejected by the textual pre-filter
    int files_analyzed = 0;    // parsed without error
};

struct CorpusScan {
    std::vector<RepoScan> repos;  // sorted by repo name
};

/// Textual pre-filter: keeps a file when some signature's anchor group
/// occurs entirely as raw substrings. Sound for canonical call spelling:
/// a kept-out file cannot produce records.
bool passes_prefilter(const std::string& text, const sig::SignatureSet& signatures);

/// Scans one repository checkout. Hidden directories and the configured
/// exclusion names are pruned; symlinks are not followed; files over the
/// size cap and files with syntax errors land in `skipped`.
RepoScan scan_repo(const std::filesystem::path& dir, const std::string& repo_name,
                   const sig::SignatureSet& signatures, const ScanConfig& config = {});

/// Scans every direct subdirectory of `root` as one repository. The
/// directory name "owner__name" means "owner/name". With jobs > 1 the
/// repositories are scanned concurrently; results are identical to a
/// sequential scan.
CorpusScan scan_corpus(const std::filesystem::path& root,
                       const sig::SignatureSet& signatures,
                       const ScanConfig& config = {});

/// "owner__name" -> "owner/name"; names without the separator pass through.
std::string repo_name_from_dir(const std::string& dir_name);

}  // namespace ptmchain::scan
