#include "ptmchain/scanner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "ptmchain/strings.hpp"

namespace ptmchain::scan {

namespace fs = std::filesystem;

namespace {

bool excluded_dir(const std::string& name, const ScanConfig& config) {
    if (!name.empty() && name[0] == '.') return true;
    for (const auto& ex : config.exclude_dirs) {
        if (name == ex) return true;
    }
    return false;
}

void collect_py_files(const fs::path& dir, const fs::path& rel, const ScanConfig& config,
                      std::vector<fs::path>& out) {
    std::vector<fs::directory_entry> entries;
    for (const auto& entry : fs::directory_iterator(dir)) {
        entries.push_back(entry);
    }
    std::sort(entries.begin(), entries.end(),
              [](const fs::directory_entry& a, const fs::directory_entry& b) {
                  return a.path().filename().string() < b.path().filename().string();
              });
    for (const auto& entry : entries) {
        std::string name = entry.path().filename().string();
        if (entry.is_symlink()) continue;
        if (entry.is_directory()) {
            if (excluded_dir(name, config)) continue;
            collect_py_files(entry.path(), rel / name, config, out);
        } else if (entry.is_regular_file() && ends_with(name, ".py")) {
            out.push_back(rel / name);
        }
    }
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string repo_name_from_dir(const std::string& dir_name) {
    size_t pos = dir_name.find("__");
    if (pos == std::string::npos) return dir_name;
    return dir_name.substr(0, pos) + "/" + dir_name.substr(pos + 2);
}

bool passes_prefilter(const std::string& text, const sig::SignatureSet& signatures) {
    for (const auto& s : signatures.all()) {
        bool all_present = true;
        for (const auto& anchor : sig::anchors_for(s)) {
            if (!contains(text, anchor)) {
                all_present = false;
                break;
            }
        }
        if (all_present) return true;
    }
    return false;
}

RepoScan scan_repo(const fs::path& dir, const std::string& repo_name,
                   const sig::SignatureSet& signatures, const ScanConfig& config) {
    RepoScan result;
    result.repo = repo_name;

    std::vector<fs::path> files;
    collect_py_files(dir, fs::path(), config, files);
    result.files_seen = static_cast<int>(files.size());

    for (const auto& rel : files) {
        std::string rel_str = rel.generic_string();
        fs::path full = dir / rel;

        std::error_code ec;
        auto size = fs::file_size(full, ec);
        if (!ec && size > config.max_file_bytes) {
            result.skipped.push_back({rel_str, "file exceeds size cap"});
            continue;
        }

        std::string text = read_file(full);
        if (config.prefilter && !passes_prefilter(text, signatures)) {
            ++result.files_prefiltered;
            continue;
        }

        try {
            auto records = scan_file(rel_str, text, signatures);
            ++result.files_analyzed;
            for (auto& r : records) result.records.push_back(std::move(r));
        } catch (const py::SyntaxError& e) {
            result.skipped.push_back({rel_str, e.what()});
        }
    }

    std::sort(result.records.begin(), result.records.end(),
              [](const UsageRecord& a, const UsageRecord& b) {
                  if (a.file != b.file) return a.file < b.file;
                  if (a.line != b.line) return a.line < b.line;
                  return a.signature_id < b.signature_id;
              });
    return result;
}

CorpusScan scan_corpus(const fs::path& root, const sig::SignatureSet& signatures,
                       const ScanConfig& config) {
    std::vector<std::pair<std::string, fs::path>> repos;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory() || entry.is_symlink()) continue;
        std::string name = entry.path().filename().string();
        if (!name.empty() && name[0] == '.') continue;
        repos.emplace_back(repo_name_from_dir(name), entry.path());
    }
    std::sort(repos.begin(), repos.end());

    CorpusScan out;
    out.repos.resize(repos.size());

    int jobs = std::max(1, config.jobs);
    if (jobs == 1 || repos.size() <= 1) {
        for (size_t i = 0; i < repos.size(); ++i) {
            out.repos[i] = scan_repo(repos[i].second, repos[i].first, signatures, config);
        }
        return out;
    }

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= repos.size()) break;
            out.repos[i] = scan_repo(repos[i].second, repos[i].first, signatures, config);
        }
    };
    std::vector<std::thread> pool;
    int thread_count = std::min<int>(jobs, static_cast<int>(repos.size()));
    pool.reserve(static_cast<size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace ptmchain::scan
