#include "ptmchain/license.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ptmchain/strings.hpp"

namespace ptmchain::license {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::optional<Category> category_from_string(const std::string& s) {
    if (s == "permissive") return Category::Permissive;
    if (s == "weak-copyleft") return Category::WeakCopyleft;
    if (s == "strong-copyleft") return Category::StrongCopyleft;
    if (s == "public-domain") return Category::PublicDomain;
    if (s == "rail") return Category::Rail;
    if (s == "other") return Category::Other;
    if (s == "no-license") return Category::NoLicense;
    if (s == "multiple") return Category::Multiple;
    return std::nullopt;
}

std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::optional<Verdict> verdict_from_string(const std::string& s) {
    if (s == "compatible") return Verdict::Compatible;
    if (s == "incompatible") return Verdict::Incompatible;
    if (s == "unanalyzed") return Verdict::Unanalyzed;
    return std::nullopt;
}

}  // namespace

std::string to_string(Category c) {
    switch (c) {
        case Category::Permissive: return "permissive";
        case Category::WeakCopyleft: return "weak-copyleft";
        case Category::StrongCopyleft: return "strong-copyleft";
        case Category::PublicDomain: return "public-domain";
        case Category::Rail: return "rail";
        case Category::Other: return "other";
        case Category::NoLicense: return "no-license";
        case Category::Multiple: return "multiple";
    }
    return "other";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Compatible: return "compatible";
        case Verdict::Incompatible: return "incompatible";
        case Verdict::Unanalyzed: return "unanalyzed";
    }
    return "unanalyzed";
}

Classifier Classifier::load(const fs::path& classes_json) {
    return from_json(read_text_file(classes_json));
}

Classifier Classifier::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("license class table is not valid JSON: ") + e.what());
    }
    Classifier c;
    if (doc.contains("aliases")) {
        for (auto it = doc["aliases"].begin(); it != doc["aliases"].end(); ++it) {
            c.aliases_[to_lower(it.key())] = it.value().get<std::string>();
        }
    }
    if (!doc.contains("tokens") || !doc["tokens"].is_object() || doc["tokens"].empty()) {
        throw Error("license class table needs a non-empty 'tokens' object");
    }
    for (auto it = doc["tokens"].begin(); it != doc["tokens"].end(); ++it) {
        auto cat = category_from_string(it.value().get<std::string>());
        if (!cat) {
            throw Error("unknown license category '" + it.value().get<std::string>() +
                        "' for token '" + it.key() + "'");
        }
        c.tokens_[it.key()] = *cat;
    }
    return c;
}

Class Classifier::classify(const std::optional<std::string>& raw) const {
    if (!raw) return {"no-license", Category::NoLicense};
    std::string s = to_lower(trim(*raw));
    if (s.empty()) return {"no-license", Category::NoLicense};
    if (contains(s, " or ") || contains(s, " and ")) {
        return {"multiple", Category::Multiple};
    }
    auto alias = aliases_.find(s);
    if (alias != aliases_.end()) s = alias->second;
    auto tok = tokens_.find(s);
    if (tok != tokens_.end()) return {s, tok->second};
    return {s, Category::Other};
}

Matrix Matrix::load(const fs::path& matrix_json) {
    return from_json(read_text_file(matrix_json));
}

Matrix Matrix::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("compatibility matrix is not valid JSON: ") + e.what());
    }
    Matrix m;
    for (const auto& entry : doc.value("category_defaults", json::array())) {
        auto up = category_from_string(entry.at("upstream").get<std::string>());
        auto down = category_from_string(entry.at("downstream").get<std::string>());
        auto verdict = verdict_from_string(entry.at("verdict").get<std::string>());
        if (!up || !down || !verdict) throw Error("bad category default entry");
        m.category_defaults_[{*up, *down}] = {*verdict, entry.value("reason", "")};
    }
    for (const auto& entry : doc.value("pair_overrides", json::array())) {
        std::string up = entry.at("upstream").get<std::string>();
        std::string down = entry.at("downstream").get<std::string>();
        auto verdict = verdict_from_string(entry.at("verdict").get<std::string>());
        if (up.empty() || down.empty() || !verdict) throw Error("bad pair override entry");
        m.pair_overrides_[{up, down}] = {*verdict, entry.value("reason", "")};
    }
    return m;
}

VerdictResult Matrix::check(const Class& upstream, const Class& downstream) const {
    auto analyzable = [](const Class& c) {
        return c.category != Category::NoLicense && c.category != Category::Multiple &&
               c.category != Category::Other;
    };
    if (!analyzable(upstream) || !analyzable(downstream)) {
        std::string side = !analyzable(upstream) ? "upstream" : "downstream";
        return {Verdict::Unanalyzed,
                side + " license class is outside the analyzed set"};
    }
    if (upstream.token == downstream.token) {
        return {Verdict::Compatible, "identical license"};
    }
    auto pair = pair_overrides_.find({upstream.token, downstream.token});
    if (pair != pair_overrides_.end()) return pair->second;
    auto byCat = category_defaults_.find({upstream.category, downstream.category});
    if (byCat != category_defaults_.end()) return byCat->second;
    return {Verdict::Unanalyzed, "no rule for this license pair"};
}

namespace {

// Lowercases, drops punctuation and digits, and removes lines that carry a
// copyright notice, which varies per project.
std::vector<std::string> fingerprint_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::string low = to_lower(line);
        if (contains(low, "copyright")) continue;
        std::string clean;
        for (char ch : low) {
            if (std::isalpha(static_cast<unsigned char>(ch))) {
                clean += ch;
            } else {
                clean += ' ';
            }
        }
        for (const auto& w : split_words(clean)) words.push_back(w);
    }
    return words;
}

std::set<std::string> shingles(const std::vector<std::string>& words) {
    constexpr size_t kSize = 6;
    std::set<std::string> out;
    if (words.size() < kSize) return out;
    for (size_t i = 0; i + kSize <= words.size(); ++i) {
        std::string s;
        for (size_t k = 0; k < kSize; ++k) {
            if (k) s += ' ';
            s += words[i + k];
        }
        out.insert(std::move(s));
    }
    return out;
}

}  // namespace

Fingerprints Fingerprints::load(const fs::path& texts_dir) {
    struct Loaded {
        std::string token;
        std::set<std::string> shingles;
    };
    std::vector<Loaded> loaded;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(texts_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        Loaded l;
        l.token = file.stem().string();
        l.shingles = shingles(fingerprint_words(read_text_file(file)));
        loaded.push_back(std::move(l));
    }
    if (loaded.empty()) throw Error("no reference license texts in " + texts_dir.string());

    Fingerprints fp;
    for (size_t i = 0; i < loaded.size(); ++i) {
        Reference ref;
        ref.token = loaded[i].token;
        for (const auto& s : loaded[i].shingles) {
            bool shared = false;
            for (size_t k = 0; k < loaded.size(); ++k) {
                if (k != i && loaded[k].shingles.count(s)) {
                    shared = true;
                    break;
                }
            }
            if (!shared) ref.distinctive.insert(s);
        }
        if (ref.distinctive.empty()) {
            throw Error("reference text '" + ref.token +
                        "' has no distinctive shingles against the others");
        }
        fp.references_.push_back(std::move(ref));
    }
    return fp;
}

std::optional<std::string> Fingerprints::match(const std::string& text) const {
    std::set<std::string> candidate = shingles(fingerprint_words(text));
    const Reference* best = nullptr;
    double best_ratio = 0.0;
    for (const auto& ref : references_) {
        size_t hit = 0;
        for (const auto& s : ref.distinctive) {
            if (candidate.count(s)) ++hit;
        }
        double ratio = static_cast<double>(hit) / static_cast<double>(ref.distinctive.size());
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = &ref;
        }
    }
    if (best && best_ratio >= 0.9) return best->token;
    return std::nullopt;
}

Class detect_repo_license(const fs::path& repo_dir, const Fingerprints& fingerprints,
                          const Classifier& classifier) {
    static const std::vector<std::string> kNames = {"license", "license.txt", "license.md",
                                                    "copying", "copying.txt"};
    std::vector<fs::path> candidates;
    if (fs::exists(repo_dir)) {
        for (const auto& entry : fs::directory_iterator(repo_dir)) {
            if (!entry.is_regular_file()) continue;
            std::string name = to_lower(entry.path().filename().string());
            for (const auto& k : kNames) {
                if (name == k) {
                    candidates.push_back(entry.path());
                    break;
                }
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    if (candidates.empty()) return {"no-license", Category::NoLicense};

    std::set<std::string> tokens;
    for (const auto& file : candidates) {
        auto token = fingerprints.match(read_text_file(file));
        tokens.insert(token.value_or("unrecognized"));
    }
    if (tokens.size() > 1) return {"multiple", Category::Multiple};
    const std::string& only = *tokens.begin();
    if (only == "unrecognized") return {only, Category::Other};
    return classifier.classify(only);
}

FlowReport license_flows(const store::Store& store, const Classifier& classifier,
                         const Matrix& matrix) {
    std::unordered_map<std::int64_t, Class> ptm_class;
    for (const auto& p : store.all_ptms()) {
        ptm_class[p.id] = classifier.classify(p.license_raw);
    }
    std::unordered_map<std::int64_t, Class> repo_class;
    for (const auto& r : store.all_repos()) {
        repo_class[r.id] = classifier.classify(r.license_raw);
    }

    struct Agg {
        Class up;
        Class down;
        int count = 0;
    };
    std::map<std::pair<std::string, std::string>, Agg> groups;
    int total = 0;
    int identical = 0;
    int no_license_down = 0;
    for (const auto& link : store.all_links()) {
        const Class& up = ptm_class[link.ptm_id];
        const Class& down = repo_class[link.repo_id];
        Agg& agg = groups[{up.token, down.token}];
        agg.up = up;
        agg.down = down;
        ++agg.count;
        ++total;
        bool up_analyzable = up.category != Category::NoLicense &&
                             up.category != Category::Multiple &&
                             up.category != Category::Other;
        if (up_analyzable && up.token == down.token) ++identical;
        if (down.category == Category::NoLicense) ++no_license_down;
    }

    FlowReport report;
    report.total_links = total;
    int incompatible = 0;
    int unanalyzed = 0;
    for (const auto& [key, agg] : groups) {
        FlowRow row;
        row.ptm_license = key.first;
        row.repo_license = key.second;
        row.count = agg.count;
        VerdictResult v = matrix.check(agg.up, agg.down);
        row.verdict = v.verdict;
        row.reason = v.reason;
        if (v.verdict == Verdict::Incompatible) incompatible += agg.count;
        if (v.verdict == Verdict::Unanalyzed) unanalyzed += agg.count;
        report.rows.push_back(std::move(row));
    }
    if (total > 0) {
        report.identical_pct = 100.0 * identical / total;
        report.incompatible_pct = 100.0 * incompatible / total;
        report.unanalyzed_pct = 100.0 * unanalyzed / total;
        report.no_license_downstream_pct = 100.0 * no_license_down / total;
    }
    return report;
}

}  // namespace ptmchain::license
