#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ptmchain/store.hpp"

namespace ptmchain::license {

enum class Category {
    Permissive,
    WeakCopyleft,
    StrongCopyleft,
    PublicDomain,
    Rail,
    Other,
    NoLicense,
    Multiple,
};

std::string to_string(Category c);

struct Class {
    std::string token;   // canonical identifier, e.g. "apache-2.0"
    Category category = Category::Other;
};

/// Maps raw license strings to canonical classes via an alias table and a
/// token table loaded from JSON. Absent or blank input is NoLicense; an
/// OR/AND expression is Multiple; an unknown token keeps its normalized
/// spelling with category Other.
class Classifier {
public:
    static Classifier load(const std::filesystem::path& classes_json);
    static Classifier from_json(const std::string& text);

    Class classify(const std::optional<std::string>& raw) const;

private:
    std::unordered_map<std::string, std::string> aliases_;
    std::unordered_map<std::string, Category> tokens_;
};

enum class Verdict { Compatible, Incompatible, Unanalyzed };

std::string to_string(Verdict v);

struct VerdictResult {
    Verdict verdict = Verdict::Unanalyzed;
    std::string reason;
};

/// Direction-sensitive compatibility: `upstream` is the package license,
/// `downstream` the application license. Token-pair overrides beat category
/// defaults; identical analyzable tokens are always compatible; NoLicense,
/// Multiple and Other stay unanalyzed.
class Matrix {
public:
    static Matrix load(const std::filesystem::path& matrix_json);
    static Matrix from_json(const std::string& text);

    VerdictResult check(const Class& upstream, const Class& downstream) const;

private:
    std::map<std::pair<std::string, std::string>, VerdictResult> pair_overrides_;
    std::map<std::pair<Category, Category>, VerdictResult> category_defaults_;
};

/// Reference-text matcher. A candidate matches a reference when at least
/// 90% of the reference's distinctive 6-word shingles occur in it.
class Fingerprints {
public:
    /// Loads every "<token>.txt" in the directory as a reference.
    static Fingerprints load(const std::filesystem::path& texts_dir);

    std::optional<std::string> match(const std::string& text) const;

    size_t reference_count() const { return references_.size(); }

private:
    struct Reference {
        std::string token;
        std::set<std::string> distinctive;  // shingles unique to this reference
    };
    std::vector<Reference> references_;
};

/// Looks for LICENSE/COPYING files (case-insensitive, optional .txt/.md) in
/// the repository root. No file means NoLicense; files naming more than one
/// distinct license mean Multiple; an unmatched text is Other.
Class detect_repo_license(const std::filesystem::path& repo_dir,
                          const Fingerprints& fingerprints,
                          const Classifier& classifier);

struct FlowRow {
    std::string ptm_license;    // canonical token of the package side
    std::string repo_license;   // canonical token of the application side
    int count = 0;
    Verdict verdict = Verdict::Unanalyzed;
    std::string reason;
};

struct FlowReport {
    std::vector<FlowRow> rows;  // ordered by (ptm_license, repo_license)
    int total_links = 0;
    double identical_pct = 0.0;            // same analyzable token both sides
    double incompatible_pct = 0.0;
    double unanalyzed_pct = 0.0;
    double no_license_downstream_pct = 0.0;
};

/// Aggregates every stored application link into license-pair flows.
/// Percentages are over all links; a link with no recorded license on one
/// side still counts, flowing through the no-license class.
FlowReport license_flows(const store::Store& store, const Classifier& classifier,
                         const Matrix& matrix);

}  // namespace ptmchain::license
