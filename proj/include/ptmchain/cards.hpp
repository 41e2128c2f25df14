#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptmchain/client.hpp"
#include "ptmchain/store.hpp"

namespace ptmchain::card {

/// Contiguous byte range of the source text. Concatenating all chunks in
/// order reproduces the text exactly.
struct Chunk {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    std::string header_path;  // "Model Details > Training" style breadcrumb

    std::string text_of(const std::string& source) const {
        return source.substr(begin, end - begin);
    }
};

/// Splits markdown into chunks of at most `max_words` words, breaking at
/// headers first (fenced code blocks shield '#' lines), then blank lines,
/// then lines, then word runs. Lossless and deterministic.
std::vector<Chunk> split_markdown(const std::string& text, std::size_t max_words = 120);

/// ceil(words * 4 / 3): the planning estimate for completion budgets.
std::size_t token_estimate(const std::string& text);

/// Ranks chunks by overlap between the query's word set and the chunk's,
/// measured as |query AND chunk| / |query|. Ties keep document order.
std::vector<const Chunk*> retrieve(const std::vector<Chunk>& chunks,
                                   const std::string& source,
                                   const std::string& query, std::size_t k);

enum class FieldType { String, StringList, Object, Integer };

struct FieldSpec {
    std::string name;
    FieldType type = FieldType::String;
    int group = 1;             // 1 = most available in the wild
    std::string description;
    std::string query;         // retrieval terms
};

class Schema {
public:
    static Schema load(const std::filesystem::path& schema_json);
    static Schema from_json(const std::string& text);

    const std::vector<FieldSpec>& fields() const { return fields_; }
    const FieldSpec* field(const std::string& name) const;
    std::vector<int> groups() const;  // ascending, distinct
    std::vector<const FieldSpec*> fields_in_group(int group) const;

    /// A payload with every field present and empty.
    nlohmann::ordered_json empty_payload() const;

private:
    std::vector<FieldSpec> fields_;
};

/// True when the value counts as filled for availability and merging:
/// non-blank string, non-empty array or object, or any number.
bool field_has_value(const nlohmann::json& value);

/// Renders the prompt template, substituting {{fields}} with one line per
/// requested field and {{context}} with the document excerpt.
std::string build_prompt(const std::string& prompt_template,
                         const std::vector<const FieldSpec*>& fields,
                         const std::string& context);

struct Violation {
    std::string field;
    std::string message;
};

/// Checks a payload against the schema: unknown fields, type mismatches,
/// and out-of-range values are reported, one violation per finding.
/// parameter_count accepts an integer or a digit string.
std::vector<Violation> validate_schema(const nlohmann::json& payload, const Schema& schema);

struct ExtractionResult {
    nlohmann::ordered_json payload;     // every schema field, empty when unknown
    std::vector<Violation> violations;
    std::string mode;                   // "cheap", "accurate" or "cheap-fallback"
    int requests = 0;
};

struct ExtractOptions {
    std::string prompt_template;
    std::string model;
    std::size_t cheap_budget = 4096;
    std::size_t accurate_budget = 128000;
    std::size_t max_chunk_words = 120;
    std::size_t retrieve_k = 6;
};

/// One request per field group, context assembled from retrieved chunks so
/// the token estimate of every sent prompt stays within the cheap budget.
/// Group answers merge field-wise; the first filled value in group order
/// wins. A failed or unparseable response contributes nothing but is noted.
ExtractionResult extract_cheap(const std::string& card_text, const Schema& schema,
                               CompletionClient& client, const ExtractOptions& options);

/// Single whole-document request when the full prompt fits the accurate
/// budget; otherwise falls back to the cheap path with mode
/// "cheap-fallback".
ExtractionResult extract_accurate(const std::string& card_text, const Schema& schema,
                                  CompletionClient& client, const ExtractOptions& options);

using Clock = std::function<std::string()>;

/// ISO-8601 UTC wall clock; tests inject a fixed value instead.
std::string utc_now_iso();

struct ExtractRunStats {
    int cards_processed = 0;
    int rows_written = 0;    // rows that changed (new or updated payload)
    int requests = 0;
    int violations = 0;
};

/// Runs extraction for every package that has a card and persists the
/// payloads. Unchanged payloads do not touch the stored timestamp.
ExtractRunStats extract_all(store::Store& store, const Schema& schema,
                            CompletionClient& client, const ExtractOptions& options,
                            bool accurate, const Clock& clock = utc_now_iso);

struct AccuracyReport {
    int compared = 0;   // fields filled on either side
    int matched = 0;
    double accuracy = 0.0;
    std::vector<std::string> mismatches;  // "field: extracted != gold" notes
};

/// Field-wise agreement between an extracted payload and a hand-labeled
/// one. Strings compare after trimming, lists as multisets, numbers
/// numerically (digit strings count as numbers).
AccuracyReport evaluate_accuracy(const nlohmann::json& extracted,
                                 const nlohmann::json& gold, const Schema& schema);

/// Pooled accuracy over a labeled sample.
AccuracyReport evaluate_sample(
    const std::vector<std::pair<nlohmann::json, nlohmann::json>>& pairs,
    const Schema& schema);

}  // namespace ptmchain::card
