#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptmchain {

enum class Registry { HuggingFace, PyTorchHub };

std::string to_string(Registry r);
std::optional<Registry> registry_from_string(const std::string& s);

/// One pre-trained-model package as known to a registry.
struct PtmPackage {
    std::int64_t id = 0;
    Registry registry = Registry::HuggingFace;
    std::string name;                          // canonical registry name, e.g. "owner/model"
    std::int64_t downloads = 0;                // >= 0
    std::optional<std::string> license_raw;
    std::vector<std::string> tags;
    std::optional<std::string> card;           // model-card markdown
    std::optional<std::string> created_at;     // ISO-8601 UTC, e.g. "2023-01-14T08:00:00Z"
    std::optional<std::string> snapshot_ref;
    std::string extra_blob;                    // serialized JSON object of off-schema fields
};

/// One application-side source repository.
struct Repository {
    std::int64_t id = 0;
    std::string host = "github";
    std::string full_name;                     // "owner/name", exactly one '/'
    std::int64_t stars = 0;                    // >= 0
    std::optional<std::string> license_raw;
    std::optional<std::string> scanned_commit;
};

enum class MatchStrength { Exact, CaseInsensitive };

std::string to_string(MatchStrength s);
std::optional<MatchStrength> match_strength_from_string(const std::string& s);

/// Dependency edge: an application repository loads a PTM.
struct PtmAppLink {
    std::int64_t id = 0;
    std::int64_t repo_id = 0;
    std::int64_t ptm_id = 0;
    MatchStrength strength = MatchStrength::Exact;
    std::vector<std::int64_t> evidence;        // UsageRecord ids, never empty
};

/// Dependency edge: a PTM declares an upstream base model.
struct PtmPtmLink {
    std::int64_t id = 0;
    std::int64_t child_ptm_id = 0;
    std::string base_model_name;               // non-empty
    std::optional<std::int64_t> resolved_base_id;
};

/// A confirmed PTM-loading call site. A missing model_name means the
/// name could not be determined statically (Dynamic).
struct UsageRecord {
    std::int64_t id = 0;
    std::int64_t repo_id = 0;
    std::string file;
    int line = 1;
    std::string signature_id;
    std::string library;
    std::optional<std::string> model_name;
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ptmchain
