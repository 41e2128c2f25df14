#pragma once

#include <string>

#include "ptmchain/store.hpp"
#include "ptmchain/types.hpp"

namespace ptmchain::mapping {

/// Trims whitespace and one layer of symmetric quotes.
std::string normalize_name(const std::string& raw);

/// Registry a library's model names resolve against.
Registry registry_for_library(const std::string& library);

struct MapStats {
    int links = 0;
    int distinct_repos = 0;
    int distinct_ptms = 0;
    int unmatched_names = 0;   // distinct (registry, name) pairs
    int dynamic_usages = 0;    // usage records with no static name
};

/// Rebuilds application-to-package links from the stored usage records.
/// An exact name match links with Exact strength; a unique case-insensitive
/// match links with CaseInsensitive; ambiguous and unknown names land in the
/// unmatched table with their occurrence counts. Rerunning on unchanged
/// data is a no-op.
MapStats map_dependencies(store::Store& store);

struct PtmPtmStats {
    int links = 0;
    int resolved = 0;
};

/// Rebuilds package-to-package edges from the extracted base-model fields.
/// Resolution stays inside the child's registry; a self-reference stays
/// unresolved.
PtmPtmStats derive_ptm_ptm_links(store::Store& store);

}  // namespace ptmchain::mapping
