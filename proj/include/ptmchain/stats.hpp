#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptmchain/cards.hpp"
#include "ptmchain/store.hpp"
#include "ptmchain/types.hpp"

namespace ptmchain::stats {

/// Registry-tag to domain lookup, e.g. "fill-mask" -> "nlp".
class DomainMap {
public:
    static DomainMap load(const std::filesystem::path& domains_json);
    static DomainMap from_json(const std::string& text);

    std::optional<std::string> domain_for_tag(const std::string& tag) const;
    std::size_t size() const { return tags_.size(); }

private:
    std::map<std::string, std::string> tags_;
};

/// Domain of one package: the extracted "domain" field when filled, else
/// the first tag with a known mapping, else "other".
std::string domain_of(const PtmPackage& ptm,
                      const std::optional<store::ExtractedMetadata>& meta,
                      const DomainMap& map);

struct RatioRow {
    std::string key;
    int count = 0;
    double ratio = 0.0;
};

/// Share of each domain over all stored packages. Rows sort by count
/// descending, then key.
std::vector<RatioRow> domain_ratios(store::Store& store, const DomainMap& map);

/// Share of each domain over app-to-PTM links, so a package used by many
/// applications weighs more. Same ordering as domain_ratios.
std::vector<RatioRow> downstream_domain_ratios(store::Store& store,
                                               const DomainMap& map);

struct TimelinePoint {
    std::string month;  // "YYYY-MM", UTC
    int count = 0;
};

/// Packages created per calendar month, zero-filled from the earliest to
/// the latest observed month. Packages without a parseable created_at are
/// left out.
std::vector<TimelinePoint> monthly_timeline(store::Store& store);

struct ParamStats {
    int counted = 0;
    double median = 0.0;  // mean of the middle two when counted is even
};

/// Median of the extracted parameter_count values. Digit strings count.
ParamStats parameter_count_median(store::Store& store);

struct AvailabilityRow {
    std::string field;
    int filled = 0;
    int total = 0;      // packages with an extraction row
    double ratio = 0.0;
};

/// How often each schema field came back filled, over all packages that
/// have an extraction row. One row per field, in schema order.
std::vector<AvailabilityRow> field_availability(store::Store& store,
                                                const card::Schema& schema);

/// Everything above as one JSON document, keys: domains, downstream,
/// timeline, params, availability.
nlohmann::ordered_json full_report(store::Store& store, const DomainMap& map,
                                   const card::Schema& schema);

}  // namespace ptmchain::stats
