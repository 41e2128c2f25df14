#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ptmchain/stats.hpp"
#include "ptmchain/strings.hpp"

namespace ptmchain::stats {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::map<std::string, int> counts_to_map(const std::vector<std::string>& keys) {
    std::map<std::string, int> counts;
    for (const auto& k : keys) ++counts[k];
    return counts;
}

std::vector<RatioRow> to_ratio_rows(const std::map<std::string, int>& counts) {
    int total = 0;
    for (const auto& [key, n] : counts) total += n;
    std::vector<RatioRow> rows;
    for (const auto& [key, n] : counts) {
        rows.push_back({key, n, static_cast<double>(n) / static_cast<double>(total)});
    }
    std::sort(rows.begin(), rows.end(), [](const RatioRow& a, const RatioRow& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.key < b.key;
    });
    return rows;
}

std::optional<json> parse_payload(const store::ExtractedMetadata& meta) {
    json doc = json::parse(meta.payload_json, nullptr, false);
    if (!doc.is_object()) return std::nullopt;
    return doc;
}

std::map<std::int64_t, store::ExtractedMetadata> metadata_by_ptm(store::Store& store) {
    std::map<std::int64_t, store::ExtractedMetadata> out;
    for (auto& row : store.all_metadata()) out.emplace(row.ptm_id, std::move(row));
    return out;
}

/// "2023-01-14T08:00:00Z" -> month index 2023*12 + 0. Anything that does
/// not open with YYYY-MM is rejected.
std::optional<int> month_index(const std::string& created_at) {
    if (created_at.size() < 7 || created_at[4] != '-') return std::nullopt;
    for (int i : {0, 1, 2, 3, 5, 6}) {
        if (!std::isdigit(static_cast<unsigned char>(created_at[i]))) {
            return std::nullopt;
        }
    }
    int year = std::stoi(created_at.substr(0, 4));
    int month = std::stoi(created_at.substr(5, 2));
    if (month < 1 || month > 12) return std::nullopt;
    return year * 12 + (month - 1);
}

std::string month_label(int index) {
    int year = index / 12;
    int month = index % 12 + 1;
    char buf[8];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

bool digits_only(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

DomainMap DomainMap::load(const std::filesystem::path& domains_json) {
    std::ifstream in(domains_json, std::ios::binary);
    if (!in) throw Error("cannot open " + domains_json.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

DomainMap DomainMap::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("domain map is not valid JSON: ") + e.what());
    }
    if (!doc.contains("tags") || !doc["tags"].is_object()) {
        throw Error("domain map needs a 'tags' object");
    }
    DomainMap map;
    for (auto it = doc["tags"].begin(); it != doc["tags"].end(); ++it) {
        if (!it.value().is_string() || it.value().get<std::string>().empty()) {
            throw Error("domain map tag '" + it.key() + "' must name a domain");
        }
        map.tags_[to_lower(it.key())] = it.value().get<std::string>();
    }
    return map;
}

std::optional<std::string> DomainMap::domain_for_tag(const std::string& tag) const {
    auto it = tags_.find(to_lower(trim(tag)));
    if (it == tags_.end()) return std::nullopt;
    return it->second;
}

std::string domain_of(const PtmPackage& ptm,
                      const std::optional<store::ExtractedMetadata>& meta,
                      const DomainMap& map) {
    if (meta) {
        if (auto doc = parse_payload(*meta)) {
            if (doc->contains("domain") && (*doc)["domain"].is_string()) {
                std::string d = to_lower(trim((*doc)["domain"].get<std::string>()));
                if (!d.empty()) return d;
            }
        }
    }
    for (const auto& tag : ptm.tags) {
        if (auto d = map.domain_for_tag(tag)) return *d;
    }
    return "other";
}

std::vector<RatioRow> domain_ratios(store::Store& store, const DomainMap& map) {
    auto meta = metadata_by_ptm(store);
    std::vector<std::string> domains;
    for (const auto& ptm : store.all_ptms()) {
        auto it = meta.find(ptm.id);
        std::optional<store::ExtractedMetadata> row;
        if (it != meta.end()) row = it->second;
        domains.push_back(domain_of(ptm, row, map));
    }
    if (domains.empty()) return {};
    return to_ratio_rows(counts_to_map(domains));
}

std::vector<RatioRow> downstream_domain_ratios(store::Store& store,
                                               const DomainMap& map) {
    auto meta = metadata_by_ptm(store);
    std::map<std::int64_t, std::string> domain_cache;
    for (const auto& ptm : store.all_ptms()) {
        auto it = meta.find(ptm.id);
        std::optional<store::ExtractedMetadata> row;
        if (it != meta.end()) row = it->second;
        domain_cache[ptm.id] = domain_of(ptm, row, map);
    }
    std::vector<std::string> domains;
    for (const auto& link : store.all_links()) {
        auto it = domain_cache.find(link.ptm_id);
        if (it != domain_cache.end()) domains.push_back(it->second);
    }
    if (domains.empty()) return {};
    return to_ratio_rows(counts_to_map(domains));
}

std::vector<TimelinePoint> monthly_timeline(store::Store& store) {
    std::map<int, int> counts;
    for (const auto& ptm : store.all_ptms()) {
        if (!ptm.created_at) continue;
        if (auto idx = month_index(*ptm.created_at)) ++counts[*idx];
    }
    if (counts.empty()) return {};
    int lo = counts.begin()->first;
    int hi = counts.rbegin()->first;
    std::vector<TimelinePoint> out;
    for (int i = lo; i <= hi; ++i) {
        auto it = counts.find(i);
        out.push_back({month_label(i), it == counts.end() ? 0 : it->second});
    }
    return out;
}

ParamStats parameter_count_median(store::Store& store) {
    std::vector<std::int64_t> values;
    for (const auto& row : store.all_metadata()) {
        auto doc = parse_payload(row);
        if (!doc || !doc->contains("parameter_count")) continue;
        const json& v = (*doc)["parameter_count"];
        if (v.is_number_integer()) {
            if (v.get<std::int64_t>() >= 0) values.push_back(v.get<std::int64_t>());
        } else if (v.is_string() && digits_only(trim(v.get<std::string>()))) {
            values.push_back(std::stoll(trim(v.get<std::string>())));
        }
    }
    ParamStats stats;
    stats.counted = static_cast<int>(values.size());
    if (values.empty()) return stats;
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        stats.median = static_cast<double>(values[mid]);
    } else {
        stats.median =
            (static_cast<double>(values[mid - 1]) + static_cast<double>(values[mid])) /
            2.0;
    }
    return stats;
}

std::vector<AvailabilityRow> field_availability(store::Store& store,
                                                const card::Schema& schema) {
    std::vector<json> payloads;
    for (const auto& row : store.all_metadata()) {
        if (auto doc = parse_payload(row)) payloads.push_back(std::move(*doc));
    }
    std::vector<AvailabilityRow> out;
    for (const auto& field : schema.fields()) {
        AvailabilityRow row;
        row.field = field.name;
        row.total = static_cast<int>(payloads.size());
        for (const auto& payload : payloads) {
            if (payload.contains(field.name) &&
                card::field_has_value(payload[field.name])) {
                ++row.filled;
            }
        }
        row.ratio = row.total == 0 ? 0.0
                                   : static_cast<double>(row.filled) /
                                         static_cast<double>(row.total);
        out.push_back(std::move(row));
    }
    return out;
}

ordered_json full_report(store::Store& store, const DomainMap& map,
                         const card::Schema& schema) {
    ordered_json report = ordered_json::object();

    auto ratio_array = [](const std::vector<RatioRow>& rows) {
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            arr.push_back({{"key", r.key}, {"count", r.count}, {"ratio", r.ratio}});
        }
        return arr;
    };
    report["domains"] = ratio_array(domain_ratios(store, map));
    report["downstream"] = ratio_array(downstream_domain_ratios(store, map));

    ordered_json timeline = ordered_json::array();
    for (const auto& point : monthly_timeline(store)) {
        timeline.push_back({{"month", point.month}, {"count", point.count}});
    }
    report["timeline"] = timeline;

    ParamStats params = parameter_count_median(store);
    report["params"] = {{"counted", params.counted}, {"median", params.median}};

    ordered_json availability = ordered_json::array();
    for (const auto& row : field_availability(store, schema)) {
        availability.push_back({{"field", row.field},
                                {"filled", row.filled},
                                {"total", row.total},
                                {"ratio", row.ratio}});
    }
    report["availability"] = availability;
    return report;
}

}  // namespace ptmchain::stats
