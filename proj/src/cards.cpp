#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ptmchain/cards.hpp"
#include "ptmchain/strings.hpp"

namespace ptmchain::card {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<FieldType> field_type_from_string(const std::string& s) {
    if (s == "string") return FieldType::String;
    if (s == "string_list") return FieldType::StringList;
    if (s == "object") return FieldType::Object;
    if (s == "integer") return FieldType::Integer;
    return std::nullopt;
}

const char* prompt_type_name(FieldType t) {
    switch (t) {
        case FieldType::String: return "text";
        case FieldType::StringList: return "list of strings";
        case FieldType::Object: return "table of name to value";
        case FieldType::Integer: return "number";
    }
    return "text";
}

std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool digits_only(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

Schema Schema::load(const std::filesystem::path& schema_json) {
    return from_json(read_text_file(schema_json));
}

Schema Schema::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("metadata schema is not valid JSON: ") + e.what());
    }
    if (!doc.contains("fields") || !doc["fields"].is_array() || doc["fields"].empty()) {
        throw Error("metadata schema needs a non-empty 'fields' array");
    }
    Schema schema;
    std::set<std::string> seen;
    for (const auto& f : doc["fields"]) {
        FieldSpec spec;
        spec.name = f.value("name", "");
        if (spec.name.empty()) throw Error("metadata field with empty name");
        if (!seen.insert(spec.name).second) {
            throw Error("duplicate metadata field '" + spec.name + "'");
        }
        auto type = field_type_from_string(f.value("type", ""));
        if (!type) throw Error("field '" + spec.name + "': unknown type");
        spec.type = *type;
        spec.group = f.value("group", 0);
        if (spec.group < 1) throw Error("field '" + spec.name + "': group must be >= 1");
        spec.description = f.value("description", "");
        spec.query = f.value("query", "");
        schema.fields_.push_back(std::move(spec));
    }
    return schema;
}

const FieldSpec* Schema::field(const std::string& name) const {
    for (const auto& f : fields_) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

std::vector<int> Schema::groups() const {
    std::set<int> groups;
    for (const auto& f : fields_) groups.insert(f.group);
    return {groups.begin(), groups.end()};
}

std::vector<const FieldSpec*> Schema::fields_in_group(int group) const {
    std::vector<const FieldSpec*> out;
    for (const auto& f : fields_) {
        if (f.group == group) out.push_back(&f);
    }
    return out;
}

ordered_json Schema::empty_payload() const {
    ordered_json payload = ordered_json::object();
    for (const auto& f : fields_) {
        switch (f.type) {
            case FieldType::String: payload[f.name] = ""; break;
            case FieldType::StringList: payload[f.name] = json::array(); break;
            case FieldType::Object: payload[f.name] = json::object(); break;
            case FieldType::Integer: payload[f.name] = nullptr; break;
        }
    }
    return payload;
}

bool field_has_value(const json& value) {
    if (value.is_null()) return false;
    if (value.is_string()) return !trim(value.get<std::string>()).empty();
    if (value.is_array() || value.is_object()) return !value.empty();
    return value.is_number() || value.is_boolean();
}

std::string build_prompt(const std::string& prompt_template,
                         const std::vector<const FieldSpec*>& fields,
                         const std::string& context) {
    if (!contains(prompt_template, "{{fields}}") ||
        !contains(prompt_template, "{{context}}")) {
        throw Error("prompt template must contain {{fields}} and {{context}}");
    }
    std::string field_lines;
    for (const auto* f : fields) {
        field_lines += "- " + f->name + " (" + prompt_type_name(f->type) + "): " +
                       f->description + "\n";
    }
    std::string out = prompt_template;
    auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
        size_t pos = 0;
        while ((pos = s.find(from, pos)) != std::string::npos) {
            s.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all(out, "{{fields}}", field_lines);
    replace_all(out, "{{context}}", context);
    return out;
}

std::vector<Violation> validate_schema(const json& payload, const Schema& schema) {
    std::vector<Violation> out;
    if (!payload.is_object()) {
        out.push_back({"", "payload must be a JSON object"});
        return out;
    }
    for (auto it = payload.begin(); it != payload.end(); ++it) {
        const FieldSpec* spec = schema.field(it.key());
        if (!spec) {
            out.push_back({it.key(), "unknown field"});
            continue;
        }
        const json& v = it.value();
        if (v.is_null()) continue;  // null reads as empty for any type
        switch (spec->type) {
            case FieldType::String:
                if (!v.is_string()) out.push_back({spec->name, "expected a string"});
                break;
            case FieldType::StringList: {
                if (!v.is_array()) {
                    out.push_back({spec->name, "expected an array of strings"});
                    break;
                }
                for (const auto& item : v) {
                    if (!item.is_string()) {
                        out.push_back({spec->name, "expected an array of strings"});
                        break;
                    }
                }
                break;
            }
            case FieldType::Object: {
                if (!v.is_object()) {
                    out.push_back({spec->name, "expected an object"});
                    break;
                }
                for (auto inner = v.begin(); inner != v.end(); ++inner) {
                    if (!inner.value().is_primitive()) {
                        out.push_back({spec->name, "expected scalar entries"});
                        break;
                    }
                }
                break;
            }
            case FieldType::Integer: {
                if (v.is_number_integer()) {
                    if (v.get<std::int64_t>() < 0) {
                        out.push_back({spec->name, "non-negative required"});
                    }
                } else if (v.is_string()) {
                    if (!digits_only(trim(v.get<std::string>()))) {
                        out.push_back(
                            {spec->name, "expected an integer or a digit string"});
                    }
                } else {
                    out.push_back({spec->name, "expected an integer or a digit string"});
                }
                break;
            }
        }
    }
    return out;
}

namespace {

// Models often wrap JSON in prose or fences; take the outermost brace pair.
std::optional<json> parse_response_object(const std::string& text) {
    size_t start = text.find('{');
    size_t end = text.rfind('}');
    if (start == std::string::npos || end == std::string::npos || end < start) {
        return std::nullopt;
    }
    json doc = json::parse(text.substr(start, end - start + 1), nullptr, false);
    if (!doc.is_object()) return std::nullopt;
    return doc;
}

bool value_is_type_valid(const json& v, const FieldSpec& spec) {
    switch (spec.type) {
        case FieldType::String: return v.is_string();
        case FieldType::StringList: {
            if (!v.is_array()) return false;
            for (const auto& item : v) {
                if (!item.is_string()) return false;
            }
            return true;
        }
        case FieldType::Object: {
            if (!v.is_object()) return false;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!it.value().is_primitive()) return false;
            }
            return true;
        }
        case FieldType::Integer:
            if (v.is_number_integer()) return v.get<std::int64_t>() >= 0;
            if (v.is_string()) return digits_only(trim(v.get<std::string>()));
            return false;
    }
    return false;
}

void merge_response(ordered_json& payload, const json& parsed, const Schema& schema,
                    std::vector<Violation>& violations) {
    for (auto it = parsed.begin(); it != parsed.end(); ++it) {
        const FieldSpec* spec = schema.field(it.key());
        if (!spec) {
            violations.push_back({it.key(), "unknown field in response, dropped"});
            continue;
        }
        if (!field_has_value(it.value())) continue;
        if (!value_is_type_valid(it.value(), *spec)) {
            violations.push_back({spec->name, "ill-typed value in response, dropped"});
            continue;
        }
        if (!field_has_value(payload[spec->name])) {
            payload[spec->name] = it.value();
        }
    }
}

}  // namespace

ExtractionResult extract_cheap(const std::string& card_text, const Schema& schema,
                               CompletionClient& client, const ExtractOptions& options) {
    ExtractionResult result;
    result.mode = "cheap";
    result.payload = schema.empty_payload();

    std::vector<Chunk> chunks = split_markdown(card_text, options.max_chunk_words);

    for (int group : schema.groups()) {
        auto fields = schema.fields_in_group(group);
        std::string skeleton = build_prompt(options.prompt_template, fields, "");
        std::size_t skeleton_cost = token_estimate(skeleton);
        if (skeleton_cost > options.cheap_budget) {
            result.violations.push_back(
                {"", "group " + std::to_string(group) +
                         ": prompt skeleton alone exceeds the budget, skipped"});
            continue;
        }
        std::size_t budget_left = options.cheap_budget - skeleton_cost;

        std::string query;
        for (const auto* f : fields) {
            query += f->query;
            query += ' ';
        }
        std::string context;
        for (const Chunk* c : retrieve(chunks, card_text, query, options.retrieve_k)) {
            std::string candidate = context + c->text_of(card_text);
            if (token_estimate(candidate) <= budget_left) context = std::move(candidate);
        }

        std::string prompt = build_prompt(options.prompt_template, fields, context);
        CompletionRequest request;
        request.prompt = prompt;
        request.model = options.model;
        CompletionResponse response = client.complete(request);
        ++result.requests;
        if (!response.ok) {
            result.violations.push_back(
                {"", "group " + std::to_string(group) + " request failed: " +
                         response.error});
            continue;
        }
        auto parsed = parse_response_object(response.text);
        if (!parsed) {
            result.violations.push_back(
                {"", "group " + std::to_string(group) +
                         " response is not a JSON object, dropped"});
            continue;
        }
        merge_response(result.payload, *parsed, schema, result.violations);
    }
    return result;
}

ExtractionResult extract_accurate(const std::string& card_text, const Schema& schema,
                                  CompletionClient& client,
                                  const ExtractOptions& options) {
    std::vector<const FieldSpec*> all_fields;
    for (const auto& f : schema.fields()) all_fields.push_back(&f);
    std::string prompt = build_prompt(options.prompt_template, all_fields, card_text);

    if (token_estimate(prompt) > options.accurate_budget) {
        ExtractionResult result = extract_cheap(card_text, schema, client, options);
        result.mode = "cheap-fallback";
        return result;
    }

    ExtractionResult result;
    result.mode = "accurate";
    result.payload = schema.empty_payload();

    CompletionRequest request;
    request.prompt = prompt;
    request.model = options.model;
    CompletionResponse response = client.complete(request);
    ++result.requests;
    if (!response.ok) {
        result.violations.push_back({"", "request failed: " + response.error});
        return result;
    }
    auto parsed = parse_response_object(response.text);
    if (!parsed) {
        result.violations.push_back({"", "response is not a JSON object, dropped"});
        return result;
    }
    merge_response(result.payload, *parsed, schema, result.violations);
    return result;
}

std::string utc_now_iso() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ExtractRunStats extract_all(store::Store& store, const Schema& schema,
                            CompletionClient& client, const ExtractOptions& options,
                            bool accurate, const Clock& clock) {
    ExtractRunStats stats;
    for (const auto& ptm : store.all_ptms()) {
        if (!ptm.card || trim(*ptm.card).empty()) continue;
        ExtractionResult result =
            accurate ? extract_accurate(*ptm.card, schema, client, options)
                     : extract_cheap(*ptm.card, schema, client, options);
        ++stats.cards_processed;
        stats.requests += result.requests;
        stats.violations += static_cast<int>(result.violations.size());
        if (store.put_metadata(ptm.id, result.payload.dump(), result.mode, clock())) {
            ++stats.rows_written;
        }
    }
    return stats;
}

namespace {

std::string fold(const std::string& s) { return to_lower(trim(s)); }

bool values_equal(const json& a, const json& b, FieldType type) {
    switch (type) {
        case FieldType::String: {
            if (!a.is_string() || !b.is_string()) return false;
            return fold(a.get<std::string>()) == fold(b.get<std::string>());
        }
        case FieldType::StringList: {
            if (!a.is_array() || !b.is_array() || a.size() != b.size()) return false;
            std::multiset<std::string> left;
            std::multiset<std::string> right;
            for (const auto& v : a) {
                if (!v.is_string()) return false;
                left.insert(fold(v.get<std::string>()));
            }
            for (const auto& v : b) {
                if (!v.is_string()) return false;
                right.insert(fold(v.get<std::string>()));
            }
            return left == right;
        }
        case FieldType::Object: {
            if (!a.is_object() || !b.is_object() || a.size() != b.size()) return false;
            for (auto it = a.begin(); it != a.end(); ++it) {
                if (!b.contains(it.key())) return false;
                const json& other = b[it.key()];
                if (it.value().is_number() && other.is_number()) {
                    if (it.value().get<double>() != other.get<double>()) return false;
                } else if (it.value().is_string() && other.is_string()) {
                    if (fold(it.value().get<std::string>()) !=
                        fold(other.get<std::string>())) {
                        return false;
                    }
                } else if (it.value() != other) {
                    return false;
                }
            }
            return true;
        }
        case FieldType::Integer: {
            auto as_int = [](const json& v) -> std::optional<std::int64_t> {
                if (v.is_number_integer()) return v.get<std::int64_t>();
                if (v.is_string() && digits_only(trim(v.get<std::string>()))) {
                    return std::stoll(trim(v.get<std::string>()));
                }
                return std::nullopt;
            };
            auto left = as_int(a);
            auto right = as_int(b);
            return left && right && *left == *right;
        }
    }
    return false;
}

}  // namespace

AccuracyReport evaluate_accuracy(const json& extracted, const json& gold,
                                 const Schema& schema) {
    AccuracyReport report;
    for (const auto& f : schema.fields()) {
        bool in_extracted =
            extracted.contains(f.name) && field_has_value(extracted[f.name]);
        bool in_gold = gold.contains(f.name) && field_has_value(gold[f.name]);
        if (!in_extracted && !in_gold) continue;
        ++report.compared;
        if (in_extracted && in_gold &&
            values_equal(extracted[f.name], gold[f.name], f.type)) {
            ++report.matched;
        } else {
            std::string left = in_extracted ? extracted[f.name].dump() : "(empty)";
            std::string right = in_gold ? gold[f.name].dump() : "(empty)";
            report.mismatches.push_back(f.name + ": " + left + " != " + right);
        }
    }
    report.accuracy =
        report.compared == 0
            ? 1.0
            : static_cast<double>(report.matched) / static_cast<double>(report.compared);
    return report;
}

AccuracyReport evaluate_sample(const std::vector<std::pair<json, json>>& pairs,
                               const Schema& schema) {
    AccuracyReport pooled;
    for (const auto& [extracted, gold] : pairs) {
        AccuracyReport one = evaluate_accuracy(extracted, gold, schema);
        pooled.compared += one.compared;
        pooled.matched += one.matched;
        for (auto& m : one.mismatches) pooled.mismatches.push_back(std::move(m));
    }
    pooled.accuracy = pooled.compared == 0 ? 1.0
                                           : static_cast<double>(pooled.matched) /
                                                 static_cast<double>(pooled.compared);
    return pooled;
}

}  // namespace ptmchain::card
