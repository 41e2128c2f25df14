#include "ptmchain/mapper.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "ptmchain/strings.hpp"

namespace ptmchain::mapping {

std::string normalize_name(const std::string& raw) {
    std::string s = trim(raw);
    if (s.size() >= 2) {
        char a = s.front();
        char b = s.back();
        if ((a == '"' && b == '"') || (a == '\'' && b == '\'')) {
            s = trim(s.substr(1, s.size() - 2));
        }
    }
    return s;
}

Registry registry_for_library(const std::string& library) {
    static const std::set<std::string> kTorchSide = {"torch", "torchvision",
                                                     "torchaudio", "torchtext"};
    return kTorchSide.count(library) ? Registry::PyTorchHub : Registry::HuggingFace;
}

namespace {

struct NameIndex {
    std::unordered_map<std::string, std::int64_t> exact;
    // lowercased name -> ids; used only when the exact lookup misses
    std::unordered_map<std::string, std::vector<std::int64_t>> folded;
};

NameIndex index_ptms(const std::vector<PtmPackage>& ptms, Registry registry) {
    NameIndex idx;
    for (const auto& p : ptms) {
        if (p.registry != registry) continue;
        idx.exact[p.name] = p.id;
        idx.folded[to_lower(p.name)].push_back(p.id);
    }
    return idx;
}

}  // namespace

MapStats map_dependencies(store::Store& store) {
    const auto ptms = store.all_ptms();
    NameIndex hf = index_ptms(ptms, Registry::HuggingFace);
    NameIndex th = index_ptms(ptms, Registry::PyTorchHub);

    struct LinkDraft {
        MatchStrength strength = MatchStrength::CaseInsensitive;
        std::set<std::int64_t> evidence;
    };
    std::map<std::pair<std::int64_t, std::int64_t>, LinkDraft> drafts;
    std::map<std::pair<Registry, std::string>, std::int64_t> unmatched;

    MapStats stats;
    for (const auto& usage : store.all_usage()) {
        if (!usage.model_name) {
            ++stats.dynamic_usages;
            continue;
        }
        std::string name = normalize_name(*usage.model_name);
        if (name.empty()) {
            ++stats.dynamic_usages;
            continue;
        }
        Registry registry = registry_for_library(usage.library);
        const NameIndex& idx = registry == Registry::HuggingFace ? hf : th;

        std::int64_t ptm_id = 0;
        MatchStrength strength = MatchStrength::Exact;
        auto ex = idx.exact.find(name);
        if (ex != idx.exact.end()) {
            ptm_id = ex->second;
        } else {
            auto folded = idx.folded.find(to_lower(name));
            if (folded != idx.folded.end() && folded->second.size() == 1) {
                ptm_id = folded->second[0];
                strength = MatchStrength::CaseInsensitive;
            }
        }

        if (ptm_id == 0) {
            ++unmatched[{registry, name}];
            continue;
        }
        LinkDraft& draft = drafts[{usage.repo_id, ptm_id}];
        if (strength == MatchStrength::Exact) draft.strength = MatchStrength::Exact;
        draft.evidence.insert(usage.id);
    }

    std::vector<PtmAppLink> links;
    std::set<std::int64_t> repos;
    std::set<std::int64_t> targets;
    for (const auto& [key, draft] : drafts) {
        PtmAppLink l;
        l.repo_id = key.first;
        l.ptm_id = key.second;
        l.strength = draft.strength;
        l.evidence.assign(draft.evidence.begin(), draft.evidence.end());
        links.push_back(std::move(l));
        repos.insert(key.first);
        targets.insert(key.second);
    }
    store.replace_links(links);

    std::vector<store::UnmatchedName> missing;
    for (const auto& [key, count] : unmatched) {
        store::UnmatchedName n;
        n.registry = key.first;
        n.name = key.second;
        n.occurrences = count;
        missing.push_back(std::move(n));
    }
    store.replace_unmatched(missing);

    stats.links = static_cast<int>(links.size());
    stats.distinct_repos = static_cast<int>(repos.size());
    stats.distinct_ptms = static_cast<int>(targets.size());
    stats.unmatched_names = static_cast<int>(missing.size());
    return stats;
}

PtmPtmStats derive_ptm_ptm_links(store::Store& store) {
    const auto ptms = store.all_ptms();
    NameIndex hf = index_ptms(ptms, Registry::HuggingFace);
    NameIndex th = index_ptms(ptms, Registry::PyTorchHub);
    std::unordered_map<std::int64_t, Registry> registry_of;
    for (const auto& p : ptms) registry_of[p.id] = p.registry;

    std::vector<PtmPtmLink> links;
    for (const auto& meta : store.all_metadata()) {
        auto payload = nlohmann::json::parse(meta.payload_json, nullptr, false);
        if (!payload.is_object()) continue;
        if (!payload.contains("base_model") || !payload["base_model"].is_string()) continue;
        std::string base = normalize_name(payload["base_model"].get<std::string>());
        if (base.empty()) continue;

        PtmPtmLink l;
        l.child_ptm_id = meta.ptm_id;
        l.base_model_name = base;

        Registry registry = registry_of.count(meta.ptm_id)
                                ? registry_of[meta.ptm_id]
                                : Registry::HuggingFace;
        const NameIndex& idx = registry == Registry::HuggingFace ? hf : th;
        auto ex = idx.exact.find(base);
        if (ex != idx.exact.end()) {
            l.resolved_base_id = ex->second;
        } else {
            auto folded = idx.folded.find(to_lower(base));
            if (folded != idx.folded.end() && folded->second.size() == 1) {
                l.resolved_base_id = folded->second[0];
            }
        }
        if (l.resolved_base_id && *l.resolved_base_id == l.child_ptm_id) {
            l.resolved_base_id.reset();  // a card citing itself is not an edge upward
        }
        links.push_back(std::move(l));
    }

    std::sort(links.begin(), links.end(), [](const PtmPtmLink& a, const PtmPtmLink& b) {
        if (a.child_ptm_id != b.child_ptm_id) return a.child_ptm_id < b.child_ptm_id;
        return a.base_model_name < b.base_model_name;
    });
    store.replace_ptm_ptm_links(links);

    PtmPtmStats stats;
    stats.links = static_cast<int>(links.size());
    for (const auto& l : links) {
        if (l.resolved_base_id) ++stats.resolved;
    }
    return stats;
}

}  // namespace ptmchain::mapping
