#include "ptmchain/analyzer.hpp"

#include <algorithm>

namespace ptmchain {

ImportTable build_import_table(const py::Module& mod) {
    ImportTable table;
    for (const auto& b : mod.imports) {
        table.bindings[b.local] = {b.origin, b.form};
    }
    return table;
}

std::vector<CallSite> resolve_calls(const py::Module& mod, const ImportTable& table,
                                    const std::string& file) {
    std::vector<CallSite> sites;
    for (const auto& call : mod.calls) {
        auto it = table.bindings.find(call.chain[0]);
        if (it == table.bindings.end()) continue;
        CallSite site;
        site.file = file;
        site.line = call.line;
        site.callee_fq = it->second.first;
        for (size_t k = 1; k < call.chain.size(); ++k) {
            site.callee_fq += ".";
            site.callee_fq += call.chain[k];
        }
        site.form = it->second.second;
        site.args = call.args;
        site.kwargs = call.kwargs;
        sites.push_back(std::move(site));
    }
    return sites;
}

namespace {

std::optional<std::string> resolve_arg(const py::RawArg& arg, const py::Module& mod) {
    if (arg.kind == py::RawArg::Kind::StringLit) return arg.text;
    if (arg.kind != py::RawArg::Kind::NameRef) return std::nullopt;

    auto wc = mod.write_counts.find(arg.text);
    if (wc == mod.write_counts.end() || wc->second != 1) return std::nullopt;
    const py::StringAssignment* found = nullptr;
    for (const auto& a : mod.string_assignments) {
        if (a.target == arg.text) {
            if (found) return std::nullopt;
            found = &a;
        }
    }
    if (!found) return std::nullopt;
    return found->value;
}

}  // namespace

std::optional<std::string> extract_model_name(const CallSite& site,
                                              const sig::Signature& signature,
                                              const py::Module& mod) {
    switch (signature.slot.kind) {
        case sig::SlotSpec::Kind::None:
            return std::nullopt;
        case sig::SlotSpec::Kind::Position: {
            size_t p = static_cast<size_t>(signature.slot.position);
            if (p >= site.args.size()) return std::nullopt;
            return resolve_arg(site.args[p], mod);
        }
        case sig::SlotSpec::Kind::Keyword: {
            for (const auto& [name, value] : site.kwargs) {
                if (name == signature.slot.keyword) return resolve_arg(value, mod);
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::vector<UsageRecord> scan_file(const std::string& path, const std::string& text,
                                   const sig::SignatureSet& signatures) {
    py::Module mod = py::parse_source(text);
    ImportTable table = build_import_table(mod);
    std::vector<CallSite> sites = resolve_calls(mod, table, path);

    std::vector<UsageRecord> records;
    for (const auto& site : sites) {
        for (const auto& s : signatures.all()) {
            if (site.callee_fq != s.full_callee() || !s.allows_form(site.form)) continue;
            UsageRecord r;
            r.file = path;
            r.line = site.line;
            r.signature_id = s.id;
            r.library = s.library;
            r.model_name = extract_model_name(site, s, mod);
            records.push_back(std::move(r));
        }
    }
    std::sort(records.begin(), records.end(), [](const UsageRecord& a, const UsageRecord& b) {
        if (a.line != b.line) return a.line < b.line;
        return a.signature_id < b.signature_id;
    });
    return records;
}

}  // namespace ptmchain
