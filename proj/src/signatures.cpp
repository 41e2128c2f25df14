#include "ptmchain/signatures.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ptmchain::sig {

namespace {

using nlohmann::json;

py::ImportForm form_from_string(const std::string& s, const std::string& sig_id) {
    if (s == "module") return py::ImportForm::Module;
    if (s == "from") return py::ImportForm::From;
    throw Error("signature '" + sig_id + "': unknown import form '" + s + "'");
}

Signature parse_signature(const json& j) {
    Signature s;
    s.id = j.value("id", "");
    if (s.id.empty()) throw Error("signature with missing or empty id");
    s.library = j.value("library", "");
    if (s.library.empty()) throw Error("signature '" + s.id + "': empty library");
    s.callee = j.value("callee", "");
    if (s.callee.empty()) throw Error("signature '" + s.id + "': empty callee");

    if (!j.contains("import_forms") || !j["import_forms"].is_array() ||
        j["import_forms"].empty()) {
        throw Error("signature '" + s.id + "': import_forms must be a non-empty array");
    }
    for (const auto& f : j["import_forms"]) {
        py::ImportForm form = form_from_string(f.get<std::string>(), s.id);
        if (s.allows_form(form)) {
            throw Error("signature '" + s.id + "': duplicate import form");
        }
        s.forms.push_back(form);
    }

    if (!j.contains("slot") || !j["slot"].is_object()) {
        throw Error("signature '" + s.id + "': missing slot object");
    }
    const auto& slot = j["slot"];
    std::string kind = slot.value("kind", "");
    if (kind == "position") {
        s.slot.kind = SlotSpec::Kind::Position;
        if (!slot.contains("value") || !slot["value"].is_number_integer() ||
            slot["value"].get<int>() < 0) {
            throw Error("signature '" + s.id + "': position slot needs value >= 0");
        }
        s.slot.position = slot["value"].get<int>();
    } else if (kind == "keyword") {
        s.slot.kind = SlotSpec::Kind::Keyword;
        s.slot.keyword = slot.value("value", "");
        if (s.slot.keyword.empty()) {
            throw Error("signature '" + s.id + "': keyword slot needs a name");
        }
    } else if (kind == "none") {
        s.slot.kind = SlotSpec::Kind::None;
    } else {
        throw Error("signature '" + s.id + "': unknown slot kind '" + kind + "'");
    }

    if (j.contains("anchors")) {
        for (const auto& a : j["anchors"]) {
            std::string anchor = a.get<std::string>();
            if (anchor.empty()) throw Error("signature '" + s.id + "': empty anchor");
            s.anchors.push_back(std::move(anchor));
        }
        if (s.anchors.empty()) {
            throw Error("signature '" + s.id + "': anchors present but empty");
        }
    }
    s.notes = j.value("notes", "");
    return s;
}

}  // namespace

SignatureSet SignatureSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open signature catalog: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

SignatureSet SignatureSet::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("signature catalog is not valid JSON: ") + e.what());
    }
    if (!doc.contains("signatures") || !doc["signatures"].is_array()) {
        throw Error("signature catalog needs a 'signatures' array");
    }

    SignatureSet set;
    for (const auto& j : doc["signatures"]) {
        Signature s = parse_signature(j);
        if (set.by_id_.count(s.id)) {
            throw Error("duplicate signature id '" + s.id + "'");
        }
        set.by_id_[s.id] = set.signatures_.size();
        set.signatures_.push_back(std::move(s));
    }
    if (set.signatures_.empty()) {
        throw Error("signature catalog has no signatures");
    }
    return set;
}

std::vector<const Signature*> SignatureSet::for_library(const std::string& library) const {
    std::vector<const Signature*> out;
    for (const auto& s : signatures_) {
        if (s.library == library) out.push_back(&s);
    }
    return out;
}

const Signature* SignatureSet::by_id(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &signatures_[it->second];
}

std::vector<std::string> SignatureSet::libraries() const {
    std::set<std::string> names;
    for (const auto& s : signatures_) names.insert(s.library);
    return {names.begin(), names.end()};
}

std::vector<std::string> anchors_for(const Signature& s) {
    if (!s.anchors.empty()) return s.anchors;
    std::string last = s.callee;
    size_t dot = last.rfind('.');
    if (dot != std::string::npos) last = last.substr(dot + 1);
    return {s.library, last + "("};
}

}  // namespace ptmchain::sig
