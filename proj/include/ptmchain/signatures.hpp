#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ptmchain/py_tree.hpp"
#include "ptmchain/types.hpp"

namespace ptmchain::sig {

/// Where a signature's call carries the model name, if anywhere.
struct SlotSpec {
    enum class Kind { Position, Keyword, None };
    Kind kind = Kind::None;
    int position = 0;      // Position only
    std::string keyword;   // Keyword only
};

struct Signature {
    std::string id;
    std::string library;   // import root, e.g. "transformers"
    std::string callee;    // dotted path under the library, e.g. "AutoTokenizer.from_pretrained"
    std::vector<py::ImportForm> forms;
    SlotSpec slot;
    std::vector<std::string> anchors;  // optional override for anchors_for
    std::string notes;

    std::string full_callee() const { return library + "." + callee; }

    bool allows_form(py::ImportForm f) const {
        for (auto g : forms) {
            if (g == f) return true;
        }
        return false;
    }
};

class SignatureSet {
public:
    /// Parses and validates a catalog. Throws Error on missing file, malformed
    /// JSON, duplicate ids, an empty signature list, or a bad field.
    static SignatureSet load(const std::filesystem::path& path);
    static SignatureSet from_json(const std::string& text);

    const std::vector<Signature>& all() const { return signatures_; }
    std::vector<const Signature*> for_library(const std::string& library) const;
    const Signature* by_id(const std::string& id) const;

    /// Sorted, distinct library names.
    std::vector<std::string> libraries() const;

private:
    std::vector<Signature> signatures_;
    std::unordered_map<std::string, size_t> by_id_;
};

/// Conjunctive anchor group for the scanner pre-filter: a file can only
/// produce records for this signature if every anchor occurs as a raw
/// substring. Explicit anchors win; the default is the library name plus the
/// final callee segment with an opening parenthesis.
std::vector<std::string> anchors_for(const Signature& s);

}  // namespace ptmchain::sig
