#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ptmchain/py_tree.hpp"
#include "ptmchain/signatures.hpp"
#include "ptmchain/types.hpp"

namespace ptmchain {

/// Local name to import origin, last binding wins.
struct ImportTable {
    std::unordered_map<std::string, std::pair<std::string, py::ImportForm>> bindings;
};

ImportTable build_import_table(const py::Module& mod);

/// A call whose head identifier resolves through the import table.
struct CallSite {
    std::string file;
    int line = 1;
    std::string callee_fq;   // fully qualified, e.g. "transformers.AutoTokenizer.from_pretrained"
    py::ImportForm form = py::ImportForm::Module;
    std::vector<py::RawArg> args;
    std::vector<std::pair<std::string, py::RawArg>> kwargs;
};

std::vector<CallSite> resolve_calls(const py::Module& mod, const ImportTable& table,
                                    const std::string& file = "");

/// Static model-name recovery for one matched call. A string literal in the
/// slot wins; a bare name is chased one hop to a module-scope constant that
/// is assigned exactly once to a string literal. Everything else is dynamic
/// and yields nullopt.
std::optional<std::string> extract_model_name(const CallSite& site,
                                              const sig::Signature& signature,
                                              const py::Module& mod);

/// Full single-file pipeline: parse, resolve, match, extract. Records carry
/// file, line, signature_id, library, model_name; ids stay zero until
/// persisted. Sorted by (line, signature_id). Throws py::SyntaxError for
/// files the tokenizer rejects.
std::vector<UsageRecord> scan_file(const std::string& path, const std::string& text,
                                   const sig::SignatureSet& signatures);

}  // namespace ptmchain
