#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ptmchain/py_lexer.hpp"

namespace ptmchain::py {

enum class ImportForm { Module, From };

std::string to_string(ImportForm f);

/// One local name introduced by an import statement.
/// `import torch.hub` binds local "torch" to origin "torch" (Module form);
/// `from transformers import AutoTokenizer as AT` binds "AT" to
/// "transformers.AutoTokenizer" (From form).
struct ImportBinding {
    std::string local;
    std::string origin;
    ImportForm form = ImportForm::Module;
    int line = 1;
};

struct RawArg {
    enum class Kind { StringLit, NameRef, Other };
    Kind kind = Kind::Other;
    std::string text;  // decoded literal for StringLit, identifier for NameRef
};

/// A call whose callee is a dotted name chain rooted at a plain identifier.
struct RawCall {
    std::vector<std::string> chain;  // e.g. {"AutoTokenizer", "from_pretrained"}
    int line = 1;
    std::vector<RawArg> args;
    std::vector<std::pair<std::string, RawArg>> kwargs;
};

/// Module-scope `NAME = "literal"` statement.
struct StringAssignment {
    std::string target;
    std::string value;
    int line = 1;
};

struct Module {
    std::vector<ImportBinding> imports;
    std::vector<std::string> star_imports;       // modules imported via `from m import *`
    std::vector<StringAssignment> string_assignments;
    std::unordered_map<std::string, int> write_counts;  // rebind count per name, any scope
    std::vector<RawCall> calls;
    int statement_count = 0;
    int anonymous_call_count = 0;  // calls on subscripts or call results

    int call_count() const {
        return static_cast<int>(calls.size()) + anonymous_call_count;
    }
};

/// Parses Python source into the shallow structure above.
/// Throws SyntaxError for files the tokenizer cannot get past.
Module parse_source(const std::string& text);

}  // namespace ptmchain::py
