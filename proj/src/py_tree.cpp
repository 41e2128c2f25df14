#include "ptmchain/py_tree.hpp"

#include <unordered_set>

namespace ptmchain::py {

namespace {

struct Statement {
    std::vector<Token> tokens;
    bool module_scope = false;
    bool compound = false;  // starts with a block-introducing keyword
};

const std::unordered_set<std::string> kCompoundKeywords = {
    "if", "elif", "else", "for", "while", "with", "def",
    "class", "try", "except", "finally", "async"};

std::vector<Statement> split_statements(const std::vector<Token>& tokens) {
    std::vector<Statement> stmts;
    Statement cur;
    bool prev_sep_was_semicolon = false;
    bool prev_module_scope = false;
    bool prev_compound = false;

    auto flush = [&]() {
        if (cur.tokens.empty()) return;
        const Token& first = cur.tokens.front();
        if (prev_sep_was_semicolon) {
            cur.module_scope = prev_module_scope && !prev_compound;
        } else {
            cur.module_scope = first.col == 0;
        }
        cur.compound = first.kind == TokenKind::Keyword &&
                       kCompoundKeywords.count(first.text) > 0;
        prev_module_scope = cur.module_scope;
        prev_compound = cur.compound;
        stmts.push_back(std::move(cur));
        cur = Statement{};
    };

    for (const Token& t : tokens) {
        if (t.kind == TokenKind::EndOfFile) break;
        if (t.kind == TokenKind::StmtEnd) {
            flush();
            prev_sep_was_semicolon = t.stmt_sep;
            continue;
        }
        cur.tokens.push_back(t);
    }
    flush();
    return stmts;
}

bool is_op(const Token& t, const char* text) {
    return t.kind == TokenKind::Op && t.text == text;
}

bool is_kw(const Token& t, const char* text) {
    return t.kind == TokenKind::Keyword && t.text == text;
}

int bracket_delta(const Token& t) {
    if (t.kind != TokenKind::Op) return 0;
    if (t.text == "(" || t.text == "[" || t.text == "{") return 1;
    if (t.text == ")" || t.text == "]" || t.text == "}") return -1;
    return 0;
}

// Reads `a.b.c` starting at `i`; returns segments and advances `i` past them.
std::vector<std::string> read_dotted(const std::vector<Token>& ts, size_t& i) {
    std::vector<std::string> segs;
    while (i < ts.size() && ts[i].kind == TokenKind::Name) {
        segs.push_back(ts[i].text);
        ++i;
        if (i < ts.size() && is_op(ts[i], ".")) {
            ++i;
        } else {
            break;
        }
    }
    return segs;
}

void parse_import(const std::vector<Token>& ts, Module& mod) {
    // import a.b.c [as d][, e.f [as g]]*
    size_t i = 1;
    while (i < ts.size()) {
        size_t before = i;
        std::vector<std::string> path = read_dotted(ts, i);
        if (path.empty() || i == before) break;
        std::string alias;
        if (i < ts.size() && is_kw(ts[i], "as") && i + 1 < ts.size() &&
            ts[i + 1].kind == TokenKind::Name) {
            alias = ts[i + 1].text;
            i += 2;
        }
        ImportBinding b;
        b.line = ts[0].line;
        b.form = ImportForm::Module;
        if (!alias.empty()) {
            b.local = alias;
            std::string full;
            for (size_t k = 0; k < path.size(); ++k) {
                if (k) full += ".";
                full += path[k];
            }
            b.origin = full;
        } else {
            b.local = path[0];
            b.origin = path[0];
        }
        mod.imports.push_back(std::move(b));
        if (i < ts.size() && is_op(ts[i], ",")) {
            ++i;
        } else {
            break;
        }
    }
}

void parse_from_import(const std::vector<Token>& ts, Module& mod) {
    // from [.]* a.b import (x [as y][, z]*) | *
    size_t i = 1;
    bool relative = false;
    while (i < ts.size() && (is_op(ts[i], ".") || is_op(ts[i], "..."))) {
        relative = true;
        ++i;
    }
    std::vector<std::string> path = read_dotted(ts, i);
    if (i >= ts.size() || !is_kw(ts[i], "import")) return;
    ++i;
    if (relative || path.empty()) return;  // relative imports cannot be a library

    std::string module;
    for (size_t k = 0; k < path.size(); ++k) {
        if (k) module += ".";
        module += path[k];
    }

    if (i < ts.size() && is_op(ts[i], "*")) {
        mod.star_imports.push_back(module);
        return;
    }
    if (i < ts.size() && is_op(ts[i], "(")) ++i;

    while (i < ts.size()) {
        if (ts[i].kind != TokenKind::Name) break;
        std::string symbol = ts[i].text;
        ++i;
        std::string alias;
        if (i < ts.size() && is_kw(ts[i], "as") && i + 1 < ts.size() &&
            ts[i + 1].kind == TokenKind::Name) {
            alias = ts[i + 1].text;
            i += 2;
        }
        ImportBinding b;
        b.line = ts[0].line;
        b.form = ImportForm::From;
        b.local = alias.empty() ? symbol : alias;
        b.origin = module + "." + symbol;
        mod.imports.push_back(std::move(b));
        if (i < ts.size() && is_op(ts[i], ",")) {
            ++i;
        } else {
            break;
        }
    }
}

bool is_augmented_assign(const Token& t) {
    static const std::unordered_set<std::string> kAug = {
        "+=", "-=", "*=", "/=", "//=", "%=", "**=",
        ">>=", "<<=", "&=", "|=", "^=", "@="};
    return t.kind == TokenKind::Op && kAug.count(t.text) > 0;
}

void bump(Module& mod, const std::string& name) { ++mod.write_counts[name]; }

// Records every name (re)bound by this statement so constant propagation
// can require a unique binding.
void collect_writes(const std::vector<Token>& ts, size_t begin, Module& mod) {
    if (begin >= ts.size()) return;
    const Token& first = ts[begin];

    if (first.kind == TokenKind::Keyword) {
        const std::string& kw = first.text;
        if (kw == "def" || kw == "class") {
            if (begin + 1 < ts.size() && ts[begin + 1].kind == TokenKind::Name) {
                bump(mod, ts[begin + 1].text);
            }
            return;
        }
        if (kw == "for") {
            int depth = 0;
            for (size_t i = begin + 1; i < ts.size(); ++i) {
                depth += bracket_delta(ts[i]);
                if (depth == 0 && is_kw(ts[i], "in")) break;
                if (depth == 0 && ts[i].kind == TokenKind::Name) bump(mod, ts[i].text);
            }
        } else if (kw == "with" || kw == "except") {
            int depth = 0;
            for (size_t i = begin + 1; i + 1 < ts.size(); ++i) {
                depth += bracket_delta(ts[i]);
                if (depth == 0 && is_kw(ts[i], "as") &&
                    ts[i + 1].kind == TokenKind::Name) {
                    bump(mod, ts[i + 1].text);
                }
            }
        } else if (kw == "del") {
            int depth = 0;
            for (size_t i = begin + 1; i < ts.size(); ++i) {
                depth += bracket_delta(ts[i]);
                if (depth == 0 && ts[i].kind == TokenKind::Name) bump(mod, ts[i].text);
            }
        } else if (kw == "import") {
            return;  // handled via bindings below
        } else if (kw == "from") {
            return;
        } else if (kw == "global" || kw == "nonlocal") {
            return;
        }
        // One-line compound statements carry a suite after the header colon.
        if (kCompoundKeywords.count(kw)) {
            int depth = 0;
            for (size_t i = begin; i < ts.size(); ++i) {
                depth += bracket_delta(ts[i]);
                if (depth == 0 && is_op(ts[i], ":") && i + 1 < ts.size()) {
                    collect_writes(ts, i + 1, mod);
                    return;
                }
            }
        }
        return;
    }

    // Walrus targets, any depth.
    for (size_t i = begin; i + 1 < ts.size(); ++i) {
        if (is_op(ts[i + 1], ":=") && ts[i].kind == TokenKind::Name) {
            bump(mod, ts[i].text);
        }
    }

    // Plain and augmented assignment: names at depth zero left of the last
    // assignment operator, so every target of a chain like a = b = value
    // counts as written.
    int depth = 0;
    size_t op_index = std::string::npos;
    for (size_t i = begin; i < ts.size(); ++i) {
        depth += bracket_delta(ts[i]);
        if (depth == 0 && (is_op(ts[i], "=") || is_augmented_assign(ts[i]))) {
            op_index = i;
            continue;
        }
        if (op_index == std::string::npos && is_kw(ts[i], "lambda")) return;
    }
    if (op_index == std::string::npos) return;
    depth = 0;
    for (size_t i = begin; i < op_index; ++i) {
        depth += bracket_delta(ts[i]);
        if (depth == 0 && ts[i].kind == TokenKind::Name) bump(mod, ts[i].text);
    }
}

void extract_calls(const std::vector<Token>& ts, Module& mod) {
    for (size_t i = 0; i < ts.size(); ++i) {
        if (!is_op(ts[i], "(") || i == 0) continue;
        const Token& prev = ts[i - 1];
        bool callable_prefix = prev.kind == TokenKind::Name || is_op(prev, ")") ||
                               is_op(prev, "]");
        if (!callable_prefix) continue;

        std::vector<std::string> chain;
        if (prev.kind == TokenKind::Name) {
            size_t k = i - 1;
            chain.push_back(ts[k].text);
            while (k >= 2 && is_op(ts[k - 1], ".") && ts[k - 2].kind == TokenKind::Name) {
                chain.insert(chain.begin(), ts[k - 2].text);
                k -= 2;
            }
            if (k >= 1 && is_op(ts[k - 1], ".")) {
                chain.clear();  // attribute of a non-name expression
            }
        }
        if (chain.empty()) {
            ++mod.anonymous_call_count;
            continue;
        }

        RawCall call;
        call.chain = std::move(chain);
        call.line = ts[i - 1].line;

        // Split the argument list on top-level commas.
        int depth = 1;
        size_t j = i + 1;
        std::vector<std::vector<Token>> segments;
        std::vector<Token> seg;
        for (; j < ts.size(); ++j) {
            int d = bracket_delta(ts[j]);
            if (d < 0 && depth == 1) break;
            if (depth == 1 && is_op(ts[j], ",")) {
                segments.push_back(std::move(seg));
                seg.clear();
                continue;
            }
            depth += d;
            seg.push_back(ts[j]);
        }
        if (!seg.empty()) segments.push_back(std::move(seg));

        auto classify = [](std::vector<Token> v) -> RawArg {
            // Unwrap one layer of grouping parentheses around the whole value.
            while (v.size() >= 2 && is_op(v.front(), "(") && is_op(v.back(), ")")) {
                int d = 0;
                bool whole = true;
                for (size_t k = 0; k < v.size(); ++k) {
                    d += bracket_delta(v[k]);
                    if (d == 0 && k + 1 < v.size()) {
                        whole = false;
                        break;
                    }
                }
                if (!whole) break;
                v.erase(v.begin());
                v.pop_back();
            }
            RawArg a;
            if (v.size() == 1 && v[0].kind == TokenKind::Str && v[0].str_is_plain) {
                a.kind = RawArg::Kind::StringLit;
                a.text = v[0].value;
            } else if (v.size() == 1 && v[0].kind == TokenKind::Name) {
                a.kind = RawArg::Kind::NameRef;
                a.text = v[0].text;
            }
            return a;
        };

        for (auto& segment : segments) {
            if (segment.empty()) continue;
            if (segment.size() >= 2 && segment[0].kind == TokenKind::Name &&
                is_op(segment[1], "=")) {
                std::vector<Token> value(segment.begin() + 2, segment.end());
                call.kwargs.emplace_back(segment[0].text, classify(std::move(value)));
            } else {
                call.args.push_back(classify(std::move(segment)));
            }
        }
        mod.calls.push_back(std::move(call));
    }
}

}  // namespace

std::string to_string(ImportForm f) {
    return f == ImportForm::Module ? "module" : "from";
}

Module parse_source(const std::string& text) {
    std::vector<Token> tokens = lex(text);
    std::vector<Statement> stmts = split_statements(tokens);

    Module mod;
    mod.statement_count = static_cast<int>(stmts.size());

    for (const Statement& st : stmts) {
        const auto& ts = st.tokens;
        if (ts.empty()) continue;

        if (is_kw(ts[0], "import")) {
            size_t before = mod.imports.size();
            parse_import(ts, mod);
            for (size_t k = before; k < mod.imports.size(); ++k) {
                bump(mod, mod.imports[k].local);
            }
        } else if (is_kw(ts[0], "from")) {
            size_t before = mod.imports.size();
            parse_from_import(ts, mod);
            for (size_t k = before; k < mod.imports.size(); ++k) {
                bump(mod, mod.imports[k].local);
            }
        } else {
            collect_writes(ts, 0, mod);
            if (st.module_scope && ts.size() == 3 && ts[0].kind == TokenKind::Name &&
                is_op(ts[1], "=") && ts[2].kind == TokenKind::Str && ts[2].str_is_plain) {
                mod.string_assignments.push_back({ts[0].text, ts[2].value, ts[0].line});
            }
        }
        extract_calls(ts, mod);
    }
    return mod;
}

}  // namespace ptmchain::py
