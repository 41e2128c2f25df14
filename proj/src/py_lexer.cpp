#include "ptmchain/py_lexer.hpp"

#include <cctype>
#include <unordered_set>

namespace ptmchain::py {

namespace {

const std::unordered_set<std::string> kKeywords = {
    "False", "None",   "True",  "and",    "as",     "assert", "async",
    "await", "break",  "class", "continue", "def",  "del",    "elif",
    "else",  "except", "finally", "for",  "from",   "global", "if",
    "import", "in",    "is",    "lambda", "nonlocal", "not",  "or",
    "pass",  "raise",  "return", "try",   "while",  "with",   "yield",
};

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_cont(unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

struct StrPrefix {
    bool raw = false;
    bool bytes = false;
    bool fstring = false;
    size_t len = 0;
};

// Recognizes the r/b/u/f prefix combination immediately before a quote.
bool read_str_prefix(const std::string& s, size_t pos, StrPrefix& out) {
    StrPrefix p;
    size_t i = pos;
    while (i < s.size() && i - pos < 2) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
        if (c == 'r' && !p.raw) p.raw = true;
        else if (c == 'b' && !p.bytes) p.bytes = true;
        else if (c == 'f' && !p.fstring) p.fstring = true;
        else if (c == 'u' && i == pos) { /* legacy prefix, no effect */ }
        else break;
        ++i;
    }
    if (i == pos) return false;
    if (i >= s.size() || (s[i] != '"' && s[i] != '\'')) return false;
    if (p.bytes && p.fstring) return false;
    p.len = i - pos;
    out = p;
    return true;
}

std::string decode_escapes(const std::string& body) {
    std::string out;
    out.reserve(body.size());
    for (size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c != '\\' || i + 1 >= body.size()) {
            out += c;
            continue;
        }
        char e = body[++i];
        switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '\\': out += '\\'; break;
            case '\'': out += '\''; break;
            case '"': out += '"'; break;
            case 'a': out += '\a'; break;
            case 'b': out += '\b'; break;
            case 'f': out += '\f'; break;
            case 'v': out += '\v'; break;
            case '0': out += '\0'; break;
            case '\n': break;  // escaped newline joins lines
            case 'x': {
                if (i + 2 < body.size() && hex_val(body[i + 1]) >= 0 &&
                    hex_val(body[i + 2]) >= 0) {
                    out += static_cast<char>(hex_val(body[i + 1]) * 16 +
                                             hex_val(body[i + 2]));
                    i += 2;
                } else {
                    out += '\\';
                    out += e;
                }
                break;
            }
            default:
                // Unknown escapes keep the backslash, matching CPython.
                out += '\\';
                out += e;
                break;
        }
    }
    return out;
}

}  // namespace

bool is_keyword(const std::string& word) { return kKeywords.count(word) > 0; }

std::vector<Token> lex(const std::string& source) {
    std::vector<Token> tokens;
    size_t i = 0;
    int line = 1;
    int col = 0;
    int depth = 0;  // () [] {} nesting
    const size_t n = source.size();

    auto advance = [&](size_t count) {
        for (size_t k = 0; k < count && i < n; ++k) {
            if (source[i] == '\n') {
                ++line;
                col = 0;
            } else {
                ++col;
            }
            ++i;
        }
    };

    auto push = [&](TokenKind kind, std::string text, int tl, int tc) {
        Token t;
        t.kind = kind;
        t.text = std::move(text);
        t.line = tl;
        t.col = tc;
        tokens.push_back(std::move(t));
    };

    while (i < n) {
        char c = source[i];

        if (c == '\r') {
            advance(1);
            continue;
        }
        if (c == '\n') {
            if (depth == 0 && !tokens.empty() &&
                tokens.back().kind != TokenKind::StmtEnd) {
                push(TokenKind::StmtEnd, "\n", line, col);
            }
            advance(1);
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\f') {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < n && source[i] != '\n') advance(1);
            continue;
        }
        if (c == '\\' && i + 1 < n && (source[i + 1] == '\n' || source[i + 1] == '\r')) {
            advance(source[i + 1] == '\r' && i + 2 < n && source[i + 2] == '\n' ? 3 : 2);
            continue;
        }
        if (c == '\0') {
            throw SyntaxError(line, col, "null byte in source");
        }

        // String literals, with or without a prefix.
        StrPrefix prefix;
        bool has_prefix = is_ident_start(static_cast<unsigned char>(c)) &&
                          read_str_prefix(source, i, prefix);
        if (c == '"' || c == '\'' || has_prefix) {
            int tl = line;
            int tc = col;
            size_t start = i;
            if (has_prefix) advance(prefix.len);
            char quote = source[i];
            bool triple = i + 2 < n && source[i + 1] == quote && source[i + 2] == quote;
            advance(triple ? 3 : 1);
            size_t body_start = i;
            bool closed = false;
            while (i < n) {
                if (source[i] == '\\' && i + 1 < n) {
                    advance(2);
                    continue;
                }
                if (!triple && source[i] == '\n') break;
                if (source[i] == quote) {
                    if (!triple) {
                        closed = true;
                        break;
                    }
                    if (i + 2 < n && source[i + 1] == quote && source[i + 2] == quote) {
                        closed = true;
                        break;
                    }
                    if (i + 2 >= n && i + 1 < n && source[i + 1] == quote) {
                        // two quotes at EOF: still unterminated
                    }
                }
                advance(1);
            }
            if (!closed) throw SyntaxError(tl, tc, "unterminated string literal");
            std::string body = source.substr(body_start, i - body_start);
            advance(triple ? 3 : 1);

            Token t;
            t.kind = TokenKind::Str;
            t.text = source.substr(start, i - start);
            t.line = tl;
            t.col = tc;
            t.str_is_plain = !prefix.bytes && !prefix.fstring;
            if (t.str_is_plain) t.value = prefix.raw ? body : decode_escapes(body);
            tokens.push_back(std::move(t));
            continue;
        }

        // Names and keywords.
        if (is_ident_start(static_cast<unsigned char>(c))) {
            int tl = line;
            int tc = col;
            size_t start = i;
            while (i < n && is_ident_cont(static_cast<unsigned char>(source[i]))) advance(1);
            std::string word = source.substr(start, i - start);
            TokenKind kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Name;
            push(kind, std::move(word), tl, tc);
            continue;
        }

        // Numbers, including a leading dot as in ".5".
        if (is_digit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && is_digit(static_cast<unsigned char>(source[i + 1])))) {
            int tl = line;
            int tc = col;
            size_t start = i;
            while (i < n) {
                char d = source[i];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
                    advance(1);
                    continue;
                }
                if ((d == '+' || d == '-') && i > start) {
                    char prev = static_cast<char>(
                        std::tolower(static_cast<unsigned char>(source[i - 1])));
                    bool hexlike = source.size() > start + 1 &&
                                   (source[start + 1] == 'x' || source[start + 1] == 'X');
                    if (prev == 'e' && !hexlike) {
                        advance(1);
                        continue;
                    }
                }
                break;
            }
            push(TokenKind::Number, source.substr(start, i - start), tl, tc);
            continue;
        }

        // Operators and punctuation, longest match first.
        {
            int tl = line;
            int tc = col;
            auto try_op = [&](const std::string& op) -> bool {
                if (source.compare(i, op.size(), op) != 0) return false;
                advance(op.size());
                push(TokenKind::Op, op, tl, tc);
                return true;
            };

            static const std::vector<std::string> kThree = {"**=", "//=", ">>=", "<<=",
                                                            "..."};
            static const std::vector<std::string> kTwo = {
                "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", ":=",
                "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@="};
            bool matched = false;
            for (const auto& op : kThree) {
                if (try_op(op)) { matched = true; break; }
            }
            if (!matched) {
                for (const auto& op : kTwo) {
                    if (try_op(op)) { matched = true; break; }
                }
            }
            if (matched) continue;

            if (c == '(' || c == '[' || c == '{') ++depth;
            if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
            if (c == ';' && depth == 0) {
                Token t;
                t.kind = TokenKind::StmtEnd;
                t.text = ";";
                t.line = tl;
                t.col = tc;
                t.stmt_sep = true;
                tokens.push_back(std::move(t));
                advance(1);
                continue;
            }
            push(TokenKind::Op, std::string(1, c), tl, tc);
            advance(1);
            continue;
        }
    }

    if (!tokens.empty() && tokens.back().kind != TokenKind::StmtEnd) {
        push(TokenKind::StmtEnd, "\n", line, col);
    }
    push(TokenKind::EndOfFile, "", line, col);
    return tokens;
}

}  // namespace ptmchain::py
