#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ptmchain::py {

enum class TokenKind {
    Name,
    Keyword,
    Number,
    Str,
    Op,
    StmtEnd,   // logical newline or ';' at bracket depth zero
    EndOfFile,
};

struct Token {
    TokenKind kind = TokenKind::EndOfFile;
    std::string text;       // source spelling (Str: quotes and prefix included)
    std::string value;      // Str only: decoded value for plain string literals
    int line = 1;           // 1-based
    int col = 0;            // 0-based byte column
    bool str_is_plain = false;  // Str only: not an f-string and not bytes
    bool stmt_sep = false;      // StmtEnd only: produced by ';' rather than newline
};

/// Raised for source the tokenizer cannot get past (unterminated strings,
/// stray null bytes). Callers treat the file as unparseable and skip it.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(int line, int col, const std::string& msg)
        : std::runtime_error(msg + " at line " + std::to_string(line) + ", col " +
                             std::to_string(col)),
          line(line),
          col(col) {}
    int line;
    int col;
};

bool is_keyword(const std::string& word);

/// Tokenizes Python source. Comments are dropped. Newlines inside bracket
/// pairs and backslash continuations do not end statements. The token list
/// always terminates with EndOfFile.
std::vector<Token> lex(const std::string& source);

}  // namespace ptmchain::py
