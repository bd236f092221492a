#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edascope/python_ast.hpp"

namespace edascope::python {

enum class TokenKind { Name, Number, String, Op, Newline, Indent, Dedent, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  // for String: the body between the quotes
    std::size_t offset = 0;
    std::size_t line = 1;
    bool fstring = false;
};

// Tokenizes Python source. Throws Error(ParseFailure) on unterminated
// strings, unbalanced brackets, bad dedents and stray characters.
std::vector<Token> tokenize(std::string_view source);

// Parses a module. Tokenizer-level problems throw Error(ParseFailure);
// statements that tokenize but fall outside the supported grammar become
// Opaque statements.
Module parse_module(std::string_view source);

// Replaces IPython magic lines (`%...`, `%%...`, `!...`) with blank lines so
// byte offsets of the remaining code are preserved.
std::string strip_magics(std::string_view cell_source);

bool is_keyword(std::string_view name);
bool is_builtin(std::string_view name);
const std::set<std::string, std::less<>>& builtin_names();

}  // namespace edascope::python
