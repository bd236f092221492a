#include <array>
#include <cctype>

#include "edascope/error.hpp"
#include "edascope/python_parser.hpp"

namespace edascope::python {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) {
    static constexpr std::array<std::string_view, 24> prefixes = {
        "r", "u", "b", "f", "br", "rb", "fr", "rf", "R", "U", "B", "F",
        "Br", "bR", "BR", "Rb", "rB", "RB", "Fr", "fR", "FR", "Rf", "rF", "RF"};
    for (auto p : prefixes) {
        if (p == word) return true;
    }
    return false;
}

constexpr std::array<std::string_view, 5> kOps3 = {"**=", "//=", ">>=", "<<=", "..."};
constexpr std::array<std::string_view, 20> kOps2 = {"**", "//", "==", "!=", "<=", ">=", "<<", ">>", "+=", "-=",
                                                     "*=", "/=", "%=", "&=", "|=", "^=", "@=", "->", ":=", "<>"};
constexpr std::string_view kOps1 = "+-*/%@&|^~<>()[]{},:.;=";

[[noreturn]] void fail(const std::string& what, std::size_t line) {
    throw Error(ErrorCode::ParseFailure, what + " at line " + std::to_string(line));
}

class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        while (pos_ < src_.size()) {
            if (at_line_start_ && depth_ == 0) {
                if (!handle_indentation()) continue;
            }
            scan_one();
        }
        if (depth_ > 0) fail("unbalanced brackets", line_);
        if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline && tokens_.back().kind != TokenKind::Dedent) {
            emit(TokenKind::Newline, "", pos_);
        }
        while (indents_.size() > 1) {
            indents_.pop_back();
            emit(TokenKind::Dedent, "", pos_);
        }
        emit(TokenKind::End, "", pos_);
        return std::move(tokens_);
    }

private:
    void emit(TokenKind kind, std::string text, std::size_t offset, bool fstring = false) {
        tokens_.push_back(Token{kind, std::move(text), offset, line_, fstring});
    }

    // Returns false when the line was blank/comment-only and consumed.
    bool handle_indentation() {
        std::size_t col = 0;
        std::size_t p = pos_;
        while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
            col = src_[p] == '\t' ? (col / 8 + 1) * 8 : (src_[p] == '\f' ? 0 : col + 1);
            ++p;
        }
        if (p >= src_.size() || src_[p] == '\n' || src_[p] == '\r' || src_[p] == '#') {
            while (p < src_.size() && src_[p] != '\n') ++p;
            if (p < src_.size()) {
                ++p;
                ++line_;
            }
            pos_ = p;
            return false;
        }
        if (col > indents_.back()) {
            indents_.push_back(col);
            emit(TokenKind::Indent, "", p);
        } else {
            while (col < indents_.back()) {
                indents_.pop_back();
                emit(TokenKind::Dedent, "", p);
            }
            if (col != indents_.back()) fail("inconsistent dedent", line_);
        }
        pos_ = p;
        at_line_start_ = false;
        return true;
    }

    void scan_one() {
        const auto c = static_cast<unsigned char>(src_[pos_]);
        if (c == ' ' || c == '\t' || c == '\f' || c == '\r') {
            ++pos_;
        } else if (c == '#') {
            while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        } else if (c == '\\') {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && src_[p] == '\r') ++p;
            if (p < src_.size() && src_[p] == '\n') {
                pos_ = p + 1;
                ++line_;
            } else {
                fail("stray backslash", line_);
            }
        } else if (c == '\n') {
            if (depth_ == 0) {
                if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline &&
                    tokens_.back().kind != TokenKind::Indent && tokens_.back().kind != TokenKind::Dedent) {
                    emit(TokenKind::Newline, "", pos_);
                }
                at_line_start_ = true;
            }
            ++pos_;
            ++line_;
        } else if (is_ident_start(c)) {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            const std::string_view word = src_.substr(start, pos_ - start);
            if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') && is_string_prefix(word)) {
                const bool f = word.find_first_of("fF") != std::string_view::npos;
                scan_string(start, f);
            } else {
                emit(TokenKind::Name, std::string(word), start);
            }
        } else if (std::isdigit(c) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            const std::size_t start = pos_;
            while (pos_ < src_.size()) {
                const auto d = static_cast<unsigned char>(src_[pos_]);
                if (std::isalnum(d) || d == '_' || d == '.') {
                    ++pos_;
                } else if ((d == '+' || d == '-') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
                           !(src_.substr(start, 2) == "0x" || src_.substr(start, 2) == "0X")) {
                    ++pos_;
                } else {
                    break;
                }
            }
            emit(TokenKind::Number, std::string(src_.substr(start, pos_ - start)), start);
        } else if (c == '"' || c == '\'') {
            scan_string(pos_, false);
        } else {
            scan_operator();
        }
    }

    void scan_string(std::size_t token_start, bool fstring) {
        const char quote = src_[pos_];
        const bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote;
        const std::size_t open_len = triple ? 3 : 1;
        pos_ += open_len;
        const std::size_t body_start = pos_;
        const std::size_t start_line = line_;
        for (;;) {
            if (pos_ >= src_.size()) fail("unterminated string", start_line);
            const char ch = src_[pos_];
            if (ch == '\\') {
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            if (ch == '\n') {
                if (!triple) fail("unterminated string", start_line);
                ++line_;
                ++pos_;
                continue;
            }
            if (ch == quote) {
                if (!triple) break;
                if (pos_ + 2 < src_.size() && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote) break;
            }
            ++pos_;
        }
        const std::string body(src_.substr(body_start, pos_ - body_start));
        pos_ += open_len;
        tokens_.push_back(Token{TokenKind::String, body, token_start, start_line, fstring});
    }

    void scan_operator() {
        const std::size_t start = pos_;
        auto take = [&](std::string_view op) {
            pos_ += op.size();
            emit(TokenKind::Op, std::string(op), start);
        };
        const std::string_view rest = src_.substr(pos_);
        for (auto op : kOps3) {
            if (rest.substr(0, 3) == op) return take(op);
        }
        for (auto op : kOps2) {
            if (rest.substr(0, 2) == op) return take(op);
        }
        const char c = rest[0];
        if (kOps1.find(c) == std::string_view::npos) {
            fail(std::string("unexpected character '") + c + "'", line_);
        }
        if (c == '(' || c == '[' || c == '{') {
            ++depth_;
        } else if (c == ')' || c == ']' || c == '}') {
            if (depth_ == 0) fail("unbalanced closing bracket", line_);
            --depth_;
        }
        take(rest.substr(0, 1));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    int depth_ = 0;
    bool at_line_start_ = true;
    std::vector<std::size_t> indents_;
    std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
    return Tokenizer(source).run();
}

std::string strip_magics(std::string_view cell_source) {
    std::string out;
    out.reserve(cell_source.size());
    std::size_t start = 0;
    bool in_cell_magic = false;
    bool first_code_line = true;
    while (start <= cell_source.size()) {
        auto nl = cell_source.find('\n', start);
        const bool last = nl == std::string_view::npos;
        if (last) nl = cell_source.size();
        const std::string_view line = cell_source.substr(start, nl - start);
        const auto first = line.find_first_not_of(" \t");
        bool magic = false;
        if (first != std::string_view::npos) {
            const char c = line[first];
            if (c == '%' || c == '!') magic = true;
            // Non-Python cell magics (%%bash, %%html, ...) blank the whole cell.
            if (first_code_line && line.substr(first, 2) == "%%") {
                const auto name = line.substr(first + 2, line.find_first_of(" \t", first + 2) - (first + 2));
                in_cell_magic = !(name == "time" || name == "timeit" || name == "capture");
            }
            first_code_line = false;
        }
        if (magic || in_cell_magic) {
            out.append(line.size(), ' ');
        } else {
            out.append(line);
        }
        if (last) break;
        out.push_back('\n');
        start = nl + 1;
    }
    return out;
}

}  // namespace edascope::python
