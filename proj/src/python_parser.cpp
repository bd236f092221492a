#include "edascope/python_parser.hpp"

#include <array>
#include <optional>

#include "edascope/error.hpp"

namespace edascope::python {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",   "assert", "async", "await",  "break",
    "class", "continue", "def",   "del",      "elif", "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",   "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",  "while",  "with",  "yield"};

// Thrown inside the statement parser; caught per statement and turned into
// an Opaque statement.
struct SyntaxError {
    std::size_t at;
};

ExprPtr make(ExprKind kind, std::size_t offset) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->offset = offset;
    return e;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, std::size_t base_offset = 0)
        : toks_(std::move(tokens)), base_(base_offset) {}

    Module parse_module() {
        Module module;
        while (!at(TokenKind::End)) {
            if (at(TokenKind::Newline)) {
                ++pos_;
                continue;
            }
            parse_statement_into(module.body);
        }
        module.opaque_statements = opaque_count_;
        return module;
    }

    // Parses a standalone expression (f-string replacement fields).
    ExprPtr parse_standalone_expression() {
        while (at(TokenKind::Newline)) ++pos_;
        auto e = parse_testlist_star();
        while (at(TokenKind::Newline)) ++pos_;
        if (!at(TokenKind::End)) throw SyntaxError{pos_};
        return e;
    }

private:
    // ---- token helpers -------------------------------------------------
    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t ahead = 1) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at(TokenKind k) const { return cur().kind == k; }
    bool at_op(std::string_view op) const { return cur().kind == TokenKind::Op && cur().text == op; }
    bool at_kw(std::string_view kw) const { return cur().kind == TokenKind::Name && cur().text == kw; }
    bool accept_op(std::string_view op) {
        if (!at_op(op)) return false;
        ++pos_;
        return true;
    }
    bool accept_kw(std::string_view kw) {
        if (!at_kw(kw)) return false;
        ++pos_;
        return true;
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op)) throw SyntaxError{pos_};
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) throw SyntaxError{pos_};
    }
    std::string expect_name() {
        if (!at(TokenKind::Name) || is_keyword(cur().text)) throw SyntaxError{pos_};
        return toks_[pos_++].text;
    }
    std::size_t off() const { return base_ + cur().offset; }

    // ---- statements ------------------------------------------------------
    void parse_statement_into(std::vector<Stmt>& out) {
        const std::size_t start = pos_;
        try {
            if (is_compound_start()) {
                out.push_back(parse_compound());
            } else {
                parse_simple_statements(out);
            }
        } catch (const SyntaxError&) {
            pos_ = start;
            out.push_back(recover_opaque());
        }
    }

    bool is_compound_start() const {
        if (at_op("@")) return true;
        if (!at(TokenKind::Name)) return false;
        const auto& t = cur().text;
        if (t == "if" || t == "while" || t == "for" || t == "try" || t == "with" || t == "def" || t == "class") {
            return true;
        }
        return t == "async" && peek().kind == TokenKind::Name &&
               (peek().text == "def" || peek().text == "for" || peek().text == "with");
    }

    // Swallows one logical statement (and an indented body, if any) and keeps
    // its free-standing identifiers.
    Stmt recover_opaque() {
        Stmt s;
        s.kind = StmtKind::Opaque;
        s.line = cur().line;
        ++opaque_count_;
        const std::size_t first = pos_;
        int depth = 0;
        auto collect = [&](std::size_t i) {
            const Token& t = toks_[i];
            if (t.kind != TokenKind::Name || is_keyword(t.text)) return;
            if (i > 0 && toks_[i - 1].kind == TokenKind::Op && toks_[i - 1].text == ".") return;
            s.opaque_names.push_back(t.text);
        };
        for (;;) {
            if (at(TokenKind::End)) break;
            if (at(TokenKind::Newline) && depth == 0) {
                ++pos_;
                if (!at(TokenKind::Indent)) break;
                continue;
            }
            if (at(TokenKind::Indent)) ++depth;
            if (at(TokenKind::Dedent)) {
                if (depth == 0) break;
                --depth;
                ++pos_;
                if (depth == 0) break;
                continue;
            }
            collect(pos_);
            ++pos_;
        }
        if (pos_ == first && !at(TokenKind::End)) ++pos_;
        return s;
    }

    std::vector<Stmt> parse_suite() {
        expect_op(":");
        std::vector<Stmt> body;
        if (at(TokenKind::Newline)) {
            ++pos_;
            if (!at(TokenKind::Indent)) throw SyntaxError{pos_};
            ++pos_;
            while (!at(TokenKind::Dedent) && !at(TokenKind::End)) {
                if (at(TokenKind::Newline)) {
                    ++pos_;
                    continue;
                }
                parse_statement_into(body);
            }
            if (at(TokenKind::Dedent)) ++pos_;
        } else {
            parse_simple_statements(body);
        }
        return body;
    }

    Stmt parse_compound() {
        std::vector<ExprPtr> decorators;
        while (accept_op("@")) {
            decorators.push_back(parse_namedexpr_test());
            if (!at(TokenKind::Newline)) throw SyntaxError{pos_};
            ++pos_;
        }
        accept_kw("async");
        Stmt s;
        s.line = cur().line;
        if (accept_kw("def")) {
            s.kind = StmtKind::FunctionDef;
            s.name = expect_name();
            expect_op("(");
            s.params = parse_parameters(")", true);
            expect_op(")");
            if (accept_op("->")) s.extra.push_back(parse_test());
            s.decorators = std::move(decorators);
            s.body = parse_suite();
            return s;
        }
        if (accept_kw("class")) {
            s.kind = StmtKind::ClassDef;
            s.name = expect_name();
            if (accept_op("(")) {
                s.bases = parse_call_arguments();
                expect_op(")");
            }
            s.decorators = std::move(decorators);
            s.body = parse_suite();
            return s;
        }
        if (!decorators.empty()) throw SyntaxError{pos_};
        if (accept_kw("if")) {
            s.kind = StmtKind::If;
            s.value = parse_namedexpr_test();
            s.body = parse_suite();
            if (at_kw("elif")) {
                // elif chains become nested If statements in orelse.
                toks_[pos_].text = "if";
                s.orelse.push_back(parse_compound());
            } else if (accept_kw("else")) {
                s.orelse = parse_suite();
            }
            return s;
        }
        if (accept_kw("while")) {
            s.kind = StmtKind::While;
            s.value = parse_namedexpr_test();
            s.body = parse_suite();
            if (accept_kw("else")) s.orelse = parse_suite();
            return s;
        }
        if (accept_kw("for")) {
            s.kind = StmtKind::For;
            s.targets.push_back(parse_target_list());
            expect_kw("in");
            s.value = parse_testlist_star();
            s.body = parse_suite();
            if (accept_kw("else")) s.orelse = parse_suite();
            return s;
        }
        if (accept_kw("try")) {
            s.kind = StmtKind::Try;
            s.body = parse_suite();
            while (accept_kw("except")) {
                accept_op("*");
                ExceptHandler h;
                if (!at_op(":")) {
                    h.type = parse_test();
                    if (accept_kw("as")) {
                        h.name = expect_name();
                    } else if (accept_op(",")) {
                        h.type = parse_test();  // tolerate `except A, B:` by keeping the tail
                    }
                }
                h.body = parse_suite();
                s.handlers.push_back(std::move(h));
            }
            if (accept_kw("else")) s.orelse = parse_suite();
            if (accept_kw("finally")) s.finalbody = parse_suite();
            if (s.handlers.empty() && s.finalbody.empty()) throw SyntaxError{pos_};
            return s;
        }
        if (accept_kw("with")) {
            s.kind = StmtKind::With;
            bool parsed = false;
            if (at_op("(")) {
                const std::size_t save = pos_;
                try {
                    ++pos_;
                    s.items = parse_with_items(")");
                    expect_op(")");
                    if (!at_op(":")) throw SyntaxError{pos_};
                    parsed = true;
                } catch (const SyntaxError&) {
                    pos_ = save;
                    s.items.clear();
                }
            }
            if (!parsed) s.items = parse_with_items(":");
            s.body = parse_suite();
            return s;
        }
        throw SyntaxError{pos_};
    }

    std::vector<WithItem> parse_with_items(std::string_view closer) {
        std::vector<WithItem> items;
        for (;;) {
            WithItem item;
            item.context = parse_test();
            if (accept_kw("as")) item.target = parse_target();
            items.push_back(std::move(item));
            if (!accept_op(",")) break;
            if (at_op(closer)) break;
        }
        return items;
    }

    void parse_simple_statements(std::vector<Stmt>& out) {
        for (;;) {
            out.push_back(parse_small_statement());
            if (accept_op(";")) {
                out.back().semicolon_terminated = true;
                if (at(TokenKind::Newline) || at(TokenKind::End)) break;
                continue;
            }
            break;
        }
        if (at(TokenKind::Newline)) {
            ++pos_;
        } else if (!at(TokenKind::End)) {
            throw SyntaxError{pos_};
        }
    }

    Stmt parse_small_statement() {
        Stmt s;
        s.line = cur().line;
        if (accept_kw("pass")) {
            s.kind = StmtKind::Pass;
        } else if (accept_kw("break")) {
            s.kind = StmtKind::Break;
        } else if (accept_kw("continue")) {
            s.kind = StmtKind::Continue;
        } else if (accept_kw("return")) {
            s.kind = StmtKind::Return;
            if (!at_statement_end()) s.value = parse_testlist_star();
        } else if (accept_kw("raise")) {
            s.kind = StmtKind::Raise;
            if (!at_statement_end()) {
                s.value = parse_test();
                if (accept_kw("from")) s.extra.push_back(parse_test());
            }
        } else if (at_kw("global") || at_kw("nonlocal")) {
            s.kind = cur().text == "global" ? StmtKind::Global : StmtKind::Nonlocal;
            ++pos_;
            do {
                s.names.push_back({expect_name(), {}});
            } while (accept_op(","));
        } else if (accept_kw("del")) {
            s.kind = StmtKind::Delete;
            do {
                if (at_statement_end()) break;
                s.targets.push_back(parse_bitor_or_star());
            } while (accept_op(","));
        } else if (accept_kw("assert")) {
            s.kind = StmtKind::Assert;
            s.value = parse_test();
            if (accept_op(",")) s.extra.push_back(parse_test());
        } else if (accept_kw("import")) {
            s.kind = StmtKind::Import;
            do {
                ImportName n;
                n.name = parse_dotted_name();
                if (accept_kw("as")) n.asname = expect_name();
                s.names.push_back(std::move(n));
            } while (accept_op(","));
        } else if (accept_kw("from")) {
            s.kind = StmtKind::ImportFrom;
            for (;;) {
                if (accept_op(".")) {
                    ++s.level;
                } else if (accept_op("...")) {
                    s.level += 3;
                } else {
                    break;
                }
            }
            if (!at_kw("import")) s.name = parse_dotted_name();
            expect_kw("import");
            if (accept_op("*")) {
                s.names.push_back({"*", {}});
            } else {
                const bool paren = accept_op("(");
                do {
                    if (paren && at_op(")")) break;
                    ImportName n;
                    n.name = expect_name();
                    if (accept_kw("as")) n.asname = expect_name();
                    s.names.push_back(std::move(n));
                } while (accept_op(","));
                if (paren) expect_op(")");
            }
        } else {
            parse_expression_statement(s);
        }
        return s;
    }

    bool at_statement_end() const { return at(TokenKind::Newline) || at(TokenKind::End) || at_op(";"); }

    std::string parse_dotted_name() {
        std::string name = expect_name();
        while (accept_op(".")) name += "." + expect_name();
        return name;
    }

    void parse_expression_statement(Stmt& s) {
        ExprPtr first = at_kw("yield") ? parse_yield() : parse_testlist_star();
        static constexpr std::array<std::string_view, 13> aug = {"+=", "-=", "*=", "/=", "//=", "%=", "@=",
                                                                 "&=", "|=", "^=", ">>=", "<<=", "**="};
        for (auto op : aug) {
            if (accept_op(op)) {
                s.kind = StmtKind::AugAssign;
                s.targets.push_back(std::move(first));
                s.value = at_kw("yield") ? parse_yield() : parse_testlist_star();
                return;
            }
        }
        if (accept_op(":")) {
            s.kind = StmtKind::AnnAssign;
            s.targets.push_back(std::move(first));
            s.extra.push_back(parse_test());
            if (accept_op("=")) s.value = at_kw("yield") ? parse_yield() : parse_testlist_star();
            return;
        }
        if (at_op("=")) {
            s.kind = StmtKind::Assign;
            std::vector<ExprPtr> chain;
            chain.push_back(std::move(first));
            while (accept_op("=")) {
                chain.push_back(at_kw("yield") ? parse_yield() : parse_testlist_star());
            }
            s.value = std::move(chain.back());
            chain.pop_back();
            s.targets = std::move(chain);
            return;
        }
        s.kind = StmtKind::Expr;
        s.value = std::move(first);
    }

    // ---- parameters -------------------------------------------------------
    std::vector<Parameter> parse_parameters(std::string_view closer, bool annotations) {
        std::vector<Parameter> params;
        while (!at_op(closer)) {
            if (accept_op("/")) {
                if (!accept_op(",")) break;
                continue;
            }
            Parameter p;
            if (accept_op("**") || accept_op("*")) {
                if (at_op(",") || at_op(closer)) {  // bare `*` separator
                    if (!accept_op(",")) break;
                    continue;
                }
            }
            p.name = expect_name();
            if (annotations && accept_op(":")) p.annotation = parse_test();
            if (accept_op("=")) p.default_value = parse_test();
            params.push_back(std::move(p));
            if (!accept_op(",")) break;
        }
        return params;
    }

    // ---- expressions -----------------------------------------------------
    ExprPtr parse_testlist_star() {
        const std::size_t start = off();
        auto first = parse_namedexpr_or_star();
        if (!at_op(",")) return first;
        auto tuple = make(ExprKind::Tuple, start);
        tuple->operands.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_expression_end()) break;
            tuple->operands.push_back(parse_namedexpr_or_star());
        }
        return tuple;
    }

    bool at_expression_end() const {
        if (at(TokenKind::Newline) || at(TokenKind::End)) return true;
        if (cur().kind == TokenKind::Op) {
            const auto& t = cur().text;
            return t == ")" || t == "]" || t == "}" || t == "=" || t == ";" || t == ":" ||
                   (t.size() >= 2 && t.back() == '=' && t != "==" && t != "!=" && t != "<=" && t != ">=");
        }
        return at_kw("in") || at_kw("for") || at_kw("async");
    }

    ExprPtr parse_namedexpr_or_star() {
        if (at_op("*")) {
            auto e = make(ExprKind::Starred, off());
            ++pos_;
            e->operands.push_back(parse_bitor());
            return e;
        }
        return parse_namedexpr_test();
    }

    ExprPtr parse_namedexpr_test() {
        if (at(TokenKind::Name) && !is_keyword(cur().text) && peek().kind == TokenKind::Op && peek().text == ":=") {
            auto e = make(ExprKind::NamedExpr, off());
            auto target = make(ExprKind::Name, off());
            target->id = toks_[pos_].text;
            pos_ += 2;
            e->operands.push_back(std::move(target));
            e->operands.push_back(parse_test());
            return e;
        }
        return parse_test();
    }

    ExprPtr parse_test() {
        if (at_kw("lambda")) return parse_lambda();
        const std::size_t start = off();
        auto body = parse_or_test();
        if (at_kw("if")) {
            // Inside comprehensions `if` belongs to the generator; a ternary
            // always carries an `else`, so look for it before committing.
            const std::size_t save = pos_;
            ++pos_;
            try {
                auto cond = parse_or_test();
                if (accept_kw("else")) {
                    auto e = make(ExprKind::Operation, start);
                    e->operands.push_back(std::move(body));
                    e->operands.push_back(std::move(cond));
                    e->operands.push_back(parse_test());
                    return e;
                }
            } catch (const SyntaxError&) {
            }
            pos_ = save;
        }
        return body;
    }

    ExprPtr parse_test_nocond() {
        if (at_kw("lambda")) return parse_lambda(true);
        return parse_or_test();
    }

    ExprPtr parse_lambda(bool nocond = false) {
        auto e = make(ExprKind::Lambda, off());
        expect_kw("lambda");
        e->params = parse_parameters(":", false);
        expect_op(":");
        e->operands.push_back(nocond ? parse_test_nocond() : parse_test());
        return e;
    }

    ExprPtr binary(ExprPtr lhs, ExprPtr rhs) {
        if (lhs->kind != ExprKind::Operation || lhs->operands.size() > 64) {
            auto e = make(ExprKind::Operation, lhs->offset);
            e->operands.push_back(std::move(lhs));
            lhs = std::move(e);
        }
        lhs->operands.push_back(std::move(rhs));
        return lhs;
    }

    ExprPtr parse_or_test() {
        auto lhs = parse_and_test();
        while (accept_kw("or")) lhs = binary(std::move(lhs), parse_and_test());
        return lhs;
    }

    ExprPtr parse_and_test() {
        auto lhs = parse_not_test();
        while (accept_kw("and")) lhs = binary(std::move(lhs), parse_not_test());
        return lhs;
    }

    ExprPtr parse_not_test() {
        if (at_kw("not")) {
            auto e = make(ExprKind::Operation, off());
            ++pos_;
            e->operands.push_back(parse_not_test());
            return e;
        }
        return parse_comparison();
    }

    bool accept_comparison_op() {
        static constexpr std::array<std::string_view, 7> ops = {"<", ">", "==", ">=", "<=", "!=", "<>"};
        for (auto op : ops) {
            if (accept_op(op)) return true;
        }
        if (accept_kw("in")) return true;
        if (at_kw("not") && peek().kind == TokenKind::Name && peek().text == "in") {
            pos_ += 2;
            return true;
        }
        if (accept_kw("is")) {
            accept_kw("not");
            return true;
        }
        return false;
    }

    ExprPtr parse_comparison() {
        auto lhs = parse_bitor();
        while (accept_comparison_op()) lhs = binary(std::move(lhs), parse_bitor());
        return lhs;
    }

    template <typename Next>
    ExprPtr parse_binary_level(std::initializer_list<std::string_view> ops, Next next) {
        auto lhs = (this->*next)();
        for (;;) {
            bool matched = false;
            for (auto op : ops) {
                if (accept_op(op)) {
                    lhs = binary(std::move(lhs), (this->*next)());
                    matched = true;
                    break;
                }
            }
            if (!matched) return lhs;
        }
    }

    ExprPtr parse_bitor() { return parse_binary_level({"|"}, &Parser::parse_xor); }
    ExprPtr parse_xor() { return parse_binary_level({"^"}, &Parser::parse_bitand); }
    ExprPtr parse_bitand() { return parse_binary_level({"&"}, &Parser::parse_shift); }
    ExprPtr parse_shift() { return parse_binary_level({"<<", ">>"}, &Parser::parse_arith); }
    ExprPtr parse_arith() { return parse_binary_level({"+", "-"}, &Parser::parse_term); }
    ExprPtr parse_term() { return parse_binary_level({"*", "/", "//", "%", "@"}, &Parser::parse_factor); }

    ExprPtr parse_factor() {
        if (at_op("+") || at_op("-") || at_op("~")) {
            auto e = make(ExprKind::Operation, off());
            ++pos_;
            e->operands.push_back(parse_factor());
            return e;
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        accept_kw("await");
        auto base = parse_primary();
        if (accept_op("**")) return binary(std::move(base), parse_factor());
        return base;
    }

    ExprPtr parse_bitor_or_star() {
        if (at_op("*")) {
            auto e = make(ExprKind::Starred, off());
            ++pos_;
            e->operands.push_back(parse_bitor());
            return e;
        }
        return parse_bitor();
    }

    // Targets of `for` and `with ... as`: stops before `in`.
    ExprPtr parse_target_list() {
        const std::size_t start = off();
        auto first = parse_bitor_or_star();
        if (!at_op(",")) return first;
        auto tuple = make(ExprKind::Tuple, start);
        tuple->operands.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_kw("in") || at_op("=") || at_op(":")) break;
            tuple->operands.push_back(parse_bitor_or_star());
        }
        return tuple;
    }

    ExprPtr parse_target() { return parse_bitor_or_star(); }

    ExprPtr parse_primary() {
        auto e = parse_atom();
        for (;;) {
            if (at_op(".")) {
                ++pos_;
                auto attr = make(ExprKind::Attribute, e->offset);
                if (!at(TokenKind::Name)) throw SyntaxError{pos_};
                attr->id = toks_[pos_++].text;
                attr->operands.push_back(std::move(e));
                e = std::move(attr);
            } else if (at_op("(")) {
                auto call = make(ExprKind::Call, off());
                ++pos_;
                call->operands.push_back(std::move(e));
                for (auto& arg : parse_call_arguments()) call->operands.push_back(std::move(arg));
                expect_op(")");
                e = std::move(call);
            } else if (at_op("[")) {
                auto sub = make(ExprKind::Subscript, e->offset);
                ++pos_;
                sub->operands.push_back(std::move(e));
                parse_subscripts(sub->operands);
                expect_op("]");
                e = std::move(sub);
            } else {
                return e;
            }
        }
    }

    std::vector<ExprPtr> parse_call_arguments() {
        std::vector<ExprPtr> args;
        while (!at_op(")")) {
            if (at_op("*") || at_op("**")) {
                auto star = make(ExprKind::Starred, off());
                ++pos_;
                star->operands.push_back(parse_test());
                args.push_back(std::move(star));
            } else if (at(TokenKind::Name) && peek().kind == TokenKind::Op && peek().text == "=") {
                pos_ += 2;  // keyword name is not a variable reference
                args.push_back(parse_test());
            } else {
                const std::size_t start = off();
                auto arg = parse_namedexpr_test();
                if (at_kw("for") || at_kw("async")) {
                    auto comp = make(ExprKind::Comprehension, start);
                    comp->operands.push_back(std::move(arg));
                    comp->generators = parse_comp_for();
                    arg = std::move(comp);
                }
                args.push_back(std::move(arg));
            }
            if (!accept_op(",")) break;
        }
        return args;
    }

    void parse_subscripts(std::vector<ExprPtr>& out) {
        for (;;) {
            if (at_op("]")) break;
            // slice: [lower] ':' [upper] [':' [step]]
            if (!at_op(":")) out.push_back(parse_namedexpr_or_star());
            while (accept_op(":")) {
                if (!at_op(":") && !at_op(",") && !at_op("]")) out.push_back(parse_test());
            }
            if (!accept_op(",")) break;
        }
    }

    std::vector<Generator> parse_comp_for() {
        std::vector<Generator> gens;
        while (at_kw("for") || (at_kw("async") && peek().text == "for")) {
            accept_kw("async");
            expect_kw("for");
            Generator g;
            g.target = parse_target_list();
            expect_kw("in");
            g.iter = parse_or_test();
            while (accept_kw("if")) g.conditions.push_back(parse_test_nocond());
            gens.push_back(std::move(g));
        }
        return gens;
    }

    ExprPtr parse_yield() {
        auto e = make(ExprKind::Yield, off());
        expect_kw("yield");
        accept_kw("from");
        if (!at_statement_end() && !at_op(")") && !at_op("=")) e->operands.push_back(parse_testlist_star());
        return e;
    }

    ExprPtr parse_atom() {
        const Token& t = cur();
        const std::size_t start = off();
        if (t.kind == TokenKind::Name) {
            if (t.text == "None" || t.text == "True" || t.text == "False") {
                ++pos_;
                return make(ExprKind::Constant, start);
            }
            if (is_keyword(t.text)) throw SyntaxError{pos_};
            auto e = make(ExprKind::Name, start);
            e->id = t.text;
            ++pos_;
            return e;
        }
        if (t.kind == TokenKind::Number) {
            ++pos_;
            return make(ExprKind::Constant, start);
        }
        if (t.kind == TokenKind::String) {
            ExprPtr f;
            while (at(TokenKind::String)) {
                if (cur().fstring) {
                    if (!f) f = make(ExprKind::FString, start);
                    parse_fstring_fields(cur().text, base_ + cur().offset, f->operands);
                }
                ++pos_;
            }
            return f ? std::move(f) : make(ExprKind::Constant, start);
        }
        if (accept_op("...")) return make(ExprKind::Constant, start);
        if (accept_op("(")) {
            if (accept_op(")")) return make(ExprKind::Tuple, start);
            if (at_kw("yield")) {
                auto y = parse_yield();
                expect_op(")");
                return y;
            }
            auto first = parse_namedexpr_or_star();
            if (at_kw("for") || at_kw("async")) {
                auto comp = make(ExprKind::Comprehension, start);
                comp->operands.push_back(std::move(first));
                comp->generators = parse_comp_for();
                expect_op(")");
                return comp;
            }
            if (accept_op(")")) return first;  // parenthesized expression
            auto tuple = make(ExprKind::Tuple, start);
            tuple->operands.push_back(std::move(first));
            while (accept_op(",")) {
                if (at_op(")")) break;
                tuple->operands.push_back(parse_namedexpr_or_star());
            }
            expect_op(")");
            return tuple;
        }
        if (accept_op("[")) {
            auto list = make(ExprKind::List, start);
            if (accept_op("]")) return list;
            auto first = parse_namedexpr_or_star();
            if (at_kw("for") || at_kw("async")) {
                auto comp = make(ExprKind::Comprehension, start);
                comp->operands.push_back(std::move(first));
                comp->generators = parse_comp_for();
                expect_op("]");
                return comp;
            }
            list->operands.push_back(std::move(first));
            while (accept_op(",")) {
                if (at_op("]")) break;
                list->operands.push_back(parse_namedexpr_or_star());
            }
            expect_op("]");
            return list;
        }
        if (accept_op("{")) return parse_brace(start);
        throw SyntaxError{pos_};
    }

    ExprPtr parse_brace(std::size_t start) {
        if (accept_op("}")) return make(ExprKind::Dict, start);
        auto parse_dict_entry = [&](std::vector<ExprPtr>& out) {
            if (accept_op("**")) {
                auto star = make(ExprKind::Starred, off());
                star->operands.push_back(parse_bitor());
                out.push_back(std::move(star));
                return;
            }
            out.push_back(parse_test());
            expect_op(":");
            out.push_back(parse_test());
        };
        // Decide dict vs set from the first entry.
        const bool dict_like = at_op("**") || [&] {
            const std::size_t save = pos_;
            try {
                parse_namedexpr_or_star();
                const bool colon = at_op(":");
                pos_ = save;
                return colon;
            } catch (const SyntaxError&) {
                pos_ = save;
                return false;
            }
        }();
        if (dict_like) {
            auto dict = make(ExprKind::Dict, start);
            parse_dict_entry(dict->operands);
            if (at_kw("for") || at_kw("async")) {
                auto comp = make(ExprKind::Comprehension, start);
                comp->operands = std::move(dict->operands);
                comp->generators = parse_comp_for();
                expect_op("}");
                return comp;
            }
            while (accept_op(",")) {
                if (at_op("}")) break;
                parse_dict_entry(dict->operands);
            }
            expect_op("}");
            return dict;
        }
        auto set = make(ExprKind::Set, start);
        auto first = parse_namedexpr_or_star();
        if (at_kw("for") || at_kw("async")) {
            auto comp = make(ExprKind::Comprehension, start);
            comp->operands.push_back(std::move(first));
            comp->generators = parse_comp_for();
            expect_op("}");
            return comp;
        }
        set->operands.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("}")) break;
            set->operands.push_back(parse_namedexpr_or_star());
        }
        expect_op("}");
        return set;
    }

    // Extracts `{expr}` replacement fields (including nested ones in format
    // specs) and parses each as an expression. Unparseable fields are ignored.
    static void parse_fstring_fields(const std::string& body, std::size_t body_offset, std::vector<ExprPtr>& out) {
        std::size_t i = 0;
        while (i < body.size()) {
            if (body[i] == '{') {
                if (i + 1 < body.size() && body[i + 1] == '{') {
                    i += 2;
                    continue;
                }
                i = parse_field(body, i + 1, body_offset, out);
            } else {
                ++i;
            }
        }
    }

    static std::size_t parse_field(const std::string& body, std::size_t start, std::size_t body_offset,
                                   std::vector<ExprPtr>& out) {
        int depth = 0;
        char quote = 0;
        std::size_t i = start;
        std::size_t expr_end = std::string::npos;
        for (; i < body.size(); ++i) {
            const char c = body[i];
            if (quote) {
                if (c == quote) quote = 0;
                continue;
            }
            if (c == '\'' || c == '"') {
                quote = c;
            } else if (c == '(' || c == '[' || c == '{') {
                ++depth;
            } else if ((c == ')' || c == ']' || c == '}') && depth > 0) {
                --depth;
            } else if (depth == 0 && (c == '}' || c == ':' || (c == '!' && (i + 1 >= body.size() || body[i + 1] != '=')))) {
                expr_end = i;
                break;
            }
        }
        if (expr_end == std::string::npos) return body.size();
        std::string text = body.substr(start, expr_end - start);
        while (!text.empty() && (text.back() == ' ' || text.back() == '=')) text.pop_back();  // f"{x=}"
        try {
            auto tokens = tokenize("(" + text + ")");
            Parser sub(std::move(tokens), body_offset + start - 1);
            out.push_back(sub.parse_standalone_expression());
        } catch (const SyntaxError&) {
        } catch (const Error&) {
        }
        // Skip conversion and format spec, recursing into nested fields.
        i = expr_end;
        while (i < body.size() && body[i] != '}') {
            if (body[i] == '{') {
                i = parse_field(body, i + 1, body_offset, out);
            } else {
                ++i;
            }
        }
        return i + 1;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::size_t base_ = 0;
    std::size_t opaque_count_ = 0;
};

void walk_expr(const Expr& e, const std::function<void(const Expr&)>& visit) {
    visit(e);
    for (const auto& op : e.operands) {
        if (op) walk_expr(*op, visit);
    }
    for (const auto& p : e.params) {
        if (p.default_value) walk_expr(*p.default_value, visit);
        if (p.annotation) walk_expr(*p.annotation, visit);
    }
    for (const auto& g : e.generators) {
        if (g.target) walk_expr(*g.target, visit);
        if (g.iter) walk_expr(*g.iter, visit);
        for (const auto& c : g.conditions) walk_expr(*c, visit);
    }
}

void walk_stmts(const std::vector<Stmt>& body, const std::function<void(const Expr&)>& visit);

void walk_stmt(const Stmt& s, const std::function<void(const Expr&)>& visit) {
    auto each = [&](const std::vector<ExprPtr>& v) {
        for (const auto& e : v) {
            if (e) walk_expr(*e, visit);
        }
    };
    each(s.decorators);
    for (const auto& p : s.params) {
        if (p.default_value) walk_expr(*p.default_value, visit);
        if (p.annotation) walk_expr(*p.annotation, visit);
    }
    each(s.bases);
    // Right-hand sides run before the targets are stored.
    if (s.kind == StmtKind::Assign || s.kind == StmtKind::AugAssign || s.kind == StmtKind::AnnAssign ||
        s.kind == StmtKind::For) {
        if (s.value) walk_expr(*s.value, visit);
        each(s.targets);
    } else {
        each(s.targets);
        if (s.value) walk_expr(*s.value, visit);
    }
    each(s.extra);
    for (const auto& item : s.items) {
        if (item.context) walk_expr(*item.context, visit);
        if (item.target) walk_expr(*item.target, visit);
    }
    walk_stmts(s.body, visit);
    for (const auto& h : s.handlers) {
        if (h.type) walk_expr(*h.type, visit);
        walk_stmts(h.body, visit);
    }
    walk_stmts(s.orelse, visit);
    walk_stmts(s.finalbody, visit);
}

void walk_stmts(const std::vector<Stmt>& body, const std::function<void(const Expr&)>& visit) {
    for (const auto& s : body) walk_stmt(s, visit);
}

}  // namespace

Module parse_module(std::string_view source) {
    return Parser(tokenize(source)).parse_module();
}

void for_each_expr(const Module& module, const std::function<void(const Expr&)>& visit) {
    walk_stmts(module.body, visit);
}

void for_each_expr(const Expr& expr, const std::function<void(const Expr&)>& visit) {
    walk_expr(expr, visit);
}

bool is_keyword(std::string_view name) {
    for (auto k : kKeywords) {
        if (k == name) return true;
    }
    return false;
}

const std::set<std::string, std::less<>>& builtin_names() {
    static const std::set<std::string, std::less<>> names = {
        "abs", "aiter", "all", "anext", "any", "ascii", "bin", "bool", "breakpoint", "bytearray", "bytes",
        "callable", "chr", "classmethod", "compile", "complex", "copyright", "credits", "delattr", "dict", "dir",
        "divmod", "enumerate", "eval", "exec", "exit", "filter", "float", "format", "frozenset", "getattr",
        "globals", "hasattr", "hash", "help", "hex", "id", "input", "int", "isinstance", "issubclass", "iter",
        "len", "license", "list", "locals", "map", "max", "memoryview", "min", "next", "object", "oct", "open",
        "ord", "pow", "print", "property", "quit", "range", "repr", "reversed", "round", "set", "setattr",
        "slice", "sorted", "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip", "__import__",
        "__name__", "__file__", "__doc__", "__builtins__", "__spec__", "__loader__", "__package__",
        "NotImplemented", "Ellipsis",
        "BaseException", "Exception", "ArithmeticError", "AssertionError", "AttributeError", "BufferError",
        "EOFError", "FileExistsError", "FileNotFoundError", "FloatingPointError", "GeneratorExit", "ImportError",
        "IndentationError", "IndexError", "InterruptedError", "IsADirectoryError", "KeyError",
        "KeyboardInterrupt", "LookupError", "MemoryError", "ModuleNotFoundError", "NameError",
        "NotADirectoryError", "NotImplementedError", "OSError", "OverflowError", "PermissionError",
        "RecursionError", "ReferenceError", "RuntimeError", "StopIteration", "StopAsyncIteration",
        "SyntaxError", "SystemError", "SystemExit", "TabError", "TimeoutError", "TypeError",
        "UnboundLocalError", "UnicodeDecodeError", "UnicodeEncodeError", "UnicodeError", "ValueError",
        "ZeroDivisionError", "Warning", "UserWarning", "DeprecationWarning", "FutureWarning",
        "RuntimeWarning", "IOError", "EnvironmentError",
        // IPython kernel namespace
        "display", "get_ipython", "In", "Out"};
    return names;
}

bool is_builtin(std::string_view name) {
    return builtin_names().find(name) != builtin_names().end();
}

}  // namespace edascope::python
