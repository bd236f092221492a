#include <set>

#include "cell_analysis.hpp"
#include "edascope/error.hpp"
#include "edascope/python_parser.hpp"

namespace edascope::detail {

using python::Expr;
using python::ExprKind;
using python::Stmt;
using python::StmtKind;

namespace {

// Receives name events from the syntax walk. `read_deferred` carries free
// names of nested function bodies, which only resolve when called.
class Scope {
public:
    virtual ~Scope() = default;
    virtual void read(const std::string& name) = 0;
    virtual void read_deferred(const std::string& name) = 0;
    virtual void bind(const std::string& name) = 0;
};

void visit_expr(const Expr& e, Scope& scope);
void visit_stmts(const std::vector<Stmt>& body, Scope& scope);

const std::string* root_name(const Expr& e) {
    const Expr* cur = &e;
    while ((cur->kind == ExprKind::Attribute || cur->kind == ExprKind::Subscript) && !cur->operands.empty()) {
        cur = cur->operands.front().get();
    }
    return cur->kind == ExprKind::Name ? &cur->id : nullptr;
}

// Names a target expression binds directly (attribute/subscript stores do
// not create a local).
void target_names(const Expr& e, std::set<std::string>& out) {
    switch (e.kind) {
        case ExprKind::Name:
            out.insert(e.id);
            break;
        case ExprKind::Tuple:
        case ExprKind::List:
        case ExprKind::Starred:
            for (const auto& op : e.operands) target_names(*op, out);
            break;
        default:
            break;
    }
}

void collect_walrus(const Expr& e, std::set<std::string>& out) {
    if (e.kind == ExprKind::Lambda) return;
    if (e.kind == ExprKind::NamedExpr) out.insert(e.operands[0]->id);
    for (const auto& op : e.operands) {
        if (op) collect_walrus(*op, out);
    }
    for (const auto& g : e.generators) {
        collect_walrus(*g.iter, out);
        for (const auto& c : g.conditions) collect_walrus(*c, out);
    }
}

// Local names of a function or class body, per Python's rule that any
// binding anywhere in the body makes the name local throughout.
void collect_bindings(const std::vector<Stmt>& body, std::set<std::string>& locals, std::set<std::string>& declared) {
    auto exprs = [&](const auto& e) {
        if (e) collect_walrus(*e, locals);
    };
    for (const auto& s : body) {
        exprs(s.value);
        for (const auto& x : s.extra) exprs(x);
        switch (s.kind) {
            case StmtKind::Assign:
            case StmtKind::AugAssign:
            case StmtKind::AnnAssign:
            case StmtKind::For:
            case StmtKind::Delete:
                for (const auto& t : s.targets) target_names(*t, locals);
                break;
            case StmtKind::Import:
                for (const auto& n : s.names) {
                    locals.insert(n.asname.empty() ? n.name.substr(0, n.name.find('.')) : n.asname);
                }
                break;
            case StmtKind::ImportFrom:
                for (const auto& n : s.names) {
                    if (n.name != "*") locals.insert(n.asname.empty() ? n.name : n.asname);
                }
                break;
            case StmtKind::FunctionDef:
            case StmtKind::ClassDef:
                locals.insert(s.name);
                continue;  // nested scopes keep their own bindings
            case StmtKind::Global:
            case StmtKind::Nonlocal:
                for (const auto& n : s.names) declared.insert(n.name);
                break;
            default:
                break;
        }
        for (const auto& item : s.items) {
            if (item.target) target_names(*item.target, locals);
        }
        for (const auto& h : s.handlers) {
            if (!h.name.empty()) locals.insert(h.name);
            collect_bindings(h.body, locals, declared);
        }
        collect_bindings(s.body, locals, declared);
        collect_bindings(s.orelse, locals, declared);
        collect_bindings(s.finalbody, locals, declared);
    }
}

// Function/lambda body: every non-local read is free and deferred.
class FunctionScope : public Scope {
public:
    explicit FunctionScope(std::set<std::string> locals) : locals_(std::move(locals)) {}
    void read(const std::string& name) override {
        if (!locals_.count(name)) free_.insert(name);
    }
    void read_deferred(const std::string& name) override { read(name); }
    void bind(const std::string&) override {}
    const std::set<std::string>& free_names() const { return free_; }

private:
    std::set<std::string> locals_;
    std::set<std::string> free_;
};

// Class body: runs immediately; methods do not see class-level names.
class ClassScope : public Scope {
public:
    ClassScope(std::set<std::string> locals, Scope& parent) : locals_(std::move(locals)), parent_(parent) {}
    void read(const std::string& name) override {
        if (!locals_.count(name)) parent_.read(name);
    }
    void read_deferred(const std::string& name) override { parent_.read_deferred(name); }
    void bind(const std::string&) override {}

private:
    std::set<std::string> locals_;
    Scope& parent_;
};

// Comprehension: generator targets are local, walrus binds outward.
class ComprehensionScope : public Scope {
public:
    ComprehensionScope(std::set<std::string> locals, Scope& parent) : locals_(std::move(locals)), parent_(parent) {}
    void read(const std::string& name) override {
        if (!locals_.count(name)) parent_.read(name);
    }
    void read_deferred(const std::string& name) override {
        if (!locals_.count(name)) parent_.read_deferred(name);
    }
    void bind(const std::string& name) override {
        if (!locals_.count(name)) parent_.bind(name);
    }

private:
    std::set<std::string> locals_;
    Scope& parent_;
};

class ModuleScope : public Scope {
public:
    void read(const std::string& name) override {
        if (!bound_.count(name)) used_.insert(name);
    }
    void read_deferred(const std::string& name) override { deferred_.insert(name); }
    void bind(const std::string& name) override {
        bound_.insert(name);
        defined_.insert(name);
    }

    DefUse finish() {
        for (const auto& d : deferred_) {
            if (!defined_.count(d)) used_.insert(d);
        }
        DefUse du;
        du.defined = std::move(defined_);
        du.used = std::move(used_);
        return du;
    }

private:
    std::set<std::string> bound_;
    std::set<std::string> defined_;
    std::set<std::string> used_;
    std::set<std::string> deferred_;
};

void visit_params(const std::vector<python::Parameter>& params, Scope& scope) {
    for (const auto& p : params) {
        if (p.default_value) visit_expr(*p.default_value, scope);
        if (p.annotation) visit_expr(*p.annotation, scope);
    }
}

void visit_function_body(const std::vector<python::Parameter>& params, const std::vector<Stmt>* body,
                         const Expr* body_expr, Scope& scope) {
    std::set<std::string> locals;
    std::set<std::string> declared;
    for (const auto& p : params) locals.insert(p.name);
    if (body) collect_bindings(*body, locals, declared);
    if (body_expr) collect_walrus(*body_expr, locals);
    for (const auto& d : declared) locals.erase(d);
    FunctionScope fs(std::move(locals));
    if (body) visit_stmts(*body, fs);
    if (body_expr) visit_expr(*body_expr, fs);
    for (const auto& n : fs.free_names()) scope.read_deferred(n);
}

// Stores into a target. Attribute and subscript stores mutate the root
// object, which counts as a redefinition of the root name.
void visit_target(const Expr& e, Scope& scope) {
    switch (e.kind) {
        case ExprKind::Name:
            scope.bind(e.id);
            break;
        case ExprKind::Tuple:
        case ExprKind::List:
        case ExprKind::Starred:
            for (const auto& op : e.operands) visit_target(*op, scope);
            break;
        case ExprKind::Attribute:
        case ExprKind::Subscript: {
            for (const auto& op : e.operands) visit_expr(*op, scope);
            if (const auto* root = root_name(e)) scope.bind(*root);
            break;
        }
        default:
            visit_expr(e, scope);
            break;
    }
}

void visit_expr(const Expr& e, Scope& scope) {
    switch (e.kind) {
        case ExprKind::Name:
            scope.read(e.id);
            return;
        case ExprKind::Lambda:
            visit_params(e.params, scope);
            visit_function_body(e.params, nullptr, e.operands.front().get(), scope);
            return;
        case ExprKind::NamedExpr:
            visit_expr(*e.operands[1], scope);
            scope.bind(e.operands[0]->id);
            return;
        case ExprKind::Comprehension: {
            if (e.generators.empty()) break;
            visit_expr(*e.generators.front().iter, scope);
            std::set<std::string> locals;
            for (const auto& g : e.generators) target_names(*g.target, locals);
            ComprehensionScope cs(std::move(locals), scope);
            for (std::size_t i = 0; i < e.generators.size(); ++i) {
                const auto& g = e.generators[i];
                if (i > 0) visit_expr(*g.iter, cs);
                visit_target(*g.target, cs);
                for (const auto& c : g.conditions) visit_expr(*c, cs);
            }
            for (const auto& op : e.operands) visit_expr(*op, cs);
            return;
        }
        default:
            break;
    }
    for (const auto& op : e.operands) {
        if (op) visit_expr(*op, scope);
    }
}

void visit_stmt(const Stmt& s, Scope& scope) {
    auto each = [&](const std::vector<python::ExprPtr>& v) {
        for (const auto& e : v) visit_expr(*e, scope);
    };
    switch (s.kind) {
        case StmtKind::Expr:
        case StmtKind::Return:
            if (s.value) visit_expr(*s.value, scope);
            break;
        case StmtKind::Assign:
            visit_expr(*s.value, scope);
            for (const auto& t : s.targets) visit_target(*t, scope);
            break;
        case StmtKind::AugAssign:
            if (s.targets[0]->kind == ExprKind::Name) scope.read(s.targets[0]->id);
            visit_expr(*s.value, scope);
            visit_target(*s.targets[0], scope);
            break;
        case StmtKind::AnnAssign:
            each(s.extra);
            if (s.value) {
                visit_expr(*s.value, scope);
                visit_target(*s.targets[0], scope);
            } else if (s.targets[0]->kind != ExprKind::Name) {
                visit_expr(*s.targets[0], scope);
            }
            break;
        case StmtKind::Import:
            for (const auto& n : s.names) {
                scope.bind(n.asname.empty() ? n.name.substr(0, n.name.find('.')) : n.asname);
            }
            break;
        case StmtKind::ImportFrom:
            for (const auto& n : s.names) {
                if (n.name != "*") scope.bind(n.asname.empty() ? n.name : n.asname);
            }
            break;
        case StmtKind::FunctionDef:
            each(s.decorators);
            visit_params(s.params, scope);
            each(s.extra);
            scope.bind(s.name);
            visit_function_body(s.params, &s.body, nullptr, scope);
            break;
        case StmtKind::ClassDef: {
            each(s.decorators);
            each(s.bases);
            std::set<std::string> locals;
            std::set<std::string> declared;
            collect_bindings(s.body, locals, declared);
            ClassScope cs(std::move(locals), scope);
            visit_stmts(s.body, cs);
            scope.bind(s.name);
            break;
        }
        case StmtKind::For:
            visit_expr(*s.value, scope);
            visit_target(*s.targets[0], scope);
            visit_stmts(s.body, scope);
            visit_stmts(s.orelse, scope);
            break;
        case StmtKind::While:
        case StmtKind::If:
            visit_expr(*s.value, scope);
            visit_stmts(s.body, scope);
            visit_stmts(s.orelse, scope);
            break;
        case StmtKind::With:
            for (const auto& item : s.items) {
                visit_expr(*item.context, scope);
                if (item.target) visit_target(*item.target, scope);
            }
            visit_stmts(s.body, scope);
            break;
        case StmtKind::Try:
            visit_stmts(s.body, scope);
            for (const auto& h : s.handlers) {
                if (h.type) visit_expr(*h.type, scope);
                if (!h.name.empty()) scope.bind(h.name);
                visit_stmts(h.body, scope);
            }
            visit_stmts(s.orelse, scope);
            visit_stmts(s.finalbody, scope);
            break;
        case StmtKind::Delete:
            for (const auto& t : s.targets) {
                if (t->kind == ExprKind::Name) {
                    scope.read(t->id);
                } else {
                    visit_target(*t, scope);
                }
            }
            break;
        case StmtKind::Raise:
        case StmtKind::Assert:
            if (s.value) visit_expr(*s.value, scope);
            each(s.extra);
            break;
        case StmtKind::Opaque:
            for (const auto& n : s.opaque_names) scope.read(n);
            break;
        case StmtKind::Global:
        case StmtKind::Nonlocal:
        case StmtKind::Pass:
        case StmtKind::Break:
        case StmtKind::Continue:
            break;
    }
}

void visit_stmts(const std::vector<Stmt>& body, Scope& scope) {
    for (const auto& s : body) visit_stmt(s, scope);
}

}  // namespace

DefUse module_def_use(const python::Module& module) {
    ModuleScope scope;
    visit_stmts(module.body, scope);
    return scope.finish();
}

bool callee_matches(const Expr& callee, std::string_view pattern) {
    if (pattern.substr(0, 2) == "*.") {
        return callee.kind == ExprKind::Attribute && callee.id == pattern.substr(2);
    }
    // Exact dotted match against a Name-rooted attribute chain.
    std::string dotted;
    const Expr* cur = &callee;
    while (cur->kind == ExprKind::Attribute) {
        dotted.insert(0, "." + cur->id);
        cur = cur->operands.front().get();
    }
    if (cur->kind != ExprKind::Name) return false;
    dotted.insert(0, cur->id);
    return dotted == pattern;
}

CellSyntax analyze_cell(std::string_view cell_source) {
    CellSyntax out;
    try {
        out.module = python::parse_module(python::strip_magics(cell_source));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ParseFailure) throw;
        out.def_use.parse_failed = true;
        return out;
    }
    out.def_use = module_def_use(out.module);
    if (!out.module.body.empty()) {
        const Stmt& last = out.module.body.back();
        out.trailing_expression = last.kind == StmtKind::Expr && !last.semicolon_terminated && last.value &&
                                  last.value->kind != ExprKind::Yield;
    }
    python::for_each_expr(out.module, [&](const Expr& e) {
        if (e.kind == ExprKind::Call) out.callees.push_back(e.operands.front().get());
    });
    return out;
}

}  // namespace edascope::detail

namespace edascope {

DefUse defs_uses(std::string_view cell_source) {
    return detail::analyze_cell(cell_source).def_use;
}

}  // namespace edascope
